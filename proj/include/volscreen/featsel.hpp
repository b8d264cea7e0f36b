#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace volscreen {

class FeatselError : public std::runtime_error {
 public:
  explicit FeatselError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FeatureMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows = instances

  int cols() const { return static_cast<int>(names.size()); }
  int rows() const { return static_cast<int>(values.rows()); }
};

// Removes columns whose range is exactly zero. Near-constant columns stay.
// Throws FeatselError when nothing would remain.
FeatureMatrix drop_constant(const FeatureMatrix& fm, std::vector<std::string>* removed);

struct CorrelationDrop {
  std::string kept;
  std::string dropped;
  double r2 = 0.0;
};

// Greedy scan in column order: whenever a pair has Pearson R^2 above the
// threshold the later column is dropped. Expects no constant columns.
FeatureMatrix correlation_filter(const FeatureMatrix& fm, double r2_threshold,
                                 std::vector<CorrelationDrop>* dropped);

struct ColumnStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // population; zero-variance columns get std 1
};

ColumnStats compute_column_stats(const Eigen::MatrixXd& x);
Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& x, const ColumnStats& s);

struct LassoPath {
  Eigen::VectorXd lambdas;  // as given (descending for warm starts)
  Eigen::MatrixXd coefs;    // d x n_lambda
};

// Minimizes (1/2n)*||y - X beta||^2 + lambda*||beta||_1 by cyclic coordinate
// descent with warm starts along the lambda sequence. X must be standardized
// and y centered. Convergence: max coefficient change below tol; throws
// FeatselError after max_sweeps sweeps without convergence. The objective is
// checked to be non-increasing across sweeps.
LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& lambdas, double tol = 1e-7,
                     int max_sweeps = 10000);

// Largest lambda with max_j |x_j^T y| / n, the point where every coefficient
// is exactly zero.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

Eigen::VectorXd make_lambda_grid(double lambda_max, int points = 100, double ratio = 1e-4);

// Largest lambda whose mean CV MSE is within one standard error of the
// minimum; pure selection rule, grid order does not matter.
int select_lambda_1se(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& mse_mean,
                      const Eigen::VectorXd& mse_se);

struct LassoCvResult {
  Eigen::VectorXd lambdas;
  Eigen::VectorXd mse_mean;
  Eigen::VectorXd mse_se;
  int min_index = -1;
  int selected_index = -1;
  double selected_lambda = 0.0;
  Eigen::VectorXd coefficients;      // refit on all data at the selected lambda
  std::vector<std::string> active;   // names with nonzero coefficients
};

// Inner k-fold CV with seeded random fold assignment; per-lambda mean MSE and
// SE = sample std across folds / sqrt(folds); 1SE selection; refit on all
// data. Standardization statistics always come from the training side of each
// fold.
LassoCvResult lasso_cv_1se(const FeatureMatrix& fm, const Eigen::VectorXd& y, int folds,
                           std::uint64_t seed, int grid_points = 100,
                           double grid_ratio = 1e-4);

// Sorted, deduplicated union of the per-fold active sets.
std::vector<std::string> outer_union(const std::vector<std::vector<std::string>>& fold_sets);

// Selection report CSV: feature,fold0,fold1,fold2,selected.
void write_selection_report_csv(const std::string& path,
                                const std::vector<std::string>& all_features,
                                const std::vector<std::vector<std::string>>& fold_sets,
                                const std::vector<std::string>& selected);

}  // namespace volscreen
