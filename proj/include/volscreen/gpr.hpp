#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace volscreen {

enum class GprErrorKind {
  DimensionMismatch,
  SingularKernel,
  NonFinite,
  TooManyFeatures,
  EmptyBackground,
  LengthMismatch,
  ZeroVariance,
  DataHashMismatch,
};

class GprError : public std::runtime_error {
 public:
  GprError(GprErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  GprErrorKind kind() const { return kind_; }

 private:
  GprErrorKind kind_;
};

enum class KernelFamily {
  Exponential,
  SquaredExponential,
  Matern32,
  Matern52,
  RationalQuadratic,
};

// The ten-entry kernel menu: five families, each isotropic or ARD.
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  bool ard = false;
  double sigma_f2 = 1.0;            // signal variance
  Eigen::VectorXd length_scales;    // size 1 (isotropic) or d (ARD)
  double alpha = 1.0;               // RationalQuadratic only

  int n_length_scales(int dim) const { return ard ? dim : 1; }
};

std::string kernel_name(const KernelSpec& spec);          // e.g. "ardmatern52"
KernelSpec kernel_spec_from_name(const std::string& name);  // hyperparameters default
std::vector<std::string> all_kernel_names();                // the full menu of 10

enum class BasisKind { None, Constant, Linear, PureQuadratic };

std::string basis_name(BasisKind k);
BasisKind basis_from_name(const std::string& name);
std::vector<BasisKind> all_basis_kinds();

// Explicit basis design row(s): none -> 0 columns, constant -> [1],
// linear -> [1, x], pureQuadratic -> [1, x, x^2] (no cross terms).
Eigen::MatrixXd basis_design(BasisKind kind, const Eigen::MatrixXd& x);

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Standardization {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_std;
  double y_mean = 0.0;
  double y_std = 1.0;

  static Standardization identity(int dim);
  static Standardization fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  Eigen::MatrixXd transform_x(const Eigen::MatrixXd& x) const;
};

struct TrainOptions {
  int restarts = 3;
  int max_iter = 200;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;
  bool standardize = true;
  double noise_floor = 1e-8;  // lower bound on the noise variance
};

struct GprPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

class GprModel {
 public:
  // Builds a model at the given hyperparameters, profiling only the basis
  // coefficients (generalized least squares). No hyperparameter optimization.
  static GprModel fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const KernelSpec& kernel, BasisKind basis, double noise2,
                            bool standardize = false);

  // Maximizes the log marginal likelihood over log-hyperparameters by gradient
  // ascent with backtracking line search and seeded random restarts.
  static GprModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        KernelFamily family, bool ard, BasisKind basis,
                        const TrainOptions& opts = {});
  static GprModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::string& kernel, BasisKind basis,
                        const TrainOptions& opts = {});

  GprPrediction predict(const Eigen::MatrixXd& x_query) const;

  double log_marginal_likelihood() const { return lml_; }
  const KernelSpec& kernel() const { return kernel_; }
  BasisKind basis() const { return basis_; }
  double noise2() const { return noise2_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Standardization& standardization() const { return stdz_; }
  int dim() const { return static_cast<int>(x_train_.cols()); }
  int n_train() const { return static_cast<int>(x_train_.rows()); }
  double jitter() const { return jitter_; }
  std::uint64_t data_hash() const { return data_hash_; }

  // Self-describing text record (JSON): kernel, basis, hyperparameters,
  // standardization statistics and a hash of the raw training data. Loading
  // requires the same raw data and verifies the hash.
  void save(const std::string& path) const;
  static GprModel load(const std::string& path, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y);

 private:
  GprModel() = default;
  void factorize();  // builds H, chol, beta, alpha, lml from specs + data

  KernelSpec kernel_;
  BasisKind basis_ = BasisKind::Constant;
  double noise2_ = 1e-2;
  Standardization stdz_;
  Eigen::MatrixXd x_train_;  // standardized
  Eigen::VectorXd y_train_;  // standardized
  Eigen::MatrixXd h_train_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  std::uint64_t data_hash_ = 0;
};

// Log marginal likelihood and its gradient in log-hyperparameter space for
// given (already standardized or raw-as-is) data. Gradient layout:
// [log sigma_f2, log ell_1.., (log alpha for RQ), log noise2]. The basis
// coefficients are profiled out by GLS; by the envelope theorem their
// dependence adds nothing to the gradient.
struct LmlEval {
  double value = 0.0;
  Eigen::VectorXd grad;
};
LmlEval lml_value_and_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const KernelSpec& kernel, BasisKind basis, double noise2);

struct Metrics {
  double r2 = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;  // percent; entries with |y| < 1e-9 are skipped
};

Metrics regression_metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

struct ShapleyResult {
  Eigen::VectorXd attributions;
  double base_value = 0.0;
};

// Interventional Shapley values with exact coalition enumeration (d <= 10):
// the value of a coalition S is the background-averaged prediction with
// features in S taken from x and the rest from the background row.
ShapleyResult shapley_values(const GprModel& model, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& background);

}  // namespace volscreen
