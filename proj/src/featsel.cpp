#include "volscreen/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "volscreen/csv.hpp"
#include "volscreen/rng.hpp"

namespace volscreen {

FeatureMatrix drop_constant(const FeatureMatrix& fm, std::vector<std::string>* removed) {
  if (fm.rows() < 1) throw FeatselError("drop_constant needs at least one row");
  std::vector<int> keep;
  for (int j = 0; j < fm.cols(); ++j) {
    double lo = fm.values.col(j).minCoeff();
    double hi = fm.values.col(j).maxCoeff();
    if (hi - lo == 0.0) {
      if (removed) removed->push_back(fm.names[static_cast<std::size_t>(j)]);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) throw FeatselError("all feature columns are constant");
  FeatureMatrix out;
  out.values.resize(fm.rows(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.names.push_back(fm.names[static_cast<std::size_t>(keep[k])]);
    out.values.col(static_cast<int>(k)) = fm.values.col(keep[k]);
  }
  return out;
}

namespace {

double pearson_r2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = static_cast<double>(a.size());
  double ma = a.mean(), mb = b.mean();
  Eigen::VectorXd ca = a.array() - ma;
  Eigen::VectorXd cb = b.array() - mb;
  double cov = ca.dot(cb) / n;
  double va = ca.squaredNorm() / n;
  double vb = cb.squaredNorm() / n;
  if (va == 0.0 || vb == 0.0) return 0.0;
  double r = cov / std::sqrt(va * vb);
  return r * r;
}

}  // namespace

FeatureMatrix correlation_filter(const FeatureMatrix& fm, double r2_threshold,
                                 std::vector<CorrelationDrop>* dropped) {
  std::vector<bool> keep(static_cast<std::size_t>(fm.cols()), true);
  for (int j = 0; j < fm.cols(); ++j) {
    if (!keep[static_cast<std::size_t>(j)]) continue;
    for (int k = j + 1; k < fm.cols(); ++k) {
      if (!keep[static_cast<std::size_t>(k)]) continue;
      double r2 = pearson_r2(fm.values.col(j), fm.values.col(k));
      if (r2 > r2_threshold) {
        keep[static_cast<std::size_t>(k)] = false;
        if (dropped)
          dropped->push_back({fm.names[static_cast<std::size_t>(j)],
                              fm.names[static_cast<std::size_t>(k)], r2});
      }
    }
  }
  FeatureMatrix out;
  std::vector<int> cols;
  for (int j = 0; j < fm.cols(); ++j)
    if (keep[static_cast<std::size_t>(j)]) cols.push_back(j);
  out.values.resize(fm.rows(), static_cast<int>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.names.push_back(fm.names[static_cast<std::size_t>(cols[k])]);
    out.values.col(static_cast<int>(k)) = fm.values.col(cols[k]);
  }
  return out;
}

ColumnStats compute_column_stats(const Eigen::MatrixXd& x) {
  ColumnStats s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean();
  s.std.resize(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    double var = (x.col(j).array() - s.mean[j]).square().sum() / n;
    double sd = std::sqrt(var);
    s.std[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& x, const ColumnStats& s) {
  Eigen::MatrixXd out = x;
  for (int j = 0; j < x.cols(); ++j)
    out.col(j) = (x.col(j).array() - s.mean[j]) / s.std[j];
  return out;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  // Same per-column expression as the coordinate-descent update, so the KKT
  // zero at lambda_max holds bit-exactly.
  const double n = static_cast<double>(x.rows());
  double m = 0.0;
  for (int j = 0; j < x.cols(); ++j) m = std::max(m, std::abs(x.col(j).dot(y) / n));
  return m;
}

Eigen::VectorXd make_lambda_grid(double lambda_max, int points, double ratio) {
  Eigen::VectorXd grid(points);
  if (points == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double log_top = std::log(lambda_max);
  const double log_bot = std::log(lambda_max * ratio);
  for (int i = 0; i < points; ++i)
    grid[i] = std::exp(log_top + (log_bot - log_top) * i / (points - 1));
  return grid;
}

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& lambdas, double tol, int max_sweeps) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const double dn = static_cast<double>(n);

  Eigen::VectorXd col_sq(d);
  for (int j = 0; j < d; ++j) col_sq[j] = x.col(j).squaredNorm() / dn;

  LassoPath path;
  path.lambdas = lambdas;
  path.coefs = Eigen::MatrixXd::Zero(d, lambdas.size());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd residual = y;

  auto objective = [&](double lambda) {
    return residual.squaredNorm() / (2.0 * dn) + lambda * beta.lpNorm<1>();
  };

  for (int li = 0; li < lambdas.size(); ++li) {
    const double lambda = lambdas[li];
    double prev_obj = objective(lambda);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (int j = 0; j < d; ++j) {
        if (col_sq[j] == 0.0) continue;
        double bj = beta[j];
        double rho = x.col(j).dot(residual) / dn + col_sq[j] * bj;
        double z = std::abs(rho) - lambda;
        double nb = z > 0.0 ? std::copysign(z, rho) / col_sq[j] : 0.0;
        if (nb != bj) {
          residual += x.col(j) * (bj - nb);
          beta[j] = nb;
          max_change = std::max(max_change, std::abs(nb - bj));
        }
      }
      double obj = objective(lambda);
      if (obj > prev_obj * (1.0 + 1e-10) + 1e-12)
        throw FeatselError("coordinate descent objective increased");
      prev_obj = obj;
      if (max_change < tol) break;
    }
    if (sweep == max_sweeps)
      throw FeatselError("lasso coordinate descent did not converge at lambda " +
                         format_g17(lambda));
    path.coefs.col(li) = beta;
  }
  return path;
}

int select_lambda_1se(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& mse_mean,
                      const Eigen::VectorXd& mse_se) {
  int min_idx = 0;
  for (int i = 1; i < mse_mean.size(); ++i)
    if (mse_mean[i] < mse_mean[min_idx]) min_idx = i;
  const double band = mse_mean[min_idx] + mse_se[min_idx];
  int best = min_idx;
  for (int i = 0; i < mse_mean.size(); ++i) {
    if (mse_mean[i] <= band && lambdas[i] > lambdas[best]) best = i;
  }
  return best;
}

LassoCvResult lasso_cv_1se(const FeatureMatrix& fm, const Eigen::VectorXd& y, int folds,
                           std::uint64_t seed, int grid_points, double grid_ratio) {
  const int n = fm.rows();
  const int d = fm.cols();
  if (n < folds) throw FeatselError("fewer rows than CV folds");

  // Shared lambda grid from the full standardized data so per-fold curves align.
  ColumnStats full_stats = compute_column_stats(fm.values);
  Eigen::MatrixXd x_full = apply_standardization(fm.values, full_stats);
  Eigen::VectorXd y_full = y.array() - y.mean();
  Eigen::VectorXd grid = make_lambda_grid(lasso_lambda_max(x_full, y_full), grid_points,
                                          grid_ratio);

  // Seeded random fold assignment.
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fold_of[static_cast<std::size_t>(idx[i])] = static_cast<int>(i) % folds;
  }

  Eigen::MatrixXd fold_mse(folds, grid.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, val;
    for (int i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? val : train).push_back(i);

    Eigen::MatrixXd x_train(train.size(), d), x_val(val.size(), d);
    Eigen::VectorXd y_train(train.size()), y_val(val.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      x_train.row(static_cast<int>(i)) = fm.values.row(train[i]);
      y_train[static_cast<int>(i)] = y[train[i]];
    }
    for (std::size_t i = 0; i < val.size(); ++i) {
      x_val.row(static_cast<int>(i)) = fm.values.row(val[i]);
      y_val[static_cast<int>(i)] = y[val[i]];
    }

    ColumnStats stats = compute_column_stats(x_train);
    double y_mean = y_train.mean();
    Eigen::MatrixXd xs = apply_standardization(x_train, stats);
    Eigen::MatrixXd xvs = apply_standardization(x_val, stats);
    Eigen::VectorXd ys = y_train.array() - y_mean;

    LassoPath path = lasso_path(xs, ys, grid);
    for (int li = 0; li < grid.size(); ++li) {
      Eigen::VectorXd pred = (xvs * path.coefs.col(li)).array() + y_mean;
      fold_mse(f, li) = (pred - y_val).squaredNorm() / static_cast<double>(val.size());
    }
  }

  LassoCvResult res;
  res.lambdas = grid;
  res.mse_mean = fold_mse.colwise().mean();
  res.mse_se.resize(grid.size());
  for (int li = 0; li < grid.size(); ++li) {
    double m = res.mse_mean[li];
    double ss = (fold_mse.col(li).array() - m).square().sum();
    double sample_std = folds > 1 ? std::sqrt(ss / (folds - 1)) : 0.0;
    res.mse_se[li] = sample_std / std::sqrt(static_cast<double>(folds));
  }
  {
    int mi = 0;
    for (int i = 1; i < res.mse_mean.size(); ++i)
      if (res.mse_mean[i] < res.mse_mean[mi]) mi = i;
    res.min_index = mi;
  }
  res.selected_index = select_lambda_1se(res.lambdas, res.mse_mean, res.mse_se);
  res.selected_lambda = res.lambdas[res.selected_index];

  // Refit on all data at the selected lambda (warm-started down the grid).
  Eigen::VectorXd head = grid.head(res.selected_index + 1);
  LassoPath full_path = lasso_path(x_full, y_full, head);
  res.coefficients = full_path.coefs.col(res.selected_index);
  for (int j = 0; j < d; ++j)
    if (res.coefficients[j] != 0.0) res.active.push_back(fm.names[static_cast<std::size_t>(j)]);
  return res;
}

std::vector<std::string> outer_union(const std::vector<std::vector<std::string>>& fold_sets) {
  std::set<std::string> all;
  for (const auto& s : fold_sets) all.insert(s.begin(), s.end());
  return {all.begin(), all.end()};
}

void write_selection_report_csv(const std::string& path,
                                const std::vector<std::string>& all_features,
                                const std::vector<std::vector<std::string>>& fold_sets,
                                const std::vector<std::string>& selected) {
  Table t;
  t.header = {"feature"};
  for (std::size_t f = 0; f < fold_sets.size(); ++f)
    t.header.push_back("fold" + std::to_string(f));
  t.header.push_back("selected");
  std::set<std::string> sel(selected.begin(), selected.end());
  for (const auto& feat : all_features) {
    std::vector<std::string> row{feat};
    for (const auto& fs : fold_sets) {
      bool in = std::find(fs.begin(), fs.end(), feat) != fs.end();
      row.push_back(in ? "1" : "0");
    }
    row.push_back(sel.count(feat) ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

}  // namespace volscreen
