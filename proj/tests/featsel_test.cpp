#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "volscreen/featsel.hpp"
#include "volscreen/rng.hpp"

using namespace volscreen;

namespace {

Eigen::MatrixXd random_matrix(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  return x;
}

// Zero-mean columns with x_j^T x_k = n * delta_jk.
Eigen::MatrixXd orthonormal_design(int n, int d, std::uint64_t seed) {
  Eigen::MatrixXd x = random_matrix(n, d, seed);
  x.rowwise() -= x.colwise().mean();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  return q * std::sqrt(static_cast<double>(n));
}

double soft_threshold(double v, double lambda) {
  double z = std::abs(v) - lambda;
  return z > 0.0 ? std::copysign(z, v) : 0.0;
}

FeatureMatrix named(const Eigen::MatrixXd& x) {
  FeatureMatrix fm;
  fm.values = x;
  for (int j = 0; j < x.cols(); ++j) fm.names.push_back("f" + std::to_string(j));
  return fm;
}

}  // namespace

TEST_CASE("drop_constant removes zero-range columns only") {
  Eigen::MatrixXd x(5, 3);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1.0;                  // constant
    x(i, 1) = static_cast<double>(i);  // increasing
    x(i, 2) = 2.0 + (i == 3 ? 1e-14 : 0.0);  // near-constant, must stay
  }
  std::vector<std::string> removed;
  FeatureMatrix out = drop_constant(named(x), &removed);
  CHECK(out.names == std::vector<std::string>{"f1", "f2"});
  CHECK(removed == std::vector<std::string>{"f0"});

  Eigen::MatrixXd allc = Eigen::MatrixXd::Ones(4, 2);
  CHECK_THROWS_AS(drop_constant(named(allc), nullptr), FeatselError);
}

TEST_CASE("correlation_filter drops the later column") {
  Rng rng(11);
  Eigen::MatrixXd x(1000, 4);
  for (int i = 0; i < 1000; ++i) {
    x(i, 0) = rng.gaussian();
    x(i, 1) = rng.gaussian();   // independent of column 0
    x(i, 2) = x(i, 0);          // duplicate of column 0
    x(i, 3) = -x(i, 1);         // anti-correlated with column 1
  }
  std::vector<CorrelationDrop> drops;
  FeatureMatrix out = correlation_filter(named(x), 0.5, &drops);
  CHECK(out.names == std::vector<std::string>{"f0", "f1"});
  REQUIRE(drops.size() == 2);
  CHECK(drops[0].kept == "f0");
  CHECK(drops[0].dropped == "f2");
  CHECK(drops[0].r2 == doctest::Approx(1.0));
  CHECK(drops[1].kept == "f1");
  CHECK(drops[1].dropped == "f3");
  CHECK(drops[1].r2 == doctest::Approx(1.0));

  // Determinism: identical input gives an identical kept list.
  std::vector<CorrelationDrop> drops2;
  FeatureMatrix out2 = correlation_filter(named(x), 0.5, &drops2);
  CHECK(out2.names == out.names);
}

TEST_CASE("lasso_path all-zero at lambda_max and above") {
  Eigen::MatrixXd x = orthonormal_design(200, 10, 3);
  Rng rng(4);
  Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(10);
  beta_true[0] = 1.5;
  beta_true[4] = -2.0;
  Eigen::VectorXd y = x * beta_true;
  for (int i = 0; i < y.size(); ++i) y[i] += 0.1 * rng.gaussian();
  y.array() -= y.mean();

  double lmax = lasso_lambda_max(x, y);
  Eigen::VectorXd lams(3);
  lams << 2.0 * lmax, 1.1 * lmax, lmax;
  LassoPath path = lasso_path(x, y, lams);
  CHECK(path.coefs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lasso_path matches soft-threshold closed form on orthonormal designs") {
  Eigen::MatrixXd x = orthonormal_design(200, 10, 7);
  Rng rng(8);
  Eigen::VectorXd beta_true(10);
  for (int j = 0; j < 10; ++j) beta_true[j] = rng.gaussian();
  Eigen::VectorXd y = x * beta_true;
  for (int i = 0; i < y.size(); ++i) y[i] += 0.3 * rng.gaussian();
  y.array() -= y.mean();

  const double n = 200.0;
  Eigen::VectorXd grid = make_lambda_grid(lasso_lambda_max(x, y), 100, 1e-4);
  LassoPath path = lasso_path(x, y, grid);
  for (int li = 0; li < grid.size(); ++li) {
    for (int j = 0; j < 10; ++j) {
      double oracle = soft_threshold(x.col(j).dot(y) / n, grid[li]) /
                      (x.col(j).squaredNorm() / n);
      CHECK(std::abs(path.coefs(j, li) - oracle) < 1e-6);
    }
  }
}

TEST_CASE("lasso_path at lambda zero matches least squares") {
  Eigen::MatrixXd x = random_matrix(100, 5, 21);
  ColumnStats stats = compute_column_stats(x);
  Eigen::MatrixXd xs = apply_standardization(x, stats);
  Rng rng(22);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i)
    y[i] = 1.2 * xs(i, 0) - 0.7 * xs(i, 3) + 0.05 * rng.gaussian();
  y.array() -= y.mean();

  Eigen::VectorXd lams(4);
  double lmax = lasso_lambda_max(xs, y);
  lams << lmax, lmax * 0.1, lmax * 0.001, 0.0;  // warm start down to zero
  LassoPath path = lasso_path(xs, y, lams, 1e-10, 100000);

  Eigen::VectorXd ols = (xs.transpose() * xs).ldlt().solve(xs.transpose() * y);
  CHECK((path.coefs.col(3) - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("select_lambda_1se rule") {
  // Grid given ascending; the 1SE pick is by lambda value, not grid position.
  Eigen::VectorXd lambdas(5), mse(5), se(5);
  lambdas << 0.01, 0.1, 1.0, 10.0, 100.0;
  mse << 5.0, 3.0, 2.0, 2.05, 4.0;
  se << 0.3, 0.2, 0.1, 0.1, 0.4;
  int idx = select_lambda_1se(lambdas, mse, se);
  CHECK(idx == 3);
  CHECK(lambdas[idx] == 10.0);

  // SE identically zero: the argmin itself is selected.
  Eigen::VectorXd zero_se = Eigen::VectorXd::Zero(5);
  CHECK(select_lambda_1se(lambdas, mse, zero_se) == 2);

  // Selected lambda is never below the argmin lambda.
  CHECK(lambdas[idx] >= lambdas[2]);
}

TEST_CASE("lasso_cv_1se recovers a sparse signal") {
  const int n = 500, d = 22;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Eigen::MatrixXd x = random_matrix(n, d, 100 + seed);
    Rng rng(200 + seed);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i)
      y[i] = 3.0 * x(i, 1) + 2.0 * x(i, 3) + 0.5 * rng.gaussian();

    LassoCvResult res = lasso_cv_1se(named(x), y, 10, 300 + seed);
    bool has1 = std::find(res.active.begin(), res.active.end(), "f1") != res.active.end();
    bool has3 = std::find(res.active.begin(), res.active.end(), "f3") != res.active.end();
    CHECK(res.selected_lambda >= res.lambdas[res.min_index]);
    if (has1 && has3 && res.active.size() <= 6) ++hits;
  }
  CHECK(hits == 10);
}

TEST_CASE("outer_union") {
  auto u = outer_union({{"a", "b"}, {"b", "c"}, {"c"}});
  CHECK(u == std::vector<std::string>{"a", "b", "c"});
  CHECK(outer_union({{}, {}, {}}).empty());
}
