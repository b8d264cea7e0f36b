#include "volscreen/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "volscreen/csv.hpp"
#include "volscreen/rng.hpp"

namespace volscreen {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;
constexpr double kLog2Pi = 1.8378770664093453;

const char* family_base_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::SquaredExponential: return "squaredexponential";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::RationalQuadratic: return "rationalquadratic";
  }
  return "?";
}

double kernel_value_r(const KernelSpec& s, double r) {
  switch (s.family) {
    case KernelFamily::Exponential:
      return s.sigma_f2 * std::exp(-r);
    case KernelFamily::SquaredExponential:
      return s.sigma_f2 * std::exp(-0.5 * r * r);
    case KernelFamily::Matern32: {
      double t = kSqrt3 * r;
      return s.sigma_f2 * (1.0 + t) * std::exp(-t);
    }
    case KernelFamily::Matern52: {
      double t = kSqrt5 * r;
      return s.sigma_f2 * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
    case KernelFamily::RationalQuadratic:
      return s.sigma_f2 * std::pow(1.0 + r * r / (2.0 * s.alpha), -s.alpha);
  }
  return 0.0;
}

double kernel_dvalue_dr(const KernelSpec& s, double r) {
  switch (s.family) {
    case KernelFamily::Exponential:
      return -s.sigma_f2 * std::exp(-r);
    case KernelFamily::SquaredExponential:
      return -r * s.sigma_f2 * std::exp(-0.5 * r * r);
    case KernelFamily::Matern32:
      return s.sigma_f2 * (-3.0 * r) * std::exp(-kSqrt3 * r);
    case KernelFamily::Matern52:
      return s.sigma_f2 * (-5.0 * r / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
    case KernelFamily::RationalQuadratic:
      return -s.sigma_f2 * r * std::pow(1.0 + r * r / (2.0 * s.alpha), -s.alpha - 1.0);
  }
  return 0.0;
}

void check_lengthscales(const KernelSpec& s, int dim) {
  int expected = s.ard ? dim : 1;
  if (s.length_scales.size() != expected)
    throw GprError(GprErrorKind::DimensionMismatch,
                   "kernel has " + std::to_string(s.length_scales.size()) +
                       " length scales, expected " + std::to_string(expected));
}

// Scaled pairwise distances r_ij between rows of a and b.
Eigen::MatrixXd scaled_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelSpec& s) {
  const int na = static_cast<int>(a.rows());
  const int nb = static_cast<int>(b.rows());
  const int d = static_cast<int>(a.cols());
  Eigen::VectorXd inv_l2(d);
  for (int k = 0; k < d; ++k) {
    double l = s.ard ? s.length_scales[k] : s.length_scales[0];
    inv_l2[k] = 1.0 / (l * l);
  }
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(na, nb);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd ak = a.col(k);
    Eigen::VectorXd bk = b.col(k);
    r2 += inv_l2[k] *
          (ak.replicate(1, nb) - bk.transpose().replicate(na, 1)).array().square().matrix();
  }
  return r2.cwiseMax(0.0).cwiseSqrt();
}

Eigen::MatrixXd kernel_matrix_from_r(const KernelSpec& s, const Eigen::MatrixXd& r) {
  Eigen::MatrixXd k(r.rows(), r.cols());
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) k(i, j) = kernel_value_r(s, r(i, j));
  return k;
}

struct CoreState {
  Eigen::MatrixXd r;  // scaled distances (train x train)
  Eigen::MatrixXd k;  // noise-free kernel matrix
  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter = 0.0;
  Eigen::MatrixXd h;
  Eigen::VectorXd beta;
  Eigen::VectorXd resid;
  Eigen::VectorXd alpha;
  double lml = 0.0;
};

CoreState build_core(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const KernelSpec& kernel, BasisKind basis, double noise2) {
  const int n = static_cast<int>(x.rows());
  CoreState core;
  core.r = scaled_distances(x, x, kernel);
  core.k = kernel_matrix_from_r(kernel, core.r);
  core.k.diagonal().setConstant(kernel.sigma_f2);

  // Jitter ladder on Cholesky failure: 0 then 1e-10 .. 1e-4 in decade steps.
  bool ok = false;
  for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
    Eigen::MatrixXd ky = core.k;
    ky.diagonal().array() += noise2 + jitter;
    core.chol.compute(ky);
    if (core.chol.info() == Eigen::Success) {
      // LLT can "succeed" with non-finite entries on pathological input.
      if (core.chol.matrixLLT().diagonal().allFinite()) {
        core.jitter = jitter;
        ok = true;
        break;
      }
    }
  }
  if (!ok)
    throw GprError(GprErrorKind::SingularKernel,
                   "kernel matrix not positive definite after jitter ladder");

  core.h = basis_design(basis, x);
  const int m = static_cast<int>(core.h.cols());
  if (m > 0) {
    Eigen::MatrixXd b = core.chol.solve(core.h);
    Eigen::MatrixXd a = core.h.transpose() * b;
    Eigen::VectorXd rhs = b.transpose() * y;
    // Minimum-norm GLS solution; robust to redundant basis columns.
    core.beta = a.completeOrthogonalDecomposition().solve(rhs);
    core.resid = y - core.h * core.beta;
  } else {
    core.beta = Eigen::VectorXd(0);
    core.resid = y;
  }
  core.alpha = core.chol.solve(core.resid);

  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(core.chol.matrixLLT()(i, i));
  core.lml = -0.5 * core.resid.dot(core.alpha) - log_det - 0.5 * n * kLog2Pi;
  return core;
}

// Gradient of the profiled LML over [log sigma_f2, log ell.., (log alpha),
// log noise2]; the GLS beta profile contributes nothing by the envelope
// theorem.
Eigen::VectorXd core_gradient(const Eigen::MatrixXd& x, const KernelSpec& kernel,
                              double noise2, const CoreState& core) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const int n_ls = kernel.ard ? d : 1;
  const bool rq = kernel.family == KernelFamily::RationalQuadratic;
  const int p = 1 + n_ls + (rq ? 1 : 0) + 1;

  Eigen::MatrixXd kinv = core.chol.solve(Eigen::MatrixXd::Identity(n, n));
  // m = alpha*alpha^T - Kinv;   d(lml)/d(theta) = 0.5 * sum(m .* dK).
  Eigen::MatrixXd m = core.alpha * core.alpha.transpose() - kinv;

  Eigen::MatrixXd kdr(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kdr(i, j) = kernel_dvalue_dr(kernel, core.r(i, j));

  Eigen::VectorXd grad(p);
  int gi = 0;

  // log sigma_f2: dK = K.
  grad[gi++] = 0.5 * (m.array() * core.k.array()).sum();

  // log length scales: dK_ij = kdr(r_ij) * (-w_ij / r_ij) with w the weighted
  // squared difference along the dimension(s) owned by the scale.
  for (int ls = 0; ls < n_ls; ++ls) {
    Eigen::MatrixXd w;
    if (kernel.ard) {
      double l = kernel.length_scales[ls];
      Eigen::VectorXd c = x.col(ls);
      w = (c.replicate(1, n) - c.transpose().replicate(n, 1)).array().square().matrix() /
          (l * l);
    } else {
      w = core.r.array().square().matrix();  // sum over all dims
    }
    double g = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double r = core.r(i, j);
        if (r > 1e-300) g += m(i, j) * kdr(i, j) * (-w(i, j) / r);
      }
    }
    grad[gi++] = 0.5 * g;
  }

  if (rq) {
    double a = kernel.alpha;
    double g = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double r2 = core.r(i, j) * core.r(i, j);
        double u = 1.0 + r2 / (2.0 * a);
        double dk_dloga = core.k(i, j) * a * (-std::log(u) + r2 / (2.0 * a * u));
        g += m(i, j) * dk_dloga;
      }
    }
    grad[gi++] = 0.5 * g;
  }

  // log noise2: dKy = noise2 * I.
  grad[gi++] = 0.5 * noise2 * (core.alpha.squaredNorm() - kinv.trace());
  return grad;
}

std::uint64_t hash_training_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::uint64_t h = kFnvOffsetBasis;
  h = fnv1a64_u64(static_cast<std::uint64_t>(x.rows()), h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(x.cols()), h);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      std::uint64_t bits;
      double v = x(i, j);
      std::memcpy(&bits, &v, 8);
      h = fnv1a64_u64(bits, h);
    }
  }
  for (int i = 0; i < y.size(); ++i) {
    std::uint64_t bits;
    double v = y[i];
    std::memcpy(&bits, &v, 8);
    h = fnv1a64_u64(bits, h);
  }
  return h;
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite() || !y.allFinite())
    throw GprError(GprErrorKind::NonFinite, "training data contains non-finite values");
}

}  // namespace

std::string kernel_name(const KernelSpec& spec) {
  return (spec.ard ? std::string("ard") : std::string()) + family_base_name(spec.family);
}

KernelSpec kernel_spec_from_name(const std::string& name) {
  KernelSpec s;
  std::string base = name;
  if (base.rfind("ard", 0) == 0) {
    s.ard = true;
    base = base.substr(3);
  }
  if (base == "exponential") s.family = KernelFamily::Exponential;
  else if (base == "squaredexponential") s.family = KernelFamily::SquaredExponential;
  else if (base == "matern32") s.family = KernelFamily::Matern32;
  else if (base == "matern52") s.family = KernelFamily::Matern52;
  else if (base == "rationalquadratic") s.family = KernelFamily::RationalQuadratic;
  else throw std::invalid_argument("unknown kernel name: " + name);
  s.length_scales = Eigen::VectorXd::Ones(1);
  return s;
}

std::vector<std::string> all_kernel_names() {
  std::vector<std::string> out;
  for (const char* base : {"exponential", "squaredexponential", "matern32", "matern52",
                           "rationalquadratic"})
    out.emplace_back(base);
  for (const char* base : {"exponential", "squaredexponential", "matern32", "matern52",
                           "rationalquadratic"})
    out.emplace_back(std::string("ard") + base);
  return out;
}

std::string basis_name(BasisKind k) {
  switch (k) {
    case BasisKind::None: return "none";
    case BasisKind::Constant: return "constant";
    case BasisKind::Linear: return "linear";
    case BasisKind::PureQuadratic: return "pureQuadratic";
  }
  return "?";
}

BasisKind basis_from_name(const std::string& name) {
  if (name == "none") return BasisKind::None;
  if (name == "constant") return BasisKind::Constant;
  if (name == "linear") return BasisKind::Linear;
  if (name == "pureQuadratic") return BasisKind::PureQuadratic;
  throw std::invalid_argument("unknown basis name: " + name);
}

std::vector<BasisKind> all_basis_kinds() {
  return {BasisKind::None, BasisKind::Constant, BasisKind::Linear, BasisKind::PureQuadratic};
}

Eigen::MatrixXd basis_design(BasisKind kind, const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  switch (kind) {
    case BasisKind::None:
      return Eigen::MatrixXd(n, 0);
    case BasisKind::Constant:
      return Eigen::MatrixXd::Ones(n, 1);
    case BasisKind::Linear: {
      Eigen::MatrixXd h(n, 1 + d);
      h.col(0).setOnes();
      h.rightCols(d) = x;
      return h;
    }
    case BasisKind::PureQuadratic: {
      Eigen::MatrixXd h(n, 1 + 2 * d);
      h.col(0).setOnes();
      h.middleCols(1, d) = x;
      h.rightCols(d) = x.array().square().matrix();
      return h;
    }
  }
  return Eigen::MatrixXd(n, 0);
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw GprError(GprErrorKind::DimensionMismatch, "kernel_eval inputs differ in dimension");
  check_lengthscales(spec, static_cast<int>(a.size()));
  double r2 = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    double l = spec.ard ? spec.length_scales[k] : spec.length_scales[0];
    double z = (a[k] - b[k]) / l;
    r2 += z * z;
  }
  return kernel_value_r(spec, std::sqrt(r2));
}

Standardization Standardization::identity(int dim) {
  Standardization s;
  s.x_mean = Eigen::VectorXd::Zero(dim);
  s.x_std = Eigen::VectorXd::Ones(dim);
  return s;
}

Standardization Standardization::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Standardization s;
  const double n = static_cast<double>(x.rows());
  s.x_mean = x.colwise().mean();
  s.x_std.resize(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    double var = (x.col(j).array() - s.x_mean[j]).square().sum() / n;
    s.x_std[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  s.y_mean = y.mean();
  double yvar = (y.array() - s.y_mean).square().sum() / n;
  s.y_std = yvar > 0.0 ? std::sqrt(yvar) : 1.0;
  return s;
}

Eigen::MatrixXd Standardization::transform_x(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x;
  for (int j = 0; j < x.cols(); ++j)
    out.col(j) = (x.col(j).array() - x_mean[j]) / x_std[j];
  return out;
}

void GprModel::factorize() {
  CoreState core = build_core(x_train_, y_train_, kernel_, basis_, noise2_);
  h_train_ = std::move(core.h);
  chol_ = std::move(core.chol);
  beta_ = std::move(core.beta);
  alpha_ = std::move(core.alpha);
  jitter_ = core.jitter;
  lml_ = core.lml;
}

GprModel GprModel::fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const KernelSpec& kernel, BasisKind basis, double noise2,
                             bool standardize) {
  if (x.rows() != y.size())
    throw GprError(GprErrorKind::LengthMismatch, "row count of X differs from y");
  check_finite(x, y);
  check_lengthscales(kernel, static_cast<int>(x.cols()));

  GprModel m;
  m.kernel_ = kernel;
  m.basis_ = basis;
  m.noise2_ = noise2;
  m.stdz_ = standardize ? Standardization::fit(x, y) : Standardization::identity(static_cast<int>(x.cols()));
  m.x_train_ = m.stdz_.transform_x(x);
  m.y_train_ = (y.array() - m.stdz_.y_mean) / m.stdz_.y_std;
  m.data_hash_ = hash_training_data(x, y);
  m.factorize();
  return m;
}

namespace {

struct ThetaLayout {
  int n_ls = 1;
  bool rq = false;
  int size() const { return 1 + n_ls + (rq ? 1 : 0) + 1; }

  Eigen::VectorXd pack(const KernelSpec& k, double noise2) const {
    Eigen::VectorXd t(size());
    int i = 0;
    t[i++] = std::log(k.sigma_f2);
    for (int j = 0; j < n_ls; ++j) t[i++] = std::log(k.length_scales[j]);
    if (rq) t[i++] = std::log(k.alpha);
    t[i++] = std::log(noise2);
    return t;
  }

  void unpack(const Eigen::VectorXd& t, KernelSpec* k, double* noise2) const {
    int i = 0;
    k->sigma_f2 = std::exp(t[i++]);
    k->length_scales.resize(n_ls);
    for (int j = 0; j < n_ls; ++j) k->length_scales[j] = std::exp(t[i++]);
    if (rq) k->alpha = std::exp(t[i++]);
    *noise2 = std::exp(t[i++]);
  }

  Eigen::VectorXd lower(double noise_floor) const {
    Eigen::VectorXd lo(size());
    int i = 0;
    lo[i++] = std::log(1e-10);  // sigma_f2
    for (int j = 0; j < n_ls; ++j) lo[i++] = -10.0;
    if (rq) lo[i++] = -5.0;
    lo[i++] = std::log(noise_floor);
    return lo;
  }

  Eigen::VectorXd upper() const {
    Eigen::VectorXd hi(size());
    int i = 0;
    hi[i++] = 12.0;
    for (int j = 0; j < n_ls; ++j) hi[i++] = 10.0;
    if (rq) hi[i++] = 7.0;
    hi[i++] = 8.0;
    return hi;
  }
};

Eigen::VectorXd median_lengthscale_init(const Eigen::MatrixXd& x, bool ard) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  // All pairs up to ~500 rows, strided subsample beyond.
  std::vector<std::pair<int, int>> pairs;
  int stride = n > 500 ? n / 500 + 1 : 1;
  for (int i = 0; i < n; i += stride)
    for (int j = i + 1; j < n; j += stride) pairs.emplace_back(i, j);
  if (pairs.empty()) pairs.emplace_back(0, n > 1 ? 1 : 0);

  auto median_of = [](std::vector<double>& v) {
    if (v.empty()) return 1.0;
    std::sort(v.begin(), v.end());
    double m = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    return m > 1e-12 ? m : 1.0;
  };

  if (ard) {
    Eigen::VectorXd ls(d);
    for (int k = 0; k < d; ++k) {
      std::vector<double> diffs;
      diffs.reserve(pairs.size());
      for (auto [i, j] : pairs) diffs.push_back(std::abs(x(i, k) - x(j, k)));
      ls[k] = median_of(diffs);
    }
    return ls;
  }
  std::vector<double> dists;
  dists.reserve(pairs.size());
  for (auto [i, j] : pairs) dists.push_back((x.row(i) - x.row(j)).norm());
  Eigen::VectorXd ls(1);
  ls[0] = median_of(dists);
  return ls;
}

}  // namespace

GprModel GprModel::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::string& kernel, BasisKind basis, const TrainOptions& opts) {
  KernelSpec s = kernel_spec_from_name(kernel);
  return train(x, y, s.family, s.ard, basis, opts);
}

GprModel GprModel::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         KernelFamily family, bool ard, BasisKind basis,
                         const TrainOptions& opts) {
  if (x.rows() != y.size())
    throw GprError(GprErrorKind::LengthMismatch, "row count of X differs from y");
  if (x.rows() < 2)
    throw GprError(GprErrorKind::LengthMismatch, "need at least 2 training rows");
  check_finite(x, y);

  const int d = static_cast<int>(x.cols());
  Standardization stdz = opts.standardize ? Standardization::fit(x, y)
                                          : Standardization::identity(d);
  Eigen::MatrixXd xs = stdz.transform_x(x);
  Eigen::VectorXd ys = (y.array() - stdz.y_mean) / stdz.y_std;

  ThetaLayout layout;
  layout.n_ls = ard ? d : 1;
  layout.rq = family == KernelFamily::RationalQuadratic;

  KernelSpec init;
  init.family = family;
  init.ard = ard;
  init.length_scales = median_lengthscale_init(xs, ard);
  const double yvar = std::max((ys.array() - ys.mean()).square().sum() / ys.size(), 1e-8);
  init.sigma_f2 = yvar;
  init.alpha = 1.0;
  double init_noise2 = std::max(0.1 * yvar, opts.noise_floor);

  const Eigen::VectorXd theta0 = layout.pack(init, init_noise2);
  const Eigen::VectorXd lo = layout.lower(opts.noise_floor);
  const Eigen::VectorXd hi = layout.upper();
  auto clamp = [&](Eigen::VectorXd t) {
    for (int i = 0; i < t.size(); ++i) t[i] = std::min(std::max(t[i], lo[i]), hi[i]);
    return t;
  };

  auto evaluate = [&](const Eigen::VectorXd& theta, bool want_grad, double* value,
                      Eigen::VectorXd* grad) {
    KernelSpec k = init;
    double noise2;
    layout.unpack(theta, &k, &noise2);
    CoreState core = build_core(xs, ys, k, basis, noise2);
    *value = core.lml;
    if (want_grad) *grad = core_gradient(xs, k, noise2, core);
  };

  double best_f = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  bool any_success = false;
  std::string last_error = "no restarts attempted";

  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Eigen::VectorXd theta = theta0;
    if (restart > 0) {
      Rng rng = Rng::keyed(opts.seed, static_cast<std::uint64_t>(restart));
      for (int i = 0; i < theta.size(); ++i) theta[i] += rng.gaussian(0.0, 0.5);
    }
    theta = clamp(theta);

    try {
      double f;
      Eigen::VectorXd g;
      evaluate(theta, true, &f, &g);
      double step = 0.5;
      for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (g.cwiseAbs().maxCoeff() < opts.grad_tol) break;
        double t = step;
        bool accepted = false;
        Eigen::VectorXd theta_new;
        double f_new = f;
        for (int halving = 0; halving < 40; ++halving) {
          theta_new = clamp(theta + t * g);
          if ((theta_new - theta).cwiseAbs().maxCoeff() < 1e-14) break;
          try {
            double fv;
            evaluate(theta_new, false, &fv, nullptr);
            if (std::isfinite(fv) && fv > f) {
              f_new = fv;
              accepted = true;
              break;
            }
          } catch (const GprError&) {
            // singular trial point; shrink the step
          }
          t *= 0.5;
        }
        if (!accepted) break;
        theta = theta_new;
        f = f_new;
        evaluate(theta, true, &f, &g);
        step = std::min(2.0 * t, 1.0);
      }
      any_success = true;
      if (f > best_f) {
        best_f = f;
        best_theta = theta;
      }
    } catch (const GprError& e) {
      last_error = e.what();
    }
  }

  if (!any_success)
    throw GprError(GprErrorKind::SingularKernel,
                   "all restarts failed to evaluate: " + last_error);

  GprModel m;
  m.kernel_ = init;
  layout.unpack(best_theta, &m.kernel_, &m.noise2_);
  m.basis_ = basis;
  m.stdz_ = stdz;
  m.x_train_ = std::move(xs);
  m.y_train_ = std::move(ys);
  m.data_hash_ = hash_training_data(x, y);
  m.factorize();
  return m;
}

GprPrediction GprModel::predict(const Eigen::MatrixXd& x_query) const {
  if (x_query.cols() != x_train_.cols())
    throw GprError(GprErrorKind::DimensionMismatch,
                   "query has " + std::to_string(x_query.cols()) + " features, model expects " +
                       std::to_string(x_train_.cols()));
  Eigen::MatrixXd xq = stdz_.transform_x(x_query);
  Eigen::MatrixXd kq = kernel_matrix_from_r(kernel_, scaled_distances(xq, x_train_, kernel_));
  Eigen::MatrixXd hq = basis_design(basis_, xq);

  Eigen::VectorXd mean_s = kq * alpha_;
  if (hq.cols() > 0) mean_s += hq * beta_;

  // Latent-function variance: k** - k*^T (K + noise I)^-1 k*.
  Eigen::MatrixXd v = chol_.matrixL().solve(kq.transpose());
  Eigen::VectorXd var_s =
      (Eigen::VectorXd::Constant(xq.rows(), kernel_.sigma_f2) -
       v.colwise().squaredNorm().transpose())
          .cwiseMax(0.0);

  GprPrediction out;
  out.mean = (mean_s.array() * stdz_.y_std + stdz_.y_mean).matrix();
  out.std = (var_s.array().sqrt() * stdz_.y_std).matrix();
  return out;
}

LmlEval lml_value_and_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const KernelSpec& kernel, BasisKind basis, double noise2) {
  check_lengthscales(kernel, static_cast<int>(x.cols()));
  CoreState core = build_core(x, y, kernel, basis, noise2);
  LmlEval out;
  out.value = core.lml;
  out.grad = core_gradient(x, kernel, noise2, core);
  return out;
}

Metrics regression_metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size())
    throw GprError(GprErrorKind::LengthMismatch, "prediction length differs from target length");
  if (y.size() < 2)
    throw GprError(GprErrorKind::LengthMismatch, "metrics need at least 2 values");
  const double n = static_cast<double>(y.size());
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  if (ss_tot == 0.0)
    throw GprError(GprErrorKind::ZeroVariance, "R^2 undefined for constant targets");
  const double ss_res = (y - yhat).squaredNorm();

  Metrics m;
  m.r2 = 1.0 - ss_res / ss_tot;
  m.rmse = std::sqrt(ss_res / n);
  m.mae = (y - yhat).cwiseAbs().mean();
  double mape_sum = 0.0;
  int mape_n = 0;
  for (int i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) >= 1e-9) {
      mape_sum += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
      ++mape_n;
    }
  }
  m.mape = mape_n > 0 ? 100.0 * mape_sum / mape_n : 0.0;
  return m;
}

ShapleyResult shapley_values(const GprModel& model, const Eigen::VectorXd& x,
                             const Eigen::MatrixXd& background) {
  const int d = model.dim();
  if (x.size() != d)
    throw GprError(GprErrorKind::DimensionMismatch, "instance dimension differs from model");
  if (d > 10)
    throw GprError(GprErrorKind::TooManyFeatures,
                   "exact Shapley enumeration is capped at 10 features");
  if (background.rows() == 0)
    throw GprError(GprErrorKind::EmptyBackground, "background sample is empty");
  if (background.cols() != d)
    throw GprError(GprErrorKind::DimensionMismatch, "background dimension differs from model");

  const int n_masks = 1 << d;
  const int nb = static_cast<int>(background.rows());

  // One batched prediction over all (mask, background row) combinations.
  Eigen::MatrixXd queries(static_cast<long>(n_masks) * nb, d);
  for (int mask = 0; mask < n_masks; ++mask) {
    for (int b = 0; b < nb; ++b) {
      for (int j = 0; j < d; ++j)
        queries(static_cast<long>(mask) * nb + b, j) =
            (mask >> j) & 1 ? x[j] : background(b, j);
    }
  }
  Eigen::VectorXd pred = model.predict(queries).mean;

  std::vector<double> value(static_cast<std::size_t>(n_masks));
  for (int mask = 0; mask < n_masks; ++mask)
    value[static_cast<std::size_t>(mask)] =
        pred.segment(static_cast<long>(mask) * nb, nb).mean();

  // Shapley weights by coalition size.
  std::vector<double> fact(static_cast<std::size_t>(d + 1), 1.0);
  for (int i = 1; i <= d; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;
  std::vector<double> weight(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s)
    weight[static_cast<std::size_t>(s)] =
        fact[static_cast<std::size_t>(s)] * fact[static_cast<std::size_t>(d - s - 1)] /
        fact[static_cast<std::size_t>(d)];

  ShapleyResult res;
  res.attributions = Eigen::VectorXd::Zero(d);
  res.base_value = value[0];
  for (int mask = 0; mask < n_masks; ++mask) {
    int s = 0;
    for (int j = 0; j < d; ++j) s += (mask >> j) & 1;
    for (int j = 0; j < d; ++j) {
      if ((mask >> j) & 1) continue;
      res.attributions[j] += weight[static_cast<std::size_t>(s)] *
                             (value[static_cast<std::size_t>(mask | (1 << j))] -
                              value[static_cast<std::size_t>(mask)]);
    }
  }
  return res;
}

void GprModel::save(const std::string& path) const {
  nlohmann::json j;
  j["kernel"] = kernel_name(kernel_);
  j["sigma_f2"] = kernel_.sigma_f2;
  j["length_scales"] = std::vector<double>(kernel_.length_scales.data(),
                                           kernel_.length_scales.data() + kernel_.length_scales.size());
  j["alpha"] = kernel_.alpha;
  j["basis"] = basis_name(basis_);
  j["noise2"] = noise2_;
  j["beta"] = std::vector<double>(beta_.data(), beta_.data() + beta_.size());
  j["x_mean"] = std::vector<double>(stdz_.x_mean.data(), stdz_.x_mean.data() + stdz_.x_mean.size());
  j["x_std"] = std::vector<double>(stdz_.x_std.data(), stdz_.x_std.data() + stdz_.x_std.size());
  j["y_mean"] = stdz_.y_mean;
  j["y_std"] = stdz_.y_std;
  j["data_hash"] = data_hash_;
  write_text_file(path, j.dump(2) + "\n");
}

GprModel GprModel::load(const std::string& path, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  std::uint64_t expected = j.at("data_hash").get<std::uint64_t>();
  std::uint64_t actual = hash_training_data(x, y);
  if (expected != actual)
    throw GprError(GprErrorKind::DataHashMismatch,
                   "training data hash mismatch: model was fitted on different data");

  GprModel m;
  m.kernel_ = kernel_spec_from_name(j.at("kernel").get<std::string>());
  m.kernel_.sigma_f2 = j.at("sigma_f2").get<double>();
  auto ls = j.at("length_scales").get<std::vector<double>>();
  m.kernel_.length_scales = Eigen::Map<Eigen::VectorXd>(ls.data(), static_cast<long>(ls.size()));
  m.kernel_.alpha = j.at("alpha").get<double>();
  m.basis_ = basis_from_name(j.at("basis").get<std::string>());
  m.noise2_ = j.at("noise2").get<double>();
  auto xm = j.at("x_mean").get<std::vector<double>>();
  auto xs = j.at("x_std").get<std::vector<double>>();
  m.stdz_.x_mean = Eigen::Map<Eigen::VectorXd>(xm.data(), static_cast<long>(xm.size()));
  m.stdz_.x_std = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<long>(xs.size()));
  m.stdz_.y_mean = j.at("y_mean").get<double>();
  m.stdz_.y_std = j.at("y_std").get<double>();
  m.x_train_ = m.stdz_.transform_x(x);
  m.y_train_ = (y.array() - m.stdz_.y_mean) / m.stdz_.y_std;
  m.data_hash_ = actual;
  m.factorize();
  return m;
}

}  // namespace volscreen
