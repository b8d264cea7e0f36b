#include "volscreen/antoine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace volscreen {

VpValue antoine_vp(const AntoineParams& p, double t_k) {
  const double denom = t_k + p.c;
  if (std::abs(denom) < 1e-9)
    throw AntoineError(AntoineErrorKind::SingularTemperature,
                       "temperature " + std::to_string(t_k) + " K is singular for C = " +
                           std::to_string(p.c));
  VpValue v;
  v.log10_pa = p.a - p.b / denom + 5.0;
  v.extrapolated = !p.in_range(t_k);
  return v;
}

namespace {

struct WorkingSet {
  std::vector<double> t;
  std::vector<double> y;  // log10(P/bar)
};

double sse_for(const WorkingSet& w, double a, double b, double c) {
  double sse = 0.0;
  for (std::size_t i = 0; i < w.t.size(); ++i) {
    double r = w.y[i] - (a - b / (w.t[i] + c));
    sse += r * r;
  }
  return sse;
}

// For fixed C the model is linear in (A, B) via u = 1/(T+C): y = A - B*u.
bool linear_ab(const WorkingSet& w, double c, double* a_out, double* b_out) {
  double su = 0, suu = 0, sy = 0, suy = 0;
  const double n = static_cast<double>(w.t.size());
  for (std::size_t i = 0; i < w.t.size(); ++i) {
    double denom = w.t[i] + c;
    if (std::abs(denom) < 1e-9) return false;
    double u = 1.0 / denom;
    su += u;
    suu += u * u;
    sy += w.y[i];
    suy += u * w.y[i];
  }
  double det = n * suu - su * su;
  if (std::abs(det) < 1e-300) return false;
  // Solve [n  -su; su  -suu] [A; B] = [sy; suy].
  *b_out = (su * sy - n * suy) / det;
  *a_out = (sy + *b_out * su) / n;
  return true;
}

}  // namespace

AntoineFit fit_antoine(const std::vector<VpPoint>& points, const std::set<int>& exclude) {
  WorkingSet w;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (exclude.count(static_cast<int>(i))) continue;
    w.t.push_back(points[i].t_k);
    w.y.push_back(points[i].log10_pa - 5.0);
  }
  if (w.t.size() < 3)
    throw AntoineError(AntoineErrorKind::InsufficientPoints,
                       "need at least 3 non-excluded points, got " + std::to_string(w.t.size()));
  {
    std::vector<double> sorted = w.t;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1])
        throw AntoineError(AntoineErrorKind::InsufficientPoints,
                           "fit points must have distinct temperatures");
  }

  const double t_lo = *std::min_element(w.t.begin(), w.t.end());
  const double t_hi = *std::max_element(w.t.begin(), w.t.end());

  double best_sse = std::numeric_limits<double>::infinity();
  double best_a = 0, best_b = 0, best_c = 0;
  int best_iters = 0;
  bool converged = false;

  for (double c_seed : {-150.0, -100.0, -50.0, 0.0, 50.0}) {
    if (t_lo + c_seed <= 0.0) continue;  // model singular inside the data range
    double a, b, c = c_seed;
    if (!linear_ab(w, c, &a, &b)) continue;
    double sse = sse_for(w, a, b, c);

    int iter = 0;
    bool seed_converged = false;
    for (; iter < 500; ++iter) {
      // Gauss-Newton step on (a, b, c); residual r_i = y_i - (a - b/(t_i+c)).
      Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
      Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < w.t.size(); ++i) {
        double denom = w.t[i] + c;
        double r = w.y[i] - (a - b / denom);
        Eigen::Vector3d g;  // -dr/dtheta
        g << 1.0, -1.0 / denom, b / (denom * denom);
        jtj += g * g.transpose();
        jtr += g * r;
      }
      Eigen::Vector3d step = jtj.ldlt().solve(jtr);
      if (!step.allFinite()) break;

      // Damped acceptance: halve until SSE does not increase and T+C stays
      // positive over the data.
      double lambda = 1.0;
      double new_sse = sse;
      double na = a, nb = b, nc = c;
      bool accepted = false;
      for (int halving = 0; halving < 40; ++halving) {
        na = a + lambda * step[0];
        nb = b + lambda * step[1];
        nc = c + lambda * step[2];
        if (t_lo + nc > 1e-9) {
          new_sse = sse_for(w, na, nb, nc);
          if (new_sse <= sse) {
            accepted = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!accepted) {
        seed_converged = true;  // stuck at a (local) minimum
        break;
      }
      double delta = sse - new_sse;
      a = na;
      b = nb;
      c = nc;
      sse = new_sse;
      if (delta < 1e-10) {
        seed_converged = true;
        break;
      }
    }

    if (seed_converged && sse < best_sse) {
      best_sse = sse;
      best_a = a;
      best_b = b;
      best_c = c;
      best_iters = iter;
      converged = true;
    }
  }

  if (!converged)
    throw AntoineError(AntoineErrorKind::NonConvergence,
                       "no seed converged to the SSE tolerance");

  AntoineFit fit;
  fit.params.a = best_a;
  fit.params.b = best_b;
  fit.params.c = best_c;
  fit.params.t_min_k = t_lo;
  fit.params.t_max_k = t_hi;
  fit.sse = best_sse;
  fit.iterations = best_iters;
  return fit;
}

}  // namespace volscreen
