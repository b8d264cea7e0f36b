#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace volscreen {

enum class AntoineErrorKind { SingularTemperature, InsufficientPoints, NonConvergence };

class AntoineError : public std::runtime_error {
 public:
  AntoineError(AntoineErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  AntoineErrorKind kind() const { return kind_; }

 private:
  AntoineErrorKind kind_;
};

// NIST convention: log10(P/bar) = A - B/(T/K + C), validated on [t_min, t_max].
struct AntoineParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double t_min_k = 0.0;
  double t_max_k = 0.0;

  bool in_range(double t_k) const { return t_k >= t_min_k && t_k <= t_max_k; }
};

struct VpValue {
  double log10_pa = 0.0;
  bool extrapolated = false;
};

// log10 of the vapor pressure in Pa: A - B/(T + C) + 5 (the +5 converts bar to
// Pa in log10 space). Evaluation outside the validated range is allowed but
// flagged. Throws SingularTemperature when |T + C| < 1e-9.
VpValue antoine_vp(const AntoineParams& p, double t_k);

struct VpPoint {
  double t_k = 0.0;
  double log10_pa = 0.0;
};

struct AntoineFit {
  AntoineParams params;
  double sse = 0.0;  // on log10(P/bar)
  int iterations = 0;
};

// Least-squares fit of A - B/(T+C) to (log10 Pa - 5). Nonlinear in C only, so
// C is seeded on a coarse grid {-150, -100, -50, 0, +50} (seeds that make
// T + C non-positive anywhere in the data are skipped) and each seed is
// refined by damped Gauss-Newton until the SSE change drops below 1e-10, at
// most 500 iterations. The lowest-SSE refinement wins. `exclude` lists point
// indices left out of the fit (the caller's outlier call).
AntoineFit fit_antoine(const std::vector<VpPoint>& points,
                       const std::set<int>& exclude = {});

}  // namespace volscreen
