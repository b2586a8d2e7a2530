#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "incomefp/error.hpp"

namespace incomefp {

/// Ordinary least squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;      // asymptotic OLS standard error
  double intercept_se = 0.0;
  double ssr = 0.0;           // residual sum of squares
  std::size_t n = 0;
};

/// Running sums for OLS; long double keeps the centred moments accurate when
/// x spans several orders of magnitude.
struct OlsAccumulator {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
    syy += static_cast<long double>(y) * y;
  }

  OlsAccumulator operator-(const OlsAccumulator& o) const {
    return {n - o.n, sx - o.sx, sy - o.sy, sxx - o.sxx, sxy - o.sxy, syy - o.syy};
  }

  /// Centred second moments (Sxx, Sxy, Syy).
  void centred(long double& cxx, long double& cxy, long double& cyy) const {
    cxx = sxx - sx * sx / n;
    cxy = sxy - sx * sy / n;
    cyy = syy - sy * sy / n;
  }

  /// Residual sum of squares of the best line; +inf when x is degenerate.
  double ssr() const {
    if (n < 2) return 0.0;
    long double cxx, cxy, cyy;
    centred(cxx, cxy, cyy);
    if (!(cxx > 0)) return std::numeric_limits<double>::infinity();
    const long double r = cyy - cxy * cxy / cxx;
    return r > 0 ? static_cast<double>(r) : 0.0;
  }

  LinearFit fit() const {
    if (n < 3) throw EstimationError("regression needs at least three points");
    long double cxx, cxy, cyy;
    centred(cxx, cxy, cyy);
    if (!(cxx > 0)) throw EstimationError("regression abscissae are all equal");
    LinearFit f;
    f.n = static_cast<std::size_t>(n);
    const long double slope = cxy / cxx;
    f.slope = static_cast<double>(slope);
    f.intercept = static_cast<double>((sy - slope * sx) / n);
    long double r = cyy - cxy * cxy / cxx;
    if (r < 0) r = 0;
    f.ssr = static_cast<double>(r);
    const long double s2 = r / (n - 2);
    f.slope_se = static_cast<double>(std::sqrt(s2 / cxx));
    f.intercept_se = static_cast<double>(std::sqrt(s2 * (1.0L / n + (sx / n) * (sx / n) / cxx)));
    return f;
  }
};

inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("ols: x and y differ in length");
  OlsAccumulator acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add(x[i], y[i]);
  return acc.fit();
}

}  // namespace incomefp
