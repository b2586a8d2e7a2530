#pragma once

// Equilibrium income distributions of the threshold Fokker-Planck model:
// the exponential (Boltzmann-Gibbs) law, the weak Pareto law, and the
// two-branch density that joins an additive/multiplicative lower branch
// with a second multiplicative branch above the threshold m1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "incomefp/error.hpp"
#include "incomefp/quadrature.hpp"

namespace incomefp {

/// Raw drift and diffusion coefficients of the threshold Langevin equation.
///
/// A(m) = A0 + a m below m1 and A0_hi + a_hi m above it. A single diffusion
/// pair (B0, b) serves both sides, so B(m) = B0 + b m^2 is continuous at m1.
struct LangevinCoeffs {
  double A0 = 0.0;
  double a = 0.0;
  double A0_hi = 0.0;
  double a_hi = 0.0;
  double B0 = 0.0;
  double b = 0.0;

  /// a_hi may be negative: a Zipf-like upper exponent below one needs a_hi < 0.
  void validate() const {
    if (!(A0 > 0.0) || !(A0_hi > 0.0)) throw DomainError("drift constants A0 and A0_hi must be positive");
    if (!(B0 > 0.0) || !(b > 0.0)) throw DomainError("diffusion coefficients B0 and b must be positive");
    if (!(a > 0.0)) throw DomainError("drift slope a must be positive");
    if (!(a_hi > -b)) throw DomainError("drift slope a_hi must exceed -b (upper exponent must be positive)");
    if (!std::isfinite(A0 + a + A0_hi + a_hi + B0 + b)) throw DomainError("Langevin coefficients must be finite");
  }
};

/// Effective shape parameters of the two-branch density.
struct ShapeParams {
  double T = 0.0;       // income temperature, EUR
  double T1 = 0.0;      // upper-branch temperature, EUR
  double alpha = 0.0;   // medium-class Pareto exponent
  double alpha1 = 0.0;  // high-class Pareto exponent
  double m0 = 0.0;      // additive/multiplicative crossover, EUR
  double m1 = 0.0;      // threshold between medium and high class, EUR
  double m_init = 0.0;  // lowest household income, EUR

  /// Checks everything except alpha1 > 0, which normalize() reports as a
  /// tail divergence.
  void validate() const {
    for (double v : {T, T1, alpha, alpha1, m0, m1, m_init}) {
      if (!std::isfinite(v)) throw DomainError("shape parameters must be finite");
    }
    if (!(T > 0.0) || !(T1 > 0.0)) throw DomainError("temperatures T and T1 must be positive");
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    if (!(m_init > 0.0)) throw DomainError("m_init must be strictly positive");
    if (!(m_init < m0)) throw DomainError("m_init must lie below m0");
    if (!(m0 <= m1)) throw DomainError("m0 must not exceed m1");
  }

  bool operator==(const ShapeParams&) const = default;
};

/// Pure power law Pi(m) = (m / m_sp)^-alpha.
struct ParetoFit {
  double m_sp = 0.0;
  double alpha = 0.0;
};

struct IntegrationTolerances {
  double normalization = 1e-10;
  double ccdf = 1e-10;
};

class ModelParams;
inline ModelParams normalize(const ModelParams& params, const IntegrationTolerances& tol = {});

/// Shape parameters together with the branch constants c_lo and c_hi.
///
/// c_hi / c_lo always equals continuity_ratio(shape), so the density is
/// continuous at m1. The constants integrate to one only after normalize();
/// replacing the shape drops the normalization.
class ModelParams {
 public:
  explicit ModelParams(const ShapeParams& shape);

  const ShapeParams& shape() const noexcept { return shape_; }
  double c_lo() const noexcept { return c_lo_; }
  double c_hi() const noexcept { return c_hi_; }
  bool normalized() const noexcept { return normalized_; }
  /// Pi(m1), the probability mass of the upper branch. Valid once normalized.
  double upper_mass() const noexcept { return upper_mass_; }

  ModelParams with_shape(const ShapeParams& shape) const { return ModelParams(shape); }

 private:
  friend ModelParams normalize(const ModelParams& params, const IntegrationTolerances& tol);

  ShapeParams shape_;
  double c_lo_ = 1.0;
  double c_hi_ = 1.0;
  double upper_mass_ = 0.0;
  bool normalized_ = false;
};

/// Exponential CCDF exp(-(m - m_init) / T).
inline double bg_ccdf(double T, double m_init, double m) {
  if (!(T > 0.0)) throw DomainError("temperature must be positive");
  if (m < m_init) throw DomainError("income below m_init");
  return std::exp(-(m - m_init) / T);
}

/// Weak Pareto CCDF (m / m_sp)^-alpha.
inline double pareto_ccdf(const ParetoFit& fit, double m) {
  if (!(m > 0.0)) throw DomainError("income must be positive");
  return std::pow(m / fit.m_sp, -fit.alpha);
}

/// c_hi / c_lo required for a continuous density at m1.
inline double continuity_ratio(const ShapeParams& s) {
  const double r = s.m1 / s.m0;
  return std::exp(s.m0 * (1.0 / s.T1 - 1.0 / s.T) * std::atan(r)) * std::pow(1.0 + r * r, 0.5 * (s.alpha1 - s.alpha));
}

inline ModelParams::ModelParams(const ShapeParams& shape) : shape_(shape) {
  shape_.validate();
  c_lo_ = 1.0;
  c_hi_ = continuity_ratio(shape_);
}

/// Lower-branch formula c_lo exp(-(m0/T) atan(m/m0)) / [1 + (m/m0)^2]^((alpha+1)/2),
/// evaluated at any m > 0.
inline double lower_branch_pdf(const ModelParams& p, double m) {
  const ShapeParams& s = p.shape();
  const double r = m / s.m0;
  return p.c_lo() * std::exp(-(s.m0 / s.T) * std::atan(r)) * std::pow(1.0 + r * r, -0.5 * (s.alpha + 1.0));
}

/// Upper-branch formula, written relative to its value at m1 so that it
/// reproduces lower_branch_pdf(m1) bit for bit at m = m1.
inline double upper_branch_pdf(const ModelParams& p, double m) {
  const ShapeParams& s = p.shape();
  const double r = m / s.m0;
  const double r1 = s.m1 / s.m0;
  const double at_m1 = lower_branch_pdf(p, s.m1);
  return at_m1 * std::exp(-(s.m0 / s.T1) * (std::atan(r) - std::atan(r1))) *
         std::pow((1.0 + r * r) / (1.0 + r1 * r1), -0.5 * (s.alpha1 + 1.0));
}

/// Two-branch equilibrium density.
inline double pdf_eval(const ModelParams& p, double m) {
  if (m < p.shape().m_init) throw DomainError("income below m_init");
  return m < p.shape().m1 ? lower_branch_pdf(p, m) : upper_branch_pdf(p, m);
}

namespace detail {

// Density mass over [m_a, m_b] (with m_b = +inf allowed) in the angle
// v = atan(m0 / m), where dm = -m0 / sin^2(v) dv turns each branch into
// m0 exp(-(m0/T)(pi/2 - v)) sin(v)^(alpha-1) on a finite interval.
inline double angle(double m, double m0) { return std::isinf(m) ? 0.0 : std::atan(m0 / m); }

inline double lower_mass_unscaled(const ShapeParams& s, double m_a, double m_b, double tol) {
  if (!(m_b > m_a)) return 0.0;
  const double kappa = s.m0 / s.T;
  const double e = s.alpha - 1.0;
  auto g = [&](double v) {
    return s.m0 * std::exp(-kappa * (std::numbers::pi / 2.0 - v)) * std::pow(std::sin(v), e);
  };
  return quad::integrate(g, angle(m_b, s.m0), angle(m_a, s.m0), {tol, 0.0, 4000}).value;
}

inline double upper_mass_unscaled(const ShapeParams& s, double m_a, double m_b, double tol) {
  if (!(m_b > m_a)) return 0.0;
  const double kappa = s.m0 / s.T1;
  const double e = s.alpha1 - 1.0;
  const double r1 = s.m1 / s.m0;
  const double v1 = std::atan(s.m0 / s.m1);
  // Lower kernel at m1 divided by sin(v1)^(alpha1 + 1).
  const double anchor = std::exp(-(s.m0 / s.T) * std::atan(r1)) * std::pow(1.0 + r1 * r1, 0.5 * (s.alpha1 - s.alpha));
  auto g = [&](double v) { return anchor * s.m0 * std::exp(kappa * (v - v1)) * std::pow(std::sin(v), e); };
  return quad::integrate(g, angle(m_b, s.m0), angle(m_a, s.m0), {tol, 0.0, 4000}).value;
}

}  // namespace detail

/// Probability mass of the density over [a, b]; b may be +inf.
inline double integrate_pdf(const ModelParams& p, double a, double b, double rel_tol = 1e-10) {
  const ShapeParams& s = p.shape();
  if (a < s.m_init) throw DomainError("income below m_init");
  if (!(b > a)) return 0.0;
  double mass = 0.0;
  if (a < s.m1) mass += detail::lower_mass_unscaled(s, a, std::min(b, s.m1), rel_tol);
  if (b > s.m1) mass += detail::upper_mass_unscaled(s, std::max(a, s.m1), b, rel_tol);
  return p.c_lo() * mass;
}

/// Rescales the branch constants so the density integrates to one over
/// [m_init, inf).
inline ModelParams normalize(const ModelParams& params, const IntegrationTolerances& tol) {
  const ShapeParams& s = params.shape();
  if (!(s.alpha1 > 0.0)) {
    throw TailDivergenceError("alpha1 = " + std::to_string(s.alpha1) + " leaves the upper tail non-integrable");
  }
  const double lower = detail::lower_mass_unscaled(s, s.m_init, s.m1, tol.normalization);
  const double upper = detail::upper_mass_unscaled(s, s.m1, std::numeric_limits<double>::infinity(), tol.normalization);
  const double total = lower + upper;
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("density mass is not finite and positive");

  ModelParams out(s);
  out.c_lo_ = 1.0 / total;
  out.c_hi_ = continuity_ratio(s) / total;
  out.upper_mass_ = upper / total;
  out.normalized_ = true;
  return out;
}

/// Pi(m), the probability of an income above m.
inline double ccdf_eval(const ModelParams& p, double m, const IntegrationTolerances& tol = {}) {
  if (!p.normalized()) throw DomainError("ccdf_eval requires normalized parameters");
  const ShapeParams& s = p.shape();
  if (m < s.m_init) throw DomainError("income below m_init");
  if (std::isinf(m)) return 0.0;
  if (m >= s.m1) {
    return p.c_lo() * detail::upper_mass_unscaled(s, m, std::numeric_limits<double>::infinity(), tol.ccdf);
  }
  return p.c_lo() * detail::lower_mass_unscaled(s, m, s.m1, tol.ccdf) + p.upper_mass();
}

/// Pi at every point of an ascending sequence, accumulated from the top so
/// that only positive increments are summed.
inline std::vector<double> ccdf_sorted(const ModelParams& p, std::span<const double> ascending,
                                       const IntegrationTolerances& tol = {}) {
  std::vector<double> out(ascending.size());
  if (ascending.empty()) return out;
  if (!std::is_sorted(ascending.begin(), ascending.end())) throw DomainError("ccdf_sorted needs ascending input");
  const std::size_t n = ascending.size();
  out[n - 1] = ccdf_eval(p, ascending[n - 1], tol);
  for (std::size_t k = n - 1; k-- > 0;) {
    out[k] = out[k + 1] + integrate_pdf(p, ascending[k], ascending[k + 1], tol.ccdf);
  }
  return out;
}

/// Income m with Pi(m) = 1 - q, by bisection in log-income.
inline double quantile(const ModelParams& p, double q, const IntegrationTolerances& tol = {}) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (!p.normalized()) throw DomainError("quantile requires normalized parameters");
  const ShapeParams& s = p.shape();
  const double target = 1.0 - q;

  double lo = s.m_init;
  double hi = std::max({s.m0, s.T, 2.0 * s.m_init});
  while (ccdf_eval(p, hi, tol) >= target) {
    lo = hi;
    hi *= 4.0;
    if (!std::isfinite(hi)) throw DomainError("quantile bracket overflow");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (ccdf_eval(p, mid, tol) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Quantiles for an ascending list of levels in one monotone sweep.
///
/// Each level is solved by safeguarded Newton steps in log-income starting
/// from the previous root. The CCDF is carried along by integrating the
/// density across each step and re-evaluated directly whenever it has halved,
/// which keeps its relative accuracy deep in the tail.
inline std::vector<double> quantiles(const ModelParams& p, std::span<const double> levels,
                                     const IntegrationTolerances& tol = {}) {
  if (!p.normalized()) throw DomainError("quantiles requires normalized parameters");
  if (!std::is_sorted(levels.begin(), levels.end())) throw DomainError("quantile levels must be ascending");
  const ShapeParams& s = p.shape();

  std::vector<double> out;
  out.reserve(levels.size());
  double base = s.m_init;  // Pi(base) >= every remaining target
  double cur = s.m_init;
  double pi_cur = 1.0;
  double anchor = 1.0;
  std::size_t since_anchor = 0;

  auto advance = [&](double from, double pi_from, double to) {
    return to > from ? pi_from - integrate_pdf(p, from, to, tol.ccdf) : pi_from + integrate_pdf(p, to, from, tol.ccdf);
  };

  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const double target = 1.0 - q;
    if (pi_cur < 0.5 * anchor || ++since_anchor >= 256) {
      pi_cur = ccdf_eval(p, cur, tol);
      anchor = pi_cur;
      since_anchor = 0;
    }

    double lo = base;
    double hi = std::numeric_limits<double>::infinity();
    if (pi_cur >= target) {
      lo = std::max(lo, cur);
    } else {
      hi = cur;
    }
    for (int it = 0; it < 200; ++it) {
      if (std::abs(pi_cur - target) <= 1e-13 * target) break;
      if (!std::isinf(hi) && (hi - lo) <= 1e-14 * hi) break;
      const double slope = cur * pdf_eval(p, cur) / pi_cur;  // -d ln Pi / d ln m
      double step = slope > 0.0 ? std::log(pi_cur / target) / slope : 1.0;
      step = std::clamp(step, -2.0, 2.0);
      double cand = cur * std::exp(step);
      if (!(cand > lo && cand < hi)) cand = std::isinf(hi) ? 2.0 * lo : std::sqrt(lo * hi);
      if (!(cand > lo && cand < hi)) break;
      const double pi_cand = advance(cur, pi_cur, cand);
      if (pi_cand >= target) {
        lo = cand;
      } else {
        hi = cand;
      }
      cur = cand;
      pi_cur = pi_cand;
    }
    base = lo;
    out.push_back(cur);
  }
  return out;
}

/// Effective parameters implied by Langevin coefficients (unnormalized).
inline ModelParams coeffs_to_effective(const LangevinCoeffs& c, double m1, double m_init) {
  c.validate();
  ShapeParams s;
  s.T = c.B0 / c.A0;
  s.T1 = c.B0 / c.A0_hi;
  s.alpha = 1.0 + c.a / c.b;
  s.alpha1 = 1.0 + c.a_hi / c.b;
  s.m0 = std::sqrt(c.B0 / c.b);
  s.m1 = m1;
  s.m_init = m_init;
  return ModelParams(s);
}

/// Canonical coefficients for a shape, gauge-fixed at b = 1.
inline LangevinCoeffs effective_to_coeffs(const ShapeParams& s) {
  s.validate();
  LangevinCoeffs c;
  c.b = 1.0;
  c.B0 = s.m0 * s.m0;
  c.A0 = c.B0 / s.T;
  c.A0_hi = c.B0 / s.T1;
  c.a = s.alpha - 1.0;
  c.a_hi = s.alpha1 - 1.0;
  c.validate();
  return c;
}

}  // namespace incomefp
