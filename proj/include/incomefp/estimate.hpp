#pragma once

// Parameter estimation from an empirical CCDF: crossover detection by a
// two-change-point grid search, segment fits of the exponential and power
// laws, temperature refinement against the full model CCDF, and the
// rank-size estimator of the Pareto exponent.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incomefp/empirics.hpp"
#include "incomefp/error.hpp"
#include "incomefp/model.hpp"
#include "incomefp/optimize.hpp"
#include "incomefp/regression.hpp"

namespace incomefp {

struct CrossoverOptions {
  /// Candidate tail probabilities per decade, on top of the 0.5% quantile grid.
  double candidates_per_decade = 50.0;
  double quantile_step = 0.005;
  std::size_t min_segment_points = 5;
};

struct Crossovers {
  double m0_hat = 0.0;
  double m1_hat = 0.0;
  /// Half the spacing to the neighbouring candidates, relative to the estimate.
  double m0_rel_unc = 0.0;
  double m1_rel_unc = 0.0;
  std::array<double, 3> ssr{};  // exponential, medium power law, upper power law
  double ssr_total = 0.0;
  /// The upper segment is fitted better by an exponential than by a power law.
  bool degenerate_tail = false;
};

struct TemperatureFit {
  double T = 0.0;
  double stderr_T = 0.0;
  std::size_t n = 0;
};

struct ParetoEstimate {
  ParetoFit fit;
  double alpha_se = 0.0;
  std::size_t n = 0;
};

/// Rank-size estimate: ln(value) against ln(rank) has slope -alpha_rank and
/// alpha_pareto = 1 / alpha_rank. stderr refers to alpha_pareto.
struct RankFit {
  double alpha_rank = 0.0;
  double alpha_pareto = 0.0;
  double stderr = 0.0;
  std::size_t n = 0;
};

struct FitOptions {
  CrossoverOptions crossovers;
  double nodes_per_decade = 50.0;
  /// Joint refinement of (T, alpha, alpha1, m0, m1) after the temperature
  /// refinement; disable to keep the segment estimates.
  bool global_refinement = true;
  std::size_t max_evaluations = 4000;
};

struct FitReport {
  ModelParams params;
  double m_init = 0.0;
  std::size_t n_points = 0;
  double T_bg = 0.0;
  double T_bg_se = 0.0;
  double alpha_fit = 0.0;
  double alpha_fit_se = 0.0;
  double alpha1_fit = 0.0;
  double alpha1_fit_se = 0.0;
  double m0_hat = 0.0;
  double m1_hat = 0.0;
  double m0_rel_unc = 0.0;
  double m1_rel_unc = 0.0;
  std::array<double, 3> ssr_per_segment{};
  double refined_T = 0.0;
  /// Sum of squared log-CCDF residuals after each stage.
  double objective_segments = 0.0;
  double objective_refined = 0.0;
  double objective_final = 0.0;
  bool global_refinement = false;
};

namespace detail {

/// Points of the CCDF in ascending income order.
inline std::vector<CcdfPoint> ascending_points(const EmpiricalCCDF& ccdf) {
  std::vector<CcdfPoint> pts(ccdf.points.rbegin(), ccdf.points.rend());
  if (!std::is_sorted(pts.begin(), pts.end(), [](const CcdfPoint& a, const CcdfPoint& b) { return a.income < b.income; })) {
    throw DomainError("CCDF points must be in descending income order");
  }
  return pts;
}

}  // namespace detail

/// Candidate crossover incomes: data values at the 0.5% quantile grid merged
/// with a logarithmic grid of tail probabilities, ascending and unique.
inline std::vector<double> crossover_candidates(const EmpiricalCCDF& ccdf, const CrossoverOptions& o = {}) {
  const auto pts = detail::ascending_points(ccdf);
  const std::size_t n = pts.size();
  std::vector<std::size_t> idx;  // ascending index: p is decreasing in it
  auto add_level = [&](double p) {
    // Rank l (1 = richest) with plotting position nearest p.
    const double l = std::round(p * (static_cast<double>(n) + 1.0));
    if (l < 1.0 || l > static_cast<double>(n)) return;
    idx.push_back(n - static_cast<std::size_t>(l));
  };
  for (double q = o.quantile_step; q < 1.0; q += o.quantile_step) add_level(1.0 - q);
  const double p_min = 1.0 / (static_cast<double>(n) + 1.0);
  for (double k = 0.0;; k += 1.0) {
    const double p = std::pow(10.0, -k / o.candidates_per_decade);
    if (p < p_min) break;
    add_level(p);
  }
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pts[i].income);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct SegmentSsr {
  std::array<double, 3> ssr{};
  std::array<std::size_t, 3> count{};
  double total() const { return ssr[0] + ssr[1] + ssr[2]; }
};

/// Residuals of the three segment regressions for one crossover pair:
/// ln p on m for m <= m0, ln p on ln m for m0 < m <= m1 and for m > m1.
inline SegmentSsr segment_ssr(const EmpiricalCCDF& ccdf, double m0, double m1) {
  std::array<OlsAccumulator, 3> acc;
  for (const auto& pt : ccdf.points) {
    const double y = std::log(pt.p);
    if (pt.income <= m0) {
      acc[0].add(pt.income, y);
    } else if (pt.income <= m1) {
      acc[1].add(std::log(pt.income), y);
    } else {
      acc[2].add(std::log(pt.income), y);
    }
  }
  SegmentSsr out;
  for (int s = 0; s < 3; ++s) {
    out.ssr[s] = acc[s].ssr();
    out.count[s] = static_cast<std::size_t>(acc[s].n);
  }
  return out;
}

/// Two-change-point grid search for the crossover incomes m0 < m1.
///
/// Every candidate pair is scored by the summed SSR of the three segment
/// regressions (uniform weights in log space). Ties go to the smaller m0,
/// then the smaller m1.
inline Crossovers detect_crossovers(const EmpiricalCCDF& ccdf, const CrossoverOptions& o = {}) {
  const auto pts = detail::ascending_points(ccdf);
  const std::size_t n = pts.size();
  if (n < 30) throw EstimationError("crossover detection needs at least 30 points, got " + std::to_string(n));
  if (!(pts.back().income >= 1e3 * pts.front().income)) {
    throw EstimationError("crossover detection needs data spanning at least three decades of income");
  }

  // Prefix sums: linear abscissa for the exponential segment, log abscissa
  // for the power-law segments.
  std::vector<OlsAccumulator> lin(n + 1), lg(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(pts[i].p);
    lin[i + 1] = lin[i];
    lin[i + 1].add(pts[i].income, y);
    lg[i + 1] = lg[i];
    lg[i + 1].add(std::log(pts[i].income), y);
  }
  auto count_le = [&](double c) {
    return static_cast<std::size_t>(
        std::upper_bound(pts.begin(), pts.end(), c, [](double v, const CcdfPoint& p) { return v < p.income; }) -
        pts.begin());
  };

  const auto cand = crossover_candidates(ccdf, o);
  const std::size_t min_pts = o.min_segment_points;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0;
  std::array<double, 3> best_ssr{};
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const std::size_t k0 = count_le(cand[i]);
    if (k0 < min_pts) continue;
    const double s1 = lin[k0].ssr();
    if (!(s1 < best)) continue;
    for (std::size_t j = i + 1; j < cand.size(); ++j) {
      const std::size_t k1 = count_le(cand[j]);
      if (k1 - k0 < min_pts) continue;
      if (n - k1 < min_pts) break;
      const double s2 = (lg[k1] - lg[k0]).ssr();
      const double s3 = (lg[n] - lg[k1]).ssr();
      const double total = s1 + s2 + s3;
      if (total < best) {
        best = total;
        bi = i;
        bj = j;
        best_ssr = {s1, s2, s3};
      }
    }
  }
  if (!std::isfinite(best)) {
    throw EstimationError("no crossover pair leaves at least " + std::to_string(min_pts) + " points in every segment");
  }

  Crossovers out;
  out.m0_hat = cand[bi];
  out.m1_hat = cand[bj];
  auto rel_unc = [&](std::size_t k) {
    const double lo = cand[k > 0 ? k - 1 : k];
    const double hi = cand[k + 1 < cand.size() ? k + 1 : k];
    return 0.5 * (hi - lo) / cand[k];
  };
  out.m0_rel_unc = rel_unc(bi);
  out.m1_rel_unc = rel_unc(bj);
  out.ssr = best_ssr;
  out.ssr_total = best;
  const std::size_t k1 = count_le(out.m1_hat);
  out.degenerate_tail = (lin[n] - lin[k1]).ssr() < best_ssr[2];
  return out;
}

/// Exponential-law temperature from ln p regressed on (m - m_init) over
/// [m_init, m0].
inline TemperatureFit fit_temperature(const EmpiricalCCDF& ccdf, double m_init, double m0) {
  OlsAccumulator acc;
  for (const auto& pt : ccdf.points) {
    if (pt.income >= m_init && pt.income <= m0) acc.add(pt.income - m_init, std::log(pt.p));
  }
  if (acc.n < 5) throw EstimationError("temperature fit needs at least 5 points below m0");
  const LinearFit f = acc.fit();
  if (!(f.slope < 0.0)) throw EstimationError("CCDF does not decay below m0; no exponential law to fit");
  TemperatureFit out;
  out.T = -1.0 / f.slope;
  out.stderr_T = f.slope_se / (f.slope * f.slope);
  out.n = f.n;
  return out;
}

/// Weak Pareto law from ln p regressed on ln m over [lo, hi].
inline ParetoEstimate fit_pareto_exponent(const EmpiricalCCDF& ccdf, double lo, double hi) {
  OlsAccumulator acc;
  for (const auto& pt : ccdf.points) {
    if (pt.income >= lo && pt.income <= hi) acc.add(std::log(pt.income), std::log(pt.p));
  }
  if (acc.n < 5) throw EstimationError("Pareto fit needs at least 5 points in the window");
  const LinearFit f = acc.fit();
  if (!(f.slope < 0.0)) throw EstimationError("CCDF does not decay in the Pareto window");
  ParetoEstimate out;
  out.fit.alpha = -f.slope;
  out.fit.m_sp = std::exp(f.intercept / out.fit.alpha);
  out.alpha_se = f.slope_se;
  out.n = f.n;
  return out;
}

/// Rank-size regression of ln(value) on ln(rank), rank 1 being the largest.
inline RankFit fit_rank(std::vector<double> values) {
  if (values.size() < 3) throw EstimationError("rank fit needs at least 3 values");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("rank fit needs positive finite values");
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  OlsAccumulator acc;
  for (std::size_t r = 0; r < values.size(); ++r) acc.add(std::log(static_cast<double>(r + 1)), std::log(values[r]));
  const LinearFit f = acc.fit();
  if (!(f.slope < 0.0)) throw EstimationError("rank plot has no negative slope; Pareto exponent is undefined");
  RankFit out;
  out.alpha_rank = -f.slope;
  out.alpha_pareto = 1.0 / out.alpha_rank;
  out.stderr = f.slope_se / (out.alpha_rank * out.alpha_rank);
  out.n = f.n;
  return out;
}

/// Sum of squared residuals ln Pi_model(m_i) - ln p_i over an empirical CCDF.
///
/// The model CCDF is evaluated exactly on a logarithmic node grid (plus m1)
/// and carried to the data by cubic Hermite interpolation of ln Pi in ln m,
/// using the exact slope -m pdf(m) / Pi(m) at each node.
class LogCcdfObjective {
 public:
  LogCcdfObjective(const EmpiricalCCDF& ccdf, double m_init, double nodes_per_decade = 50.0)
      : m_init_(m_init), nodes_per_decade_(nodes_per_decade) {
    for (const auto& pt : detail::ascending_points(ccdf)) {
      if (pt.income < m_init) continue;
      log_m_.push_back(std::log(pt.income));
      log_p_.push_back(std::log(pt.p));
    }
    if (log_m_.size() < 2 || log_m_.front() == log_m_.back()) {
      throw EstimationError("objective needs at least two distinct incomes above m_init");
    }
  }

  std::size_t size() const noexcept { return log_m_.size(); }
  double m_init() const noexcept { return m_init_; }

  /// Objective for a shape; +inf when the shape is invalid or not normalizable.
  double operator()(const ShapeParams& s) const {
    try {
      return evaluate(normalize(ModelParams(s)));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  double evaluate(const ModelParams& p) const {
    const double s_lo = log_m_.front();
    const double s_hi = log_m_.back();
    const double decades = (s_hi - s_lo) / std::log(10.0);
    const std::size_t k = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(decades * nodes_per_decade_)) + 1);
    std::vector<double> nodes;
    nodes.reserve(k + 1);
    for (std::size_t i = 0; i < k; ++i) {
      nodes.push_back(i + 1 == k ? std::exp(s_hi) : std::exp(s_lo + (s_hi - s_lo) * static_cast<double>(i) / (k - 1)));
    }
    nodes.front() = std::max(nodes.front(), p.shape().m_init);
    const double m1 = p.shape().m1;
    if (m1 > nodes.front() && m1 < nodes.back()) {
      nodes.insert(std::upper_bound(nodes.begin(), nodes.end(), m1), m1);
      nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    }
    const std::vector<double> pi = ccdf_sorted(p, nodes);
    std::vector<double> ls(nodes.size()), lf(nodes.size()), df(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!(pi[i] > 0.0)) return std::numeric_limits<double>::infinity();
      ls[i] = std::log(nodes[i]);
      lf[i] = std::log(pi[i]);
      df[i] = -nodes[i] * pdf_eval(p, nodes[i]) / pi[i];
    }

    double ssr = 0.0;
    std::size_t seg = 0;
    for (std::size_t i = 0; i < log_m_.size(); ++i) {
      const double s = std::clamp(log_m_[i], ls.front(), ls.back());
      while (seg + 2 < ls.size() && s > ls[seg + 1]) ++seg;
      const double h = ls[seg + 1] - ls[seg];
      const double t = (s - ls[seg]) / h;
      const double t2 = t * t;
      const double t3 = t2 * t;
      const double model = (2 * t3 - 3 * t2 + 1) * lf[seg] + (t3 - 2 * t2 + t) * h * df[seg] +
                           (-2 * t3 + 3 * t2) * lf[seg + 1] + (t3 - t2) * h * df[seg + 1];
      const double r = model - log_p_[i];
      ssr += r * r;
    }
    return ssr;
  }

 private:
  std::vector<double> log_m_;
  std::vector<double> log_p_;
  double m_init_;
  double nodes_per_decade_;
};

/// One-dimensional golden-section refinement of T (and T1 when it is tied to
/// T) over [T, 1.5 T] against the full-model log-CCDF residuals. Returns the
/// input when the search does not improve the objective.
inline ModelParams refine_temperature(const EmpiricalCCDF& ccdf, const ModelParams& params,
                                      double nodes_per_decade = 50.0) {
  const LogCcdfObjective objective(ccdf, params.shape().m_init, nodes_per_decade);
  const ShapeParams base = params.shape();
  const bool tied = base.T1 == base.T;
  auto with_T = [&](double T) {
    ShapeParams s = base;
    s.T = T;
    if (tied) s.T1 = T;
    return s;
  };
  const double f0 = objective(base);
  const auto best = opt::golden_section([&](double T) { return objective(with_T(T)); }, base.T, 1.5 * base.T, 1e-9);
  if (!(best.f < f0)) return params.normalized() ? params : normalize(params);
  return normalize(ModelParams(with_T(best.x)));
}

namespace detail {

/// Joint Nelder-Mead refinement in log-parameter space with T1 tied to T.
inline ModelParams refine_jointly(const LogCcdfObjective& objective, const ModelParams& start, std::size_t max_evals) {
  const ShapeParams s0 = start.shape();
  auto unpack = [&](const std::array<double, 5>& th) {
    ShapeParams s = s0;
    s.T = std::exp(th[0]);
    s.T1 = s.T;
    s.alpha = std::exp(th[1]);
    s.alpha1 = std::exp(th[2]);
    s.m0 = std::exp(th[3]);
    s.m1 = std::exp(th[4]);
    return s;
  };
  auto f = [&](const std::array<double, 5>& th) {
    const ShapeParams s = unpack(th);
    if (!(s.m0 < s.m1) || !(s.m_init < s.m0)) return std::numeric_limits<double>::infinity();
    return objective(s);
  };
  const std::array<double, 5> th0 = {std::log(s0.T), std::log(s0.alpha), std::log(s0.alpha1), std::log(s0.m0),
                                     std::log(s0.m1)};
  opt::NelderMeadOptions o;
  o.initial_step = 0.05;
  o.x_tol = 1e-8;
  o.f_tol = 1e-13;
  o.max_evaluations = max_evals;
  const auto res = opt::nelder_mead<5>(f, th0, o);
  if (!(res.f < objective.evaluate(start))) return start;
  return normalize(ModelParams(unpack(res.x)));
}

}  // namespace detail

/// Segment-based fit followed by temperature refinement and, optionally, a
/// joint refinement of all shape parameters. T1 is tied to T throughout.
inline FitReport fit_full(const EmpiricalCCDF& ccdf, double m_init, const FitOptions& o = {}) {
  const Crossovers cx = detect_crossovers(ccdf, o.crossovers);
  if (cx.degenerate_tail) {
    throw EstimationError("upper segment is not power-law like (degenerate tail); no third income class found");
  }
  if (!(cx.m0_hat > m_init)) throw EstimationError("detected m0 does not exceed m_init");

  const TemperatureFit tf = fit_temperature(ccdf, m_init, cx.m0_hat);
  const ParetoEstimate mid = fit_pareto_exponent(ccdf, cx.m0_hat, cx.m1_hat);
  const double top = ccdf.points.front().income;
  const ParetoEstimate tail = fit_pareto_exponent(ccdf, cx.m1_hat, top);

  ShapeParams s;
  s.T = tf.T;
  s.T1 = tf.T;
  s.alpha = mid.fit.alpha;
  s.alpha1 = tail.fit.alpha;
  s.m0 = cx.m0_hat;
  s.m1 = cx.m1_hat;
  s.m_init = m_init;

  ModelParams segment_params = [&] {
    try {
      return normalize(ModelParams(s));
    } catch (const Error& e) {
      throw EstimationError(std::string("segment estimates do not form a valid model: ") + e.what());
    }
  }();

  const LogCcdfObjective objective(ccdf, m_init, o.nodes_per_decade);
  const ModelParams refined = refine_temperature(ccdf, segment_params, o.nodes_per_decade);
  ModelParams final_params = o.global_refinement ? detail::refine_jointly(objective, refined, o.max_evaluations) : refined;

  FitReport r{final_params};
  r.m_init = m_init;
  r.n_points = ccdf.points.size();
  r.T_bg = tf.T;
  r.T_bg_se = tf.stderr_T;
  r.alpha_fit = mid.fit.alpha;
  r.alpha_fit_se = mid.alpha_se;
  r.alpha1_fit = tail.fit.alpha;
  r.alpha1_fit_se = tail.alpha_se;
  r.m0_hat = cx.m0_hat;
  r.m1_hat = cx.m1_hat;
  r.m0_rel_unc = cx.m0_rel_unc;
  r.m1_rel_unc = cx.m1_rel_unc;
  r.ssr_per_segment = cx.ssr;
  r.refined_T = refined.shape().T;
  r.objective_segments = objective.evaluate(segment_params);
  r.objective_refined = objective.evaluate(refined);
  r.objective_final = objective.evaluate(final_params);
  r.global_refinement = o.global_refinement;
  return r;
}

}  // namespace incomefp
