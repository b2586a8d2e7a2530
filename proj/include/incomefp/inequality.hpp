#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "incomefp/empirics.hpp"
#include "incomefp/error.hpp"
#include "incomefp/model.hpp"

namespace incomefp {

struct ClassFractions {
  double f_low = 0.0;
  double f_med = 0.0;
  double f_high = 0.0;
};

struct PopulationRatios {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Class percentages, population ratios and median from the model; gini is
/// the sample statistic and is present only when incomes were supplied.
struct ClassStats {
  double f_low = 0.0;
  double f_med = 0.0;
  double f_high = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  std::optional<double> gini;
  double median = 0.0;
};

/// Percentages of households below m0, between m0 and m1, and above m1.
inline ClassFractions class_fractions(const ModelParams& p) {
  if (!p.normalized()) throw DomainError("class_fractions requires normalized parameters");
  const double pi0 = ccdf_eval(p, p.shape().m0);
  const double pi1 = p.upper_mass();
  return {100.0 * (1.0 - pi0), 100.0 * (pi0 - pi1), 100.0 * pi1};
}

inline PopulationRatios population_ratios(const ModelParams& p) {
  const ClassFractions f = class_fractions(p);
  if (!(f.f_med > 0.0) || !(f.f_high > 0.0)) throw DomainError("population ratios undefined: an income class is empty");
  return {f.f_low / f.f_med, f.f_med / f.f_high};
}

/// Sample Gini coefficient on a 0-100 scale, without the n/(n-1) correction.
inline double gini(std::span<const double> incomes) {
  if (incomes.empty()) throw DomainError("gini needs at least one income");
  std::vector<double> x(incomes.begin(), incomes.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  long double weighted = 0.0L, total = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    weighted += (2.0L * static_cast<long double>(i + 1) - n - 1.0L) * x[i];
    total += x[i];
  }
  if (!(total > 0.0L)) throw DomainError("gini undefined for zero mean income");
  return static_cast<double>(100.0L * weighted / (static_cast<long double>(n) * total));
}

inline double gini(const std::vector<IncomeRecord>& records) {
  const auto x = incomes_of(records);
  return gini(std::span<const double>(x));
}

/// Median of the model distribution. The mean is not offered: it diverges
/// for alpha1 <= 1.
inline double median_income(const ModelParams& p) { return quantile(p, 0.5); }

inline ClassStats class_stats(const ModelParams& p, std::optional<std::span<const double>> incomes = std::nullopt) {
  const ClassFractions f = class_fractions(p);
  const PopulationRatios r = population_ratios(p);
  ClassStats s;
  s.f_low = f.f_low;
  s.f_med = f.f_med;
  s.f_high = f.f_high;
  s.r1 = r.r1;
  s.r2 = r.r2;
  s.median = median_income(p);
  if (incomes) s.gini = gini(*incomes);
  return s;
}

}  // namespace incomefp
