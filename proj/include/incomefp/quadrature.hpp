#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace incomefp::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule
// (QUADPACK qk15 constants).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
};

/// One Gauss-Kronrod (7, 15) panel with the QUADPACK error heuristic.
template <class F>
Segment kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);

  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }

  const double value = resk * half;
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kUflow = std::numeric_limits<double>::min();
  if (resabs > kUflow / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
///
/// The panel with the largest error estimate is bisected until the summed
/// error falls below max(abs_tol, rel_tol * |I|). Integrable endpoint
/// singularities are handled by repeated bisection toward the endpoint.
template <class F>
Result integrate(const F& f, double a, double b, const Options& opts = {}) {
  Result out;
  if (a == b) {
    out.converged = true;
    return out;
  }

  auto worse = [](const detail::Segment& x, const detail::Segment& y) { return x.error < y.error; };
  std::vector<detail::Segment> heap;
  heap.reserve(64);
  heap.push_back(detail::kronrod15(f, a, b));
  out.evaluations = 15;

  double total = heap.front().value;
  double total_err = heap.front().error;
  // Panels too narrow to split further are retired but still counted.
  double retired_value = 0.0;
  double retired_err = 0.0;

  auto satisfied = [&] {
    return total_err + retired_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (!satisfied() && !heap.empty() && heap.size() < opts.max_intervals) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const detail::Segment worst = heap.back();
    heap.pop_back();

    const double mid = 0.5 * (worst.a + worst.b);
    const double width = std::abs(worst.b - worst.a);
    const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
    if (width <= 1e3 * std::numeric_limits<double>::epsilon() * scale || mid == worst.a || mid == worst.b) {
      retired_value += worst.value;
      retired_err += worst.error;
      total_err -= worst.error;
      continue;
    }

    const detail::Segment left = detail::kronrod15(f, worst.a, mid);
    const detail::Segment right = detail::kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // Re-sum from the panels to shed drift from the running updates.
  double sum = retired_value;
  double err = retired_err;
  for (const auto& s : heap) {
    sum += s.value;
    err += s.error;
  }
  out.value = sum;
  out.error = err;
  out.converged = err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value));
  return out;
}

}  // namespace incomefp::quad
