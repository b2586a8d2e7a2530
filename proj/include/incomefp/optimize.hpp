#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace incomefp::opt {

struct Minimum1D {
  double x;
  double f;
  std::size_t evaluations;
};

/// Golden-section search for a minimum of f on [a, b].
template <class F>
Minimum1D golden_section(const F& f, double a, double b, double rel_tol = 1e-8, std::size_t max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t evals = 2;
  for (std::size_t it = 0; it < max_iter && std::abs(b - a) > rel_tol * (std::abs(c) + std::abs(d)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc <= fd ? Minimum1D{c, fc, evals} : Minimum1D{d, fd, evals};
}

template <std::size_t N>
struct MinimumND {
  std::array<double, N> x;
  double f;
  std::size_t evaluations;
  bool converged;
};

struct NelderMeadOptions {
  double initial_step = 0.05;
  double x_tol = 1e-9;
  double f_tol = 1e-14;
  std::size_t max_evaluations = 4000;
  int restarts = 2;
};

/// Nelder-Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). The search is
/// restarted from the best vertex to guard against simplex collapse.
template <std::size_t N, class F>
MinimumND<N> nelder_mead(const F& f, std::array<double, N> start, const NelderMeadOptions& o = {}) {
  using Point = std::array<double, N>;
  std::size_t evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    const double v = f(p);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  Point best = start;
  double best_f = eval(best);
  bool converged = false;

  for (int round = 0; round <= o.restarts && evals < o.max_evaluations; ++round) {
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> fs;
    pts[0] = best;
    fs[0] = best_f;
    for (std::size_t i = 0; i < N; ++i) {
      pts[i + 1] = best;
      pts[i + 1][i] += o.initial_step;
      fs[i + 1] = eval(pts[i + 1]);
    }

    converged = false;
    while (evals < o.max_evaluations) {
      std::array<std::size_t, N + 1> idx;
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      std::array<Point, N + 1> sp;
      std::array<double, N + 1> sf;
      for (std::size_t i = 0; i <= N; ++i) {
        sp[i] = pts[idx[i]];
        sf[i] = fs[idx[i]];
      }
      pts = sp;
      fs = sf;

      double size = 0.0;
      for (std::size_t i = 1; i <= N; ++i) {
        for (std::size_t k = 0; k < N; ++k) size = std::max(size, std::abs(pts[i][k] - pts[0][k]));
      }
      if (size <= o.x_tol && std::abs(fs[N] - fs[0]) <= o.f_tol * (std::abs(fs[0]) + o.f_tol)) {
        converged = true;
        break;
      }

      Point centroid{};
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[i][k] / static_cast<double>(N);
      }
      auto along = [&](double t) {
        Point p;
        for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (pts[N][k] - centroid[k]);
        return p;
      };

      const Point xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < fs[0]) {
        const Point xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[N] = xe;
          fs[N] = fe;
        } else {
          pts[N] = xr;
          fs[N] = fr;
        }
      } else if (fr < fs[N - 1]) {
        pts[N] = xr;
        fs[N] = fr;
      } else {
        const bool outside = fr < fs[N];
        const Point xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fs[N])) {
          pts[N] = xc;
          fs[N] = fc;
        } else {
          for (std::size_t i = 1; i <= N; ++i) {
            for (std::size_t k = 0; k < N; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
            fs[i] = eval(pts[i]);
          }
        }
      }
    }

    const auto it = std::min_element(fs.begin(), fs.end());
    const std::size_t i_best = static_cast<std::size_t>(it - fs.begin());
    const bool improved = fs[i_best] < best_f;
    if (fs[i_best] <= best_f) {
      best = pts[i_best];
      best_f = fs[i_best];
    }
    if (converged && !improved && round > 0) break;
  }
  return {best, best_f, evals, converged};
}

}  // namespace incomefp::opt
