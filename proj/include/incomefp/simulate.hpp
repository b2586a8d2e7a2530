#pragma once

// Euler-Maruyama ensemble integration of the threshold Langevin equation with
// a reflecting wall at m_init.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "incomefp/error.hpp"
#include "incomefp/model.hpp"

namespace incomefp {

struct SimConfig {
  LangevinCoeffs coeffs;
  double m1 = 0.0;
  double m_init = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  /// Start values, cycled over paths. Empty means every path starts at T.
  std::vector<double> initial;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  /// Largest admissible time step.
  double max_dt() const {
    const double k = std::max({coeffs.a, std::abs(coeffs.a_hi), coeffs.b});
    return 1.0 / (2.0 * k);
  }

  void validate() const {
    coeffs.validate();
    if (!(m_init > 0.0) || !std::isfinite(m_init)) throw DomainError("m_init must be positive");
    if (!(m1 > m_init)) throw DomainError("m1 must exceed m_init");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (n_paths < 1) throw DomainError("n_paths must be at least 1");
    if (burn_in > n_steps) throw DomainError("burn_in must not exceed n_steps");
    for (double m : initial) {
      if (!(m >= m_init) || !std::isfinite(m)) throw DomainError("initial incomes must be finite and at least m_init");
    }
    if (!(dt < max_dt())) {
      throw StabilityError("dt = " + std::to_string(dt) + " violates the stability bound dt < " + std::to_string(max_dt()));
    }
  }
};

struct Ensemble {
  std::vector<double> samples;
  SimConfig config;
  std::size_t n_reflections = 0;
};

inline double drift(const LangevinCoeffs& c, double m1, double m) {
  return m < m1 ? c.A0 + c.a * m : c.A0_hi + c.a_hi * m;
}

inline double diffusion(const LangevinCoeffs& c, double /*m1*/, double m) { return c.B0 + c.b * m * m; }

/// One Ito Euler-Maruyama step with reflection at m_init.
inline double step(double m, const SimConfig& cfg, double noise, bool* reflected = nullptr) {
  const double A = drift(cfg.coeffs, cfg.m1, m);
  const double B = diffusion(cfg.coeffs, cfg.m1, m);
  double next = m - A * cfg.dt + std::sqrt(2.0 * B * cfg.dt) * noise;
  const bool hit = next < cfg.m_init;
  if (hit) next = 2.0 * cfg.m_init - next;
  if (reflected) *reflected = hit;
  return next;
}

namespace detail {

inline std::mt19937_64 path_engine(std::uint64_t seed, std::size_t path) {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Runs every path for n_steps and returns the final states. Each path owns a
/// random stream derived from (seed, path index), so the result does not
/// depend on the thread count.
inline Ensemble run_ensemble(const SimConfig& cfg) {
  cfg.validate();
  const double start_T = cfg.coeffs.B0 / cfg.coeffs.A0;
  Ensemble out;
  out.config = cfg;
  out.samples.resize(cfg.n_paths);

  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, cfg.n_paths));
  std::vector<std::size_t> reflections(n_threads, 0);

  auto work = [&](unsigned t) {
    const std::size_t lo = cfg.n_paths * t / n_threads;
    const std::size_t hi = cfg.n_paths * (t + 1) / n_threads;
    std::size_t refl = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      auto eng = detail::path_engine(cfg.seed, i);
      std::normal_distribution<double> normal(0.0, 1.0);
      double m = cfg.initial.empty() ? std::max(start_T, cfg.m_init) : cfg.initial[i % cfg.initial.size()];
      for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        bool hit = false;
        m = step(m, cfg, normal(eng), &hit);
        refl += hit;
      }
      out.samples[i] = m;
    }
    reflections[t] = refl;
  };

  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (std::size_t r : reflections) out.n_reflections += r;
  return out;
}

/// Kolmogorov-Smirnov distance between samples and the model distribution.
inline double ks_distance(std::span<const double> samples, const ModelParams& p) {
  if (samples.empty()) throw DomainError("ks_distance needs samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::vector<double> pi = ccdf_sorted(p, x);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = 1.0 - pi[i];
    d = std::max({d, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  return d;
}

}  // namespace incomefp
