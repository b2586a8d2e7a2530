#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "incomefp/simulate.hpp"

using namespace incomefp;
using Catch::Matchers::WithinRel;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.coeffs = {2.0, 0.5, 1.5, -0.2, 1.0, 1.0};
  c.m1 = 5.0;
  c.m_init = 0.01;
  c.dt = 1e-3;
  c.n_steps = 10;
  c.n_paths = 4;
  return c;
}

}  // namespace

TEST_CASE("drift and diffusion") {
  const LangevinCoeffs c{2.0, 0.5, 1.5, -0.2, 1.0, 0.3};
  CHECK(drift(c, 5.0, 0.0) == 2.0);
  CHECK(drift(c, 5.0, 4.0) == 2.0 + 0.5 * 4.0);
  CHECK(drift(c, 5.0, 6.0) == 1.5 - 0.2 * 6.0);
  CHECK(diffusion(c, 5.0, std::nextafter(5.0, 0.0)) == Catch::Approx(diffusion(c, 5.0, 5.0)).epsilon(1e-14));

  // Drift relative to noise amplitude drops across m1 when a_hi < a.
  const double m1 = 100.0;
  const LangevinCoeffs k{1.0, 1.9, 1.0, -0.2, 1.0, 1.0};
  auto ratio = [&](double m) { return drift(k, m1, m) / std::sqrt(diffusion(k, m1, m)); };
  CHECK(ratio(std::nextafter(m1, 0.0)) > ratio(m1));
}

TEST_CASE("step") {
  SimConfig c = base_config();
  c.coeffs.A0 = 0.0;
  c.coeffs.a = 0.0;
  c.coeffs.A0_hi = 0.0;
  c.coeffs.a_hi = 0.0;
  CHECK(step(3.0, c, 0.0) == 3.0);

  SimConfig d = base_config();
  d.coeffs = {10.0, 0.5, 10.0, 0.5, 1.0, 1.0};
  double m = 0.02;
  for (int i = 0; i < 100; ++i) {
    m = step(m, d, 0.0);
    CHECK(m >= d.m_init);
  }
  CHECK(m < 0.03);

  bool hit = false;
  CHECK(step(0.01, d, 0.0, &hit) == Catch::Approx(2 * 0.01 - (0.01 - drift(d.coeffs, d.m1, 0.01) * d.dt)));
  CHECK(hit);
}

TEST_CASE("step variance matches the diffusion coefficient") {
  SimConfig c = base_config();
  c.coeffs = {1e-12, 1e-12, 1e-12, 0.0, 4.0, 0.25};
  c.m_init = 1e-6;
  const double m = 2.0;
  std::mt19937_64 eng(3);
  std::normal_distribution<double> z;
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double d = step(m, c, z(eng)) - m;
    s += d;
    s2 += d * d;
  }
  const double var = s2 / n - (s / n) * (s / n);
  CHECK_THAT(var, WithinRel(2.0 * diffusion(c.coeffs, c.m1, m) * c.dt, 0.01));
}

TEST_CASE("config validation") {
  SimConfig c = base_config();
  c.dt = 0.9;
  CHECK_THROWS_AS(c.validate(), StabilityError);
  c = base_config();
  c.burn_in = 11;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = base_config();
  c.n_paths = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = base_config();
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  // |a_hi| enters the bound.
  c = base_config();
  c.coeffs.a_hi = -0.9;
  c.coeffs.b = 1.0;
  c.coeffs.a = 0.5;
  c.dt = 0.5 / 0.9 * 1.01;
  CHECK_THROWS_AS(c.validate(), StabilityError);
}

TEST_CASE("run_ensemble") {
  SimConfig c = base_config();
  c.n_paths = 1;
  c.n_steps = 0;
  const Ensemble e0 = run_ensemble(c);
  REQUIRE(e0.samples.size() == 1);
  CHECK(e0.samples[0] == c.coeffs.B0 / c.coeffs.A0);

  c.initial = {0.7, 1.3};
  c.n_paths = 3;
  const Ensemble e1 = run_ensemble(c);
  CHECK(e1.samples == std::vector<double>{0.7, 1.3, 0.7});

  SimConfig d = base_config();
  d.n_paths = 1000;
  d.n_steps = 200;
  d.seed = 42;
  d.threads = 1;
  const Ensemble a = run_ensemble(d);
  d.threads = 4;
  const Ensemble b = run_ensemble(d);
  CHECK(a.samples == b.samples);
  CHECK(a.n_reflections == b.n_reflections);
  for (double m : a.samples) CHECK(m >= d.m_init);
  d.seed = 43;
  CHECK(run_ensemble(d).samples != a.samples);
}

TEST_CASE("additive limit relaxes to the exponential law") {
  // a = a_hi = 0, tiny b, m1 far away: stationary law exp(-(m - m_init) / T).
  SimConfig c;
  const double T = 2.0;
  c.coeffs = {1.0, 1e-12, 1.0, 1e-12, T, 1e-12};
  c.m1 = 1e12;
  c.m_init = 0.01;
  c.dt = 0.01;
  c.n_steps = 1500;
  c.n_paths = 100000;
  c.seed = 11;
  const Ensemble e = run_ensemble(c);
  std::vector<double> x = e.samples;
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = 1.0 - std::exp(-(x[i] - c.m_init) / T);
    ks = std::max({ks, std::abs(F - double(i) / x.size()), std::abs(F - double(i + 1) / x.size())});
  }
  CHECK(ks < 0.02);
}

TEST_CASE("halving dt stays within the Monte Carlo noise") {
  const ShapeParams s{39.5e3, 39.5e3, 2.902, 0.79, 1.4e5, 4e5, 0.01};
  const ModelParams p = normalize(ModelParams(s));
  SimConfig c;
  c.coeffs = effective_to_coeffs(s);
  c.m1 = s.m1;
  c.m_init = s.m_init;
  c.dt = 0.01 * s.T * s.T / c.coeffs.B0;
  c.n_steps = 1000;
  c.n_paths = 20000;
  c.seed = 99;
  const double coarse = ks_distance(run_ensemble(c).samples, p);
  c.dt /= 2;
  c.n_steps *= 2;
  const double fine = ks_distance(run_ensemble(c).samples, p);
  // 1.36 / sqrt(n) is the 95% KS quantile.
  CHECK(std::abs(coarse - fine) < 1.36 / std::sqrt(20000.0));
}
