#include <doctest.h>

#include <cmath>
#include <vector>

#include "mkv/errors.hpp"
#include "mkv/integrator.hpp"
#include "mkv/rng.hpp"

using namespace mkv;

namespace {

DriftModel linear_model(double slope, double coupling) {
  return polynomial_model({{0.0, slope}, coupling, {-slope}, std::nullopt, std::nullopt});
}

DriftModel zero_model() { return polynomial_model({{0.0}, 0.0, {0.0}, std::nullopt, std::nullopt}); }

SchemeConfig scheme(double dt, std::size_t steps, std::size_t paths, std::uint64_t seed = 1) {
  SchemeConfig s;
  s.dt = dt;
  s.n_steps = steps;
  s.n_paths = paths;
  s.seed = seed;
  return s;
}

double ensemble_mean(const TrajectorySet& t, std::size_t step) {
  double s = 0;
  for (std::size_t p = 0; p < t.n_paths(); ++p) s += t.state(p, step)[0];
  return s / static_cast<double>(t.n_paths());
}

}  // namespace

TEST_CASE("taming") {
  CHECK(tame(0.0, 1e4, 0.1) == 0.0);
  CHECK(tame(3.0, 1e4, 0.1) == doctest::Approx(1.36716519619307452860820935388).epsilon(1e-14));
  std::vector<double> big{1e12, 0.0};
  tame_in_place(big, 1e4, 0.1);
  CHECK(std::abs(std::hypot(big[0], big[1]) - std::pow(10.0, 0.4)) < 1e-6);
  for (double b : {-1e9, -3.0, 0.5, 1e3}) CHECK(std::abs(tame(b, 1e4, 0.1)) < std::pow(1e4, 0.1));
}

TEST_CASE("scheme validation") {
  auto s = scheme(0.1, 10, 1);
  s.alpha = 0.6;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scheme(0.0, 10, 1);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = scheme(0.1, 10, 1);
  s.n0 = 0.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("brownian step") {
  auto cfg = scheme(1.0, 1, 100000);
  const auto t = simulate_markov(zero_model(), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg);
  std::vector<double> xi(1);
  path_increment(cfg.seed, 17, 0, 1.0, xi);
  CHECK(t.state(17, 1)[0] == xi[0]);
  CHECK(std::abs(ensemble_mean(t, 1)) < 4.0 * std::sqrt(1.0 / 1e5));
}

TEST_CASE("markov symmetry and OU variance") {
  auto cfg = scheme(0.1, 200, 4000);
  const auto cw = simulate_markov(curie_weiss_model({1.0, 0.2}), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg);
  for (std::size_t k = 0; k <= 200; k += 20) CHECK(std::abs(ensemble_mean(cw, k)) < 5.0 / std::sqrt(4000.0) * 1.5);

  // Negligible taming so the OU stationary variance 1/2 applies.
  cfg = scheme(0.01, 1000, 4000, 3);
  cfg.n0 = 1e16;
  cfg.alpha = 0.5;
  const auto ou = simulate_markov(linear_model(-1.0, 0.0), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg);
  double s = 0, ss = 0;
  for (std::size_t p = 0; p < 4000; ++p) {
    const double x = ou.state(p, 1000)[0];
    s += x;
    ss += x * x;
  }
  const double var = ss / 4000 - (s / 4000) * (s / 4000);
  CHECK(std::abs(var - 0.5) < 0.05 * 0.5);
}

TEST_CASE("initial laws") {
  auto cfg = scheme(0.1, 1, 3);
  cfg.initial = InitialLaw::samples(1, {1.0, 2.0});
  const auto t = simulate_markov(zero_model(), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg);
  CHECK(t.state(0, 0)[0] == 1.0);
  CHECK(t.state(1, 0)[0] == 2.0);
  CHECK(t.state(2, 0)[0] == 1.0);
  cfg.initial = InitialLaw::point({1.0, 2.0});
  CHECK_THROWS_AS(simulate_markov(zero_model(), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg), DimensionError);
  cfg.initial = InitialLaw::standard_normal();
  const auto n = simulate_markov(zero_model(), WeightedEmpiricalMeasure::uniform(1, {0.0}), cfg);
  std::vector<double> z(1);
  gaussian_block(cfg.seed, 2, 0, NoiseChannel::initial, 1.0, z);
  CHECK(n.state(2, 0)[0] == z[0]);
}

TEST_CASE("K = 0 reduces the self-interacting and particle systems to the Markov chain") {
  const auto m = curie_weiss_model({1.0, 0.0});
  auto cfg = scheme(0.1, 300, 8, 5);
  cfg.initial = InitialLaw::standard_normal();
  const auto markov = simulate_markov(m, WeightedEmpiricalMeasure::uniform(1, {3.0}), cfg);
  CHECK(simulate_self_interacting(m, WeightFamily::lebesgue(), cfg).raw() == markov.raw());
  CHECK(simulate_self_interacting(m, WeightFamily::power(1.0), cfg).raw() == markov.raw());
  CHECK(simulate_mckean_particles(m, cfg).raw() == markov.raw());
}

TEST_CASE("self-interacting recursion by hand") {
  const double beta = 1.0, K = 0.2, dt = 0.1, n0 = 1e4, alpha = 0.1;
  auto cfg = scheme(dt, 3, 1, 77);
  cfg.initial = InitialLaw::point({0.7});
  const auto t = simulate_self_interacting(curie_weiss_model({beta, K}), WeightFamily::lebesgue(), cfg);
  std::vector<double> z{0.7};
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    sum += z[k];
    const double b = -beta * (z[k] * z[k] * z[k] - z[k]) + beta * K * sum / static_cast<double>(k + 1);
    std::vector<double> xi(1);
    path_increment(77, 0, k, dt, xi);
    z.push_back(z[k] + b / (1.0 + std::pow(n0, -alpha) * std::abs(b)) * dt + xi[0]);
  }
  for (std::size_t k = 0; k <= 3; ++k) CHECK(t.state(0, k)[0] == doctest::Approx(z[k]).epsilon(1e-15));
}

TEST_CASE("zero noise keeps the origin fixed") {
  auto cfg = scheme(0.1, 500, 2);
  cfg.zero_noise = true;
  const auto t = simulate_self_interacting(curie_weiss_model({1.0, 0.8}), WeightFamily::lebesgue(), cfg);
  for (double v : t.raw()) CHECK(v == 0.0);
}

TEST_CASE("general drifts agree with the running-mean path") {
  // Same Curie-Weiss drift through the generic measure interface.
  const DriftModel general = DriftModel::general(
      1,
      [](std::span<const double> x, const WeightedEmpiricalMeasure& mu, std::span<double> out) {
        out[0] = -(x[0] * x[0] * x[0] - x[0]) + 0.5 * mu.mean()[0];
      },
      [](double r) { return r * r / 4 - 1; }, std::nullopt, 0.5);
  const auto fast = curie_weiss_model({1.0, 0.5});
  auto cfg = scheme(0.1, 60, 3, 9);
  cfg.initial = InitialLaw::standard_normal();
  for (const auto& fam : {WeightFamily::lebesgue(), WeightFamily::power(0.5), WeightFamily::discrete(0.5)}) {
    const auto a = simulate_self_interacting(general, fam, cfg);
    const auto b = simulate_self_interacting(fast, fam, cfg);
    for (std::size_t i = 0; i < a.raw().size(); ++i) CHECK(a.raw()[i] == doctest::Approx(b.raw()[i]).epsilon(1e-10));
  }
  const auto pa = simulate_mckean_particles(general, cfg);
  const auto pb = simulate_mckean_particles(fast, cfg);
  for (std::size_t i = 0; i < pa.raw().size(); ++i) CHECK(pa.raw()[i] == doctest::Approx(pb.raw()[i]).epsilon(1e-10));
}

TEST_CASE("discrete family needs grid-aligned tau") {
  CHECK_THROWS_AS(simulate_self_interacting(curie_weiss_model({1.0, 0.2}), WeightFamily::discrete(0.25),
                                            scheme(0.1, 10, 1)),
                  ConfigError);
}

TEST_CASE("particle system") {
  CHECK_THROWS_AS(simulate_mckean_particles(linear_model(-1.0, 0.5), scheme(0.1, 1, 1)), ConfigError);

  // One explicit step on two particles by hand.
  auto cfg = scheme(0.1, 1, 2, 4);
  cfg.initial = InitialLaw::samples(1, {1.0, 3.0});
  const auto t = simulate_mckean_particles(linear_model(-1.0, 0.5), cfg);
  for (std::size_t p = 0; p < 2; ++p) {
    const double x = p == 0 ? 1.0 : 3.0;
    const double b = -x + 0.5 * 2.0;
    std::vector<double> xi(1);
    path_increment(4, p, 0, 0.1, xi);
    CHECK(t.state(p, 1)[0] == doctest::Approx(x + tame(b, 1e4, 0.1) * 0.1 + xi[0]).epsilon(1e-15));
  }

  // The ensemble mean obeys m' = -(1 - k) m.
  const double k = 0.4;
  cfg = scheme(0.01, 300, 2000, 6);
  cfg.n0 = 1e16;
  cfg.alpha = 0.5;
  cfg.initial = InitialLaw::point({2.0});
  const auto mf = simulate_mckean_particles(linear_model(-1.0, k), cfg);
  std::vector<double> ts, logs;
  for (std::size_t s = 0; s <= 300; s += 30) {
    ts.push_back(s * 0.01);
    logs.push_back(std::log(ensemble_mean(mf, s)));
  }
  const double n = static_cast<double>(ts.size());
  double mx = 0, my = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mx += ts[i] / n;
    my += logs[i] / n;
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mx) * (logs[i] - my);
    sxx += (ts[i] - mx) * (ts[i] - mx);
  }
  CHECK(-sxy / sxx == doctest::Approx(1.0 - k).epsilon(0.1));
}

TEST_CASE("thread count never changes trajectories") {
  const auto m = curie_weiss_model({1.0, 0.6});
  auto cfg = scheme(0.1, 200, 13, 8);
  cfg.initial = InitialLaw::standard_normal();
  const auto one = simulate_self_interacting(m, WeightFamily::lebesgue(), cfg);
  cfg.threads = 4;
  CHECK(simulate_self_interacting(m, WeightFamily::lebesgue(), cfg) == one);
  const auto p1 = simulate_mckean_particles(m, cfg);
  cfg.threads = 1;
  CHECK(simulate_mckean_particles(m, cfg) == p1);
}

TEST_CASE("non-finite states are reported") {
  const DriftModel nan_model = DriftModel::mean_field(
      1, [](std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = std::nan(""); },
      [](double) { return 1.0; }, 1.0, 0.0);
  CHECK_THROWS_AS(simulate_markov(nan_model, WeightedEmpiricalMeasure::uniform(1, {0.0}), scheme(0.1, 5, 1)),
                  SimulationError);
}

TEST_CASE("coupling cutoff") {
  const double delta = 0.2;
  for (double r = 0; r < 0.4; r += 0.001) {
    const double l = coupling_lambda(r, delta), p = coupling_pi(r, delta);
    CHECK(l * l + p * p == doctest::Approx(1.0).epsilon(1e-14));
    if (r <= delta / 2) CHECK(l == 0.0);
    if (r >= delta) CHECK(l == 1.0);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
  }
  // C^2 at both ends of the bridge.
  const double h = 1e-5;
  for (double r0 : {delta / 2, delta}) {
    const double d1 = (coupling_lambda(r0 + h, delta) - coupling_lambda(r0 - h, delta)) / (2 * h);
    CHECK(std::abs(d1) < 1e-6);
  }
}

TEST_CASE("reflection matrix") {
  const std::vector<double> e{0.6, 0.0, 0.8}, v{1.5, -2.0, 0.25};
  std::vector<double> once(3), twice(3);
  reflect(e, v, once);
  reflect(e, once, twice);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(twice[i] - v[i]) < 1e-12);
  CHECK(std::hypot(once[0], once[1], once[2]) == doctest::Approx(std::hypot(v[0], v[1], v[2])).epsilon(1e-14));
  const std::vector<double> e1{1.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0};
  std::vector<double> r1(3);
  reflect(e1, e2, r1);
  CHECK(r1 == e2);
}

TEST_CASE("coupled noise keeps the marginal law") {
  const double dt = 0.01, delta = 0.5;
  const int n = 100000;
  for (double gap_len : {0.3, 0.4, 2.0}) {
    double sxx = 0, syy = 0, sxy_cross = 0, s0 = 0, s1 = 0, sy01 = 0;
    std::vector<double> xi(2), xh(2), nx(2), ny(2);
    const std::vector<double> gap{gap_len * 0.6, gap_len * 0.8};
    for (int k = 0; k < n; ++k) {
      gaussian_block(1, 0, k, NoiseChannel::primary, dt, xi);
      gaussian_block(1, 0, k, NoiseChannel::auxiliary, dt, xh);
      coupling_increment(gap, delta, xi, xh, nx, ny);
      sxx += nx[0] * nx[0];
      syy += ny[0] * ny[0];
      s0 += ny[0] * ny[0];
      s1 += ny[1] * ny[1];
      sy01 += ny[0] * ny[1];
      sxy_cross += nx[0] * ny[0];
    }
    CHECK(sxx / n == doctest::Approx(dt).epsilon(0.05));
    CHECK(s0 / n == doctest::Approx(dt).epsilon(0.05));
    CHECK(s1 / n == doctest::Approx(dt).epsilon(0.05));
    CHECK(std::abs(sy01 / n) < 0.05 * dt);
    (void)syy;
    (void)sxy_cross;
  }
}

TEST_CASE("reflection coupling trajectories") {
  const auto m = linear_model(-1.0, 0.0);
  const auto drift = frozen_drift(m, WeightedEmpiricalMeasure::uniform(1, {0.0}));
  CouplingConfig cc;
  cc.delta = 0.01;
  cc.scheme = scheme(0.01, 300, 50, 2);
  cc.scheme.initial = InitialLaw::point({1.0});
  cc.initial_y = {1.0};
  const auto same = simulate_reflection_coupling(1, drift, drift, cc);
  for (double g : same.mean_gap) CHECK(g == 0.0);
  CHECK(same.mean_f_gap.empty());

  cc.initial_y = {-3.0};
  const auto aux = build_aux_function([](double) { return 1.0; }, 1.0, {6.0, 64, 1e-10});
  const auto res = simulate_reflection_coupling(1, drift, drift, cc, &aux);
  CHECK(res.mean_gap.front() == 4.0);
  CHECK(res.mean_gap.back() < res.mean_gap.front());
  CHECK(res.mean_f_gap.size() == 301);
  CHECK_THROWS_AS(simulate_reflection_coupling(2, drift, drift, cc), DimensionError);

  cc.meeting = MeetingRule::none;
  const auto naive = simulate_reflection_coupling(1, drift, drift, cc);
  CHECK(naive.mean_gap.back() < 4.0);
}
