#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "mkv/errors.hpp"
#include "mkv/model.hpp"

using namespace mkv;

namespace {

double drift1(const DriftModel& m, double x, const WeightedEmpiricalMeasure& mu) {
  const std::vector<double> xs{x};
  return m.drift(xs, mu)[0];
}

WeightedEmpiricalMeasure dirac(double x) { return WeightedEmpiricalMeasure::uniform(1, {x}); }

}  // namespace

TEST_CASE("curie-weiss drift") {
  const auto m = curie_weiss_model({1.0, 0.2});
  CHECK(drift1(m, 0.0, dirac(0.0)) == 0.0);
  CHECK(drift1(m, 1.0, dirac(0.0)) == 0.0);
  CHECK(drift1(curie_weiss_model({1.0, 0.5}), 2.0, dirac(2.0)) == -5.0);
  CHECK(m.eta() == doctest::Approx(0.2));
  CHECK(m.depends_on_mean_only());
  CHECK(drift1(m, 0.3, dirac(1.0)) == drift1(m, 0.3, dirac(1.0)));
  CHECK_THROWS_AS(curie_weiss_model({0.0, 0.2}), DomainError);
}

TEST_CASE("kappa_eff") {
  const auto m = curie_weiss_model({1.0, 0.2});
  CHECK(kappa_eff(m, 2.0) == 0.0);
  const auto t = m.with_truncation(1.0);
  CHECK(kappa_eff(t, 4.0) == 1.0);
  CHECK(kappa_eff(t, 1.0) == -0.75);
  CHECK_THROWS_AS(kappa_eff(m, 0.0), DomainError);
  CHECK_THROWS_AS(kappa_eff(m, -1.0), DomainError);

  std::vector<double> grid;
  for (int i = 1; i <= 200; ++i) grid.push_back(0.05 * i);
  double prev = -1e300;
  for (double r : grid) {
    CHECK(kappa_eff(t, r) >= prev);
    prev = kappa_eff(t, r);
  }
  const std::vector<double> fine{1e-9, 0.5, 1.0, 6.0};
  const auto prof = check_kappa_profile(curie_weiss_model({1.0, 0.2}, 8.0), fine);
  CHECK(prof.nondecreasing);
  CHECK(prof.vanishes_at_zero);
}

TEST_CASE("dissipativity checker") {
  const auto cw = curie_weiss_model({1.0, 0.2});
  for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(check_dissipativity(cw, uniform_box_sampler(1, seed), 5000).passed());
  CHECK(check_dissipativity(cw.with_truncation(8.0), uniform_box_sampler(1, 4), 5000).passed());

  // Dense scan of the CW inequality as an independent oracle.
  double worst = -1e300;
  for (double x = -5; x <= 5; x += 0.05)
    for (double y = -5; y <= 5; y += 0.05) {
      const double r = x - y;
      if (r == 0) continue;
      const double lhs = -r * ((x * x * x - x) - (y * y * y - y));
      worst = std::max(worst, lhs + (r * r / 4 - 1) * r * r);
    }
  CHECK(worst <= 1e-9);

  const auto expanding = polynomial_model({{0.0, 1.0}, 0.0, {1.0}, std::nullopt, std::nullopt});
  const auto rep = check_dissipativity(expanding, uniform_box_sampler(1, 5), 100);
  CHECK(rep.max_violation > 0.0);
  CHECK_FALSE(rep.passed());
  CHECK(rep.worst_x.size() == 1);

  const AssumptionSampler diagonal = [](std::size_t i) {
    const double x = 0.1 * static_cast<double>(i);
    return AssumptionSample{{x}, {x}, WeightedEmpiricalMeasure::uniform(1, {0.0})};
  };
  CHECK(check_dissipativity(cw, diagonal, 50).max_violation == 0.0);
  CHECK_THROWS_AS(check_dissipativity(cw, diagonal, 0), DomainError);
}

TEST_CASE("weak interaction checker") {
  const auto cw = curie_weiss_model({1.0, 0.2});
  const std::vector<WeakInteractionSample> pair{{{0.3}, dirac(0.0), dirac(1.0)}};
  CHECK(check_weak_interaction(cw, pair).eta_hat == doctest::Approx(0.2).epsilon(1e-15));
  const auto rep = check_weak_interaction(cw, 500);
  CHECK(rep.passed());
  CHECK(rep.eta_hat == doctest::Approx(0.2).epsilon(1e-9));

  const auto indep = polynomial_model({{0.0, -1.0}, 0.0, {1.0}, 1.0, std::nullopt});
  CHECK(check_weak_interaction(indep, 200).eta_hat == 0.0);

  const std::vector<WeakInteractionSample> same{{{0.3}, dirac(1.0), dirac(1.0)}, {{0.1}, dirac(2.0), dirac(2.0)}};
  CHECK_THROWS_AS(check_weak_interaction(cw, same), EstimationError);
  const std::vector<WeakInteractionSample> mixed{same[0], pair[0]};
  CHECK(check_weak_interaction(cw, mixed).used_samples == 1);
}

TEST_CASE("aux function for constant kappa") {
  for (double c0 : {0.5, 1.0, 2.0}) {
    const auto aux = build_aux_function([c0](double) { return c0; }, c0, {6.0, 64, 1e-10});
    CHECK(aux.fprime0() == doctest::Approx(1.0 / c0).epsilon(1e-12));
    CHECK(aux.f()[0] == 0.0);
    for (std::size_t i = 0; i < aux.grid().size(); ++i) {
      CHECK(aux.fprime()[i] == doctest::Approx(1.0 / c0).epsilon(1e-10));
      CHECK(aux.f()[i] == doctest::Approx(aux.grid()[i] / c0).epsilon(1e-10));
    }
  }
}

TEST_CASE("aux function for curie-weiss") {
  const auto m = curie_weiss_model({1.0, 0.2}, 8.0);
  const auto aux = build_aux_function(m);
  // f'(r) from an independent 30-digit quadrature with the closed-form inner integral.
  const std::vector<std::pair<double, double>> oracle{
      {0.0, 3.4770518117036945059}, {1.0, 2.5681717549665745633}, {2.0, 1.2533141373155002749},
      {3.0, 0.5784303460476311283}, {4.0, 0.3045902987101054253}, {5.0, 0.1842076773308305417}};
  const double h = aux.grid()[1];
  for (const auto& [r, v] : oracle) {
    const auto i = static_cast<std::size_t>(std::llround(r / h));
    if (std::abs(aux.grid()[i] - r) > 1e-12) continue;
    CHECK(aux.fprime()[i] == doctest::Approx(v).epsilon(1e-9));
  }
  CHECK(aux.fprime0() == doctest::Approx(3.4770518117036945059).epsilon(1e-9));
  CHECK(aux(2.0) == doctest::Approx(5.01640240535199101354719649352).epsilon(1e-8));
  CHECK(aux.kappa_inf() == 8.0);
  CHECK(aux.fprime().back() == doctest::Approx(0.125).epsilon(1e-9));

  const auto inv = check_aux_invariants(aux, m.kappa_function(), m.truncation());
  CHECK(inv.f0_zero);
  CHECK(inv.fprime_positive);
  CHECK(inv.concave);
  CHECK(inv.bounds_hold);
  CHECK(inv.max_ode_residual < 1e-12);
  CHECK(inv.max_fd_residual <= 1e-4);

  // Beyond r_max the extension is linear with slope f'(r_max).
  CHECK(aux(10.0) - aux(8.0) == doctest::Approx(2.0 * aux.fprime().back()));
  CHECK(truncation_radius(m.kappa_function(), 8.0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("aux function errors") {
  const auto untruncated = curie_weiss_model({1.0, 0.2});
  CHECK_THROWS_AS(build_aux_function(untruncated), ConfigError);
  const auto k = [](double) { return 1.0; };
  CHECK_THROWS_AS(build_aux_function(k, -1.0), ConfigError);
  CHECK_THROWS_AS(build_aux_function(k, 1.0, {0.0, 64, 1e-10}), ConfigError);
  CHECK_THROWS_AS(build_aux_function(k, 1.0, {6.0, 8, 1e-10}), ConfigError);
  // exp(-1/2 int tau kappa) overflows for a strongly negative kappa.
  CHECK_THROWS_AS(build_aux_function([](double r) { return r < 30 ? -1e3 : 1.0; }, 1.0, {1.0, 16, 1e-10}),
                  NumericalError);
}

TEST_CASE("weak interaction threshold") {
  CHECK(weak_interaction_threshold_cw(1.0) == doctest::Approx(0.2876).epsilon(5e-4 / 0.2876));
  CHECK(weak_interaction_threshold_cw(2.0) == doctest::Approx(0.112635621314328727596503475715).epsilon(1e-13));
  CHECK(weak_interaction_threshold_cw(1e-6) > 100.0);
  double prev = 1e300;
  for (double b : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(weak_interaction_threshold_cw(b) < prev);
    prev = weak_interaction_threshold_cw(b);
  }
  CHECK_THROWS_AS(weak_interaction_threshold_cw(0.0), DomainError);
  // The threshold equals 1/(beta f'(0)) for the truncated profile.
  const auto aux = build_aux_function(curie_weiss_model({1.0, 0.2}, 8.0));
  CHECK(weak_interaction_threshold_cw(1.0) == doctest::Approx(1.0 / aux.fprime0()).epsilon(1e-9));
}

TEST_CASE("model JSON") {
  const auto m = model_from_json(nlohmann::json::parse(R"({"type":"curie_weiss","beta":1.0,"K":0.5})"));
  CHECK(m.truncation() == 8.0);
  CHECK(m.eta() == 0.5);
  const auto none = model_from_json(nlohmann::json::parse(R"({"type":"curie_weiss","K":0.5,"truncation_L":"none"})"));
  CHECK_FALSE(none.truncation().has_value());
  const auto p = model_from_json(nlohmann::json::parse(
      R"({"type":"custom_polynomial_1d","drift_coefficients":[0,-1],"kappa_coefficients":[1],"truncation_L":1})"));
  CHECK(drift1(p, 2.0, dirac(5.0)) == -2.0);

  const auto message = [](const char* text) {
    try {
      model_from_json(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"beta":1})").find("model.type") != std::string::npos);
  CHECK(message(R"({"type":"curie_weiss","beta":-1,"K":0.1})").find("model.beta") != std::string::npos);
  CHECK(message(R"({"type":"curie_weiss","beta":1})").find("model.K") != std::string::npos);
  CHECK(message(R"({"type":"curie_weiss","K":0.1,"truncation_L":-3})").find("model.truncation_L") !=
        std::string::npos);
  CHECK(message(R"({"type":"potts"})").find("model.type") != std::string::npos);
}
