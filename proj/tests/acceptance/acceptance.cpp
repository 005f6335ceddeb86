// Acceptance suite: one PASS/FAIL line per criterion.
//   mkv_acceptance                 run all criteria
//   mkv_acceptance --criterion N   run criterion N only
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mkv/analysis.hpp"
#include "mkv/config.hpp"
#include "mkv/errors.hpp"
#include "mkv/experiment.hpp"
#include "mkv/integrator.hpp"
#include "mkv/metrics.hpp"
#include "mkv/model.hpp"

using namespace mkv;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Auxiliary function fidelity.
Outcome criterion_1() {
  const auto start = Clock::now();
  bool pass = true;
  std::ostringstream d;
  for (double c0 : {0.5, 1.0, 2.0}) {
    const auto aux = build_aux_function([c0](double) { return c0; }, c0, {6.0, 256, 1e-10});
    double worst_erfc = 0.0, worst_flat = 0.0;
    for (std::size_t i = 0; i < aux.grid().size(); ++i) {
      const double r = aux.grid()[i];
      const double closed = 1.0 / c0 + 0.5 * r * std::sqrt(std::numbers::pi / c0) * std::exp(c0 * r * r / 4.0) *
                                           std::erfc(r * std::sqrt(c0) / 2.0);
      worst_erfc = std::max(worst_erfc, std::abs(aux.fprime()[i] - closed) / closed);
      worst_flat = std::max(worst_flat, std::abs(aux.fprime()[i] * c0 - 1.0));
    }
    pass = pass && worst_erfc <= 1e-8;
    d << "c0=" << c0 << " erfc-form rel err " << fmt("%.3e", worst_erfc) << " (1/c0 rel err "
      << fmt("%.1e", worst_flat) << "); ";
  }
  const auto cw = curie_weiss_model({1.0, 0.2}, 8.0);
  const auto aux = build_aux_function(cw, {6.0, 256, 1e-10});
  const auto inv = check_aux_invariants(aux, cw.kappa_function(), cw.truncation());
  const bool cw_ok = inv.max_ode_residual <= 1e-4 && inv.bounds_hold && inv.f0_zero;
  const double elapsed = seconds_since(start);
  d << "CW ODE residual " << fmt("%.1e", inv.max_ode_residual) << " bounds " << (inv.bounds_hold ? "ok" : "violated")
    << "; " << fmt("%.2f s", elapsed);
  return {pass && cw_ok && elapsed < 5.0, d.str()};
}

// W1 against the assignment oracle.
Outcome criterion_2() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const int n = size(gen);
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = u(gen);
    for (auto& x : b) x = u(gen);
    const auto mu = WeightedEmpiricalMeasure::uniform(1, a);
    const auto nu = WeightedEmpiricalMeasure::uniform(1, b);
    worst = std::max(worst, std::abs(w1_1d(mu, nu) - w1_assignment_oracle(mu, nu)));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-10 && elapsed < 5.0,
          "max |w1_1d - oracle| " + fmt("%.2e", worst) + " over 500 instances; " + fmt("%.2f s", elapsed)};
}

// Markov contraction of two ensembles under the frozen Curie-Weiss drift.
Outcome criterion_3() {
  const auto start = Clock::now();
  const auto model = curie_weiss_model({1.0, 0.2});
  const auto frozen = WeightedEmpiricalMeasure::dirac(std::vector<double>{0.0});
  SchemeConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 1000;
  cfg.n_paths = 2000;
  cfg.seed = 33;
  cfg.threads = 0;
  cfg.initial = InitialLaw::point({-2.0});
  const auto lo = simulate_markov(model, frozen, cfg);
  cfg.initial = InitialLaw::point({2.0});
  const auto hi = simulate_markov(model, frozen, cfg);
  std::vector<double> t, w;
  for (int s = 1; s <= 10; ++s) {
    const std::size_t step = static_cast<std::size_t>(s) * 100;
    std::vector<double> a(cfg.n_paths), b(cfg.n_paths);
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
      a[p] = lo.state(p, step)[0];
      b[p] = hi.state(p, step)[0];
    }
    t.push_back(static_cast<double>(s));
    w.push_back(w1_1d(WeightedEmpiricalMeasure::uniform(1, a), WeightedEmpiricalMeasure::uniform(1, b)));
  }
  const auto fit = fit_log_linear(t, w);
  const double elapsed = seconds_since(start);
  return {fit.slope < 0.0 && fit.r2 >= 0.9 && elapsed < 60.0,
          "W1(1) " + fmt("%.3g", w.front()) + ", W1(10) " + fmt("%.3g", w.back()) + ", slope " +
              fmt("%.4f", fit.slope) + ", R2 " + fmt("%.4f", fit.r2) + "; " + fmt("%.1f s", elapsed)};
}

ExperimentConfig desk_config(const fs::path& out, unsigned threads) {
  nlohmann::json j{{"model", {{"type", "curie_weiss"}, {"beta", 1.0}, {"truncation_L", 8.0}}},
                   {"sweep", {{"parameter", "K"}, {"values", {0.2, 0.4, 0.6, 0.8, 1.0, 1.2}}}},
                   {"scheme", {{"dt", 0.1}, {"n0", 1e4}, {"alpha", 0.1}, {"initial", {{"type", "standard_normal"}}}}},
                   {"preset", "desk"},
                   {"seed", 20240229},
                   {"out", out.string()}};
  auto cfg = parse_experiment_config(j);
  cfg.scheme.threads = threads;
  return cfg;
}

// Desk-scale reproduction of the K sweep.
Outcome criterion_4() {
  const auto start = Clock::now();
  const auto rep = run_experiment(desk_config("acceptance_desk", 0));
  const double elapsed = seconds_since(start);
  auto final_w1 = [&](std::size_t i) { return rep.entries[i].curve.back().mean_w1; };
  auto slope = [&](std::size_t i) { return rep.entries[i].slope_final_decade ? rep.entries[i].slope_final_decade->slope : NAN; };
  const bool a = slope(0) <= -0.1 && final_w1(0) < 0.15;
  bool b = true;
  for (std::size_t i : {1u, 2u}) b = b && final_w1(i) < final_w1(4) && final_w1(i) < final_w1(5);
  const bool c = slope(5) >= -0.02;
  std::ostringstream d;
  d << "K=0.2 slope " << fmt("%.3f", slope(0)) << " W1 " << fmt("%.4f", final_w1(0)) << (a ? "" : " [a fails]")
    << "; W1(0.4,0.6,1.0,1.2) = " << fmt("%.3f", final_w1(1)) << "," << fmt("%.3f", final_w1(2)) << ","
    << fmt("%.3f", final_w1(4)) << "," << fmt("%.3f", final_w1(5)) << (b ? "" : " [b fails]") << "; K=1.2 slope "
    << fmt("%.4f", slope(5)) << (c ? "" : " [c fails]") << "; " << fmt("%.1f s", elapsed);
  return {a && b && c && elapsed < 600.0, d.str()};
}

// Rate calculators.
Outcome criterion_5() {
  int ok = 0;
  std::string failed;
  auto expect = [&](const std::string& name, const RateBound& r, double value, const std::string& binding = "") {
    if (std::abs(r.epsilon_max - value) <= 1e-15 && (binding.empty() || r.binding == binding)) ++ok;
    else failed += " " + name;
  };
  expect("dist(1,2)", rate_bound_distribution(1, 2.0), 0.25, "half-term");
  expect("dist(3,2)", rate_bound_distribution(3, 2.0), 1.0 / 6.0, "dimension-term");
  const auto near_one = rate_bound_distribution(1, 1.0001);
  if (near_one.epsilon_max < 1e-4) ++ok;
  else failed += " dist(1,1.0001)";
  expect("path(0.5)", rate_bound_path(1, 2.0, 0.5, 1.0), 0.25);
  expect("path(0.9)", rate_bound_path(1, 2.0, 0.9, 1.0), 0.1, "interaction");
  expect("path(1)", rate_bound_path(1, 2.0, 1.0, 1.0), 0.0);
  expect("weighted(0.3,1)", rate_bound_weighted(1, 2.0, 0.3, 1.0), 0.25);
  const auto tiny = rate_bound_weighted(1, 2.0, 1e-12, 1.0);
  if (tiny.epsilon_max <= 1e-12 && tiny.binding == "epsilon1") ++ok;
  else failed += " weighted(eps1->0)";
  expect("weighted(1,0.6)", rate_bound_weighted(2, 3.0, 1.0, 0.6), 0.2);
  const double threshold = weak_interaction_threshold_cw(1.0);
  const bool th = std::abs(threshold - 0.2876) <= 5e-4;
  return {ok == 9 && th, std::to_string(ok) + "/9 examples exact" + (failed.empty() ? "" : " (failed:" + failed + ")") +
                             "; threshold(beta=1) " + fmt("%.8f", threshold)};
}

// Reflection coupling of a contractive pair.
Outcome criterion_6() {
  const auto start = Clock::now();
  PolynomialModelSpec spec;
  spec.drift_coefficients = {0.0, -1.0};
  spec.kappa_coefficients = {1.0};
  spec.truncation = 1.0;
  const auto model = polynomial_model(spec);
  const auto drift = frozen_drift(model, WeightedEmpiricalMeasure::dirac(std::vector<double>{0.0}));
  CouplingConfig cc;
  cc.delta = 0.01;
  cc.scheme.dt = 0.01;
  cc.scheme.n_steps = 1000;
  cc.scheme.n_paths = 1000;
  cc.scheme.seed = 66;
  cc.scheme.threads = 0;
  cc.scheme.initial = InitialLaw::point({2.0});
  cc.initial_y = {-2.0};
  const auto res = simulate_reflection_coupling(1, drift, drift, cc);
  const double gap = res.mean_gap.back();

  // Each marginal is driven by a standard Brownian motion: pooled one-step
  // noise variance per unit time should be 1.
  double worst = 0.0;
  for (const auto* traj : {&res.x, &res.y}) {
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < traj->n_paths(); ++p)
      for (std::size_t k = 0; k < traj->n_steps(); ++k) {
        const double x = traj->state(p, k)[0];
        const double xi = traj->state(p, k + 1)[0] - x - tame(-x, cc.scheme.n0, cc.scheme.alpha) * cc.scheme.dt;
        sum += xi;
        sum2 += xi * xi;
        ++n;
      }
    const double mean = sum / static_cast<double>(n);
    const double var = (sum2 / static_cast<double>(n) - mean * mean) / cc.scheme.dt;
    worst = std::max(worst, std::abs(var - 1.0));
  }
  const double elapsed = seconds_since(start);
  return {gap < 0.1 && worst <= 0.05 && elapsed < 60.0,
          "E|Delta_T| " + fmt("%.4g", gap) + ", marginal noise variance rel err " + fmt("%.2e", worst) + "; " +
              fmt("%.1f s", elapsed)};
}

// Determinism across thread counts.
Outcome criterion_7() {
  const auto start = Clock::now();
  run_experiment(desk_config("acceptance_t1", 1));
  run_experiment(desk_config("acceptance_t8", 8));
  std::size_t same = 0, total = 0;
  for (const auto& entry : fs::directory_iterator("acceptance_t1")) {
    if (entry.path().extension() != ".csv") continue;
    ++total;
    if (slurp(entry.path()) == slurp(fs::path("acceptance_t8") / entry.path().filename())) ++same;
  }
  return {total == 6 && same == total,
          std::to_string(same) + "/" + std::to_string(total) + " CSVs byte-identical; " +
              fmt("%.1f s", seconds_since(start))};
}

// Stationary density.
Outcome criterion_8() {
  const auto p = stationary_density_cw({1.0, 0.2});
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return p.pdf(x); }, -10.0, 10.0, 12, 1e-14);
  double asym = 0.0;
  for (double x = 0.0; x <= 4.0; x += 0.01) asym = std::max(asym, std::abs(p.pdf(x) - p.pdf(-x)));
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = p.quantile(u(gen));
  const double w = w1_1d_vs_density(WeightedEmpiricalMeasure::uniform(1, xs), p);
  return {std::abs(mass - 1.0) <= 1e-8 && asym <= 1e-12 && w <= 0.02,
          "mass " + fmt("%.12f", mass) + ", asymmetry " + fmt("%.1e", asym) + ", self-sampling W1 " + fmt("%.4f", w)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"auxiliary function fidelity", criterion_1}, {"W1 oracle equivalence", criterion_2},
    {"Markov contraction", criterion_3},          {"desk-scale K sweep", criterion_4},
    {"rate calculators", criterion_5},            {"coupling sanity", criterion_6},
    {"thread determinism", criterion_7},          {"stationary density", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(kCriteria.size())) {
        std::fprintf(stderr, "unknown criterion %d\n", n);
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::fprintf(stderr, "usage: mkv_acceptance [--criterion N]\n");
      return 2;
    }
  }
  if (selected.empty())
    for (std::size_t n = 1; n <= kCriteria.size(); ++n) selected.push_back(n);

  bool all = true;
  for (auto n : selected) {
    const auto& [name, run] = kCriteria[n - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
