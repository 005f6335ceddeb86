#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mkv/analysis.hpp"
#include "mkv/integrator.hpp"
#include "mkv/metrics.hpp"
#include "mkv/model.hpp"

namespace {

void BM_W1VsDensity(benchmark::State& state) {
  const auto ref = mkv::stationary_density_cw({1.0, 0.2});
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g;
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (auto& x : xs) x = g(gen);
  const auto mu = mkv::WeightedEmpiricalMeasure::uniform(1, xs);
  for (auto _ : state) benchmark::DoNotOptimize(mkv::w1_1d_vs_density(mu, ref));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W1VsDensity)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_W1Empirical(benchmark::State& state) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& x : a) x = g(gen);
  for (auto& x : b) x = g(gen) + 0.5;
  const auto mu = mkv::WeightedEmpiricalMeasure::uniform(1, a);
  const auto nu = mkv::WeightedEmpiricalMeasure::uniform(1, b);
  for (auto _ : state) benchmark::DoNotOptimize(mkv::w1_1d(mu, nu));
}
BENCHMARK(BM_W1Empirical)->RangeMultiplier(10)->Range(100, 100000);

void BM_SelfInteracting(benchmark::State& state) {
  const auto model = mkv::curie_weiss_model({1.0, 0.2}, 8.0);
  mkv::SchemeConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = static_cast<std::size_t>(state.range(0));
  cfg.n_paths = 16;
  cfg.initial = mkv::InitialLaw::standard_normal();
  for (auto _ : state)
    benchmark::DoNotOptimize(mkv::simulate_self_interacting(model, mkv::WeightFamily::lebesgue(), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n_steps * cfg.n_paths));
}
BENCHMARK(BM_SelfInteracting)->Arg(1000)->Arg(10000);

void BM_McKeanParticles(benchmark::State& state) {
  const auto model = mkv::curie_weiss_model({1.0, 0.2}, 8.0);
  mkv::SchemeConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 100;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.initial = mkv::InitialLaw::standard_normal();
  for (auto _ : state) benchmark::DoNotOptimize(mkv::simulate_mckean_particles(model, cfg));
}
BENCHMARK(BM_McKeanParticles)->Arg(100)->Arg(1000);

void BM_AuxBuild(benchmark::State& state) {
  const auto model = mkv::curie_weiss_model({1.0, 0.2}, 8.0);
  mkv::AuxOptions opt;
  opt.grid_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mkv::build_aux_function(model, opt));
}
BENCHMARK(BM_AuxBuild)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace
BENCHMARK_MAIN();
