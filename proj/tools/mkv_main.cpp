#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mkv/analysis.hpp"
#include "mkv/config.hpp"
#include "mkv/errors.hpp"
#include "mkv/experiment.hpp"
#include "mkv/format.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads,
            const std::optional<std::string>& preset, bool save_trajectories) {
  auto cfg = mkv::parse_experiment_config(mkv::read_json_file(config_path));
  if (preset) mkv::apply_preset(cfg, *preset);
  if (out) cfg.out_dir = *out;
  if (seed) cfg.scheme.seed = *seed;
  if (threads) cfg.scheme.threads = *threads;
  if (save_trajectories) cfg.save_trajectories = true;
  const auto report = mkv::run_experiment(cfg);
  for (const auto& e : report.entries) {
    std::cout << cfg.sweep.parameter << '=' << e.label
              << " final_mean_w1=" << mkv::format_double(e.curve.back().mean_w1);
    if (e.slope_final_decade) std::cout << " slope_final_decade=" << mkv::format_double(e.slope_final_decade->slope);
    std::cout << " eps_max=" << mkv::format_double(e.rate_path.epsilon_max) << '\n';
  }
  std::cout << "wrote " << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_coupling(const std::string& config_path, const std::optional<std::string>& out) {
  auto cfg = mkv::parse_coupling_config(mkv::read_json_file(config_path));
  if (out) cfg.out_dir = *out;
  const auto rep = mkv::run_coupling_diagnostic(cfg);
  std::cout << "final mean gap " << mkv::format_double(rep.rows.back().mean_gap) << ", mean f(gap) "
            << mkv::format_double(rep.rows.back().mean_f_gap) << "\nwrote " << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_rates(std::size_t d, double q, double eta, double fprime0, std::optional<double> eps1,
              std::optional<double> eps2) {
  nlohmann::json j = {
      {"distribution_dependent", mkv::rate_bound_json(mkv::rate_bound_distribution(d, q))},
      {"path_dependent", mkv::rate_bound_json(mkv::rate_bound_path(d, q, eta, fprime0))},
  };
  if (eps1 || eps2)
    j["weighted"] = mkv::rate_bound_json(mkv::rate_bound_weighted(d, q, eps1.value_or(1.0), eps2.value_or(1.0)));
  if (fprime0 > 0.0) {
    const auto k = mkv::contraction_constants(1.0, fprime0, eta);
    j["c"] = k.c;
    j["c_eta"] = k.c_eta;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-measure approximation for McKean-Vlasov SDEs via self-interacting diffusions"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::string> run_out, run_preset;
  std::optional<std::uint64_t> run_seed;
  std::optional<unsigned> run_threads;
  bool save_trajectories = false;
  auto* run = app.add_subcommand("run", "Simulate a configured sweep and write curves, report and figure");
  run->add_option("--config", run_config, "Experiment JSON")->required();
  run->add_option("--out", run_out, "Output directory (overrides config)");
  run->add_option("--seed", run_seed, "Master seed (overrides config)");
  run->add_option("--threads", run_threads, "Worker threads, 0 = all cores (output does not depend on it)");
  run->add_option("--preset", run_preset, "desk (N=200, 2e4 steps) or paper (N=1000, 5e4 steps)")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_flag("--save-trajectories", save_trajectories, "Also write trajectories_<K>.bin");

  std::string cpl_config;
  std::optional<std::string> cpl_out;
  auto* cpl = app.add_subcommand("coupling", "Reflection-coupling decay diagnostic");
  cpl->add_option("--config", cpl_config, "Coupling JSON")->required();
  cpl->add_option("--out", cpl_out, "Output directory (overrides config)");

  std::size_t d = 1;
  double q = 4.0, eta = 0.0, fprime0 = 0.0;
  std::optional<double> eps1, eps2;
  auto* rates = app.add_subcommand("rates", "Evaluate the theoretical rate bounds");
  rates->add_option("--d", d, "Dimension")->required();
  rates->add_option("--q", q, "Moment order q > 1")->required();
  rates->add_option("--eta", eta, "Interaction constant")->required();
  rates->add_option("--fprime0", fprime0, "f'(0) of the auxiliary function")->required();
  rates->add_option("--eps1", eps1, "Weighted bound: epsilon_1");
  rates->add_option("--eps2", eps2, "Weighted bound: epsilon_2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, run_out, run_seed, run_threads, run_preset, save_trajectories);
    if (*cpl) return cmd_coupling(cpl_config, cpl_out);
    if (*rates) return cmd_rates(d, q, eta, fprime0, eps1, eps2);
  } catch (const mkv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mkv::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mkv::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mkv::RangeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mkv::Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 1;
}
