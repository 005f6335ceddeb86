#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mkv/analysis.hpp"
#include "mkv/config.hpp"
#include "mkv/metrics.hpp"

namespace mkv {

// Reference stationary density of a model definition: Curie-Weiss p*, or for a
// 1-D polynomial drift sum a_i x^i the gradient Gibbs density exp(2 sum a_i x^{i+1}/(i+1)).
Density1D reference_density(const nlohmann::json& model);

struct EntryResult {
  std::string label;  // value of the sweep parameter, shortest round-trip form
  double value;
  std::vector<CurvePoint> curve;
  std::optional<LineFit> slope_last_half;
  std::optional<LineFit> slope_final_decade;
  RateBound rate_path;
  ContractionConstants contraction;
  bool dissipativity_passed;
  bool weak_interaction_passed;
  std::optional<bool> below_cw_threshold;
  bool pi1_admissible;
  bool pi2_bounded;
};

struct RunReport {
  nlohmann::json json;
  std::vector<EntryResult> entries;
};

// Runs every sweep entry and writes curve_<label>.csv, report.json and
// figure.svg into cfg.out_dir. Output bytes depend only on the configuration.
RunReport run_experiment(const ExperimentConfig& cfg);

// Header step,t,mean_w1,stderr,n_paths; values in shortest round-trip form.
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& file);
std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& file);

struct CouplingRow {
  std::size_t step;
  double t;
  double mean_gap;
  double mean_f_gap;
  double envelope;
};

struct CouplingReport {
  std::vector<CouplingRow> rows;
  ContractionConstants constants;
  nlohmann::json json;
};

// Markov-vs-Markov reflection coupling with the model's drift frozen at a
// measure; writes coupling.csv (step,t,mean_gap,mean_f_gap,envelope) and
// coupling.json into cfg.out_dir.
CouplingReport run_coupling_diagnostic(const CouplingExperimentConfig& cfg);

}  // namespace mkv
