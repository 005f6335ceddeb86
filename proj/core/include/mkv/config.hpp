#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mkv/integrator.hpp"
#include "mkv/measures.hpp"
#include "mkv/model.hpp"

namespace mkv {

struct CheckpointSpec {
  enum class Mode { geometric, linear, steps };
  Mode mode = Mode::geometric;
  std::size_t count = 25;    // geometric
  std::size_t every = 100;   // linear
  std::vector<std::size_t> steps;  // explicit

  std::vector<std::size_t> resolve(std::size_t n_steps) const;
};

struct SweepSpec {
  std::string parameter = "K";  // numeric field of the model object
  std::vector<double> values;
};

struct ExperimentConfig {
  nlohmann::json model;
  SweepSpec sweep;
  SchemeConfig scheme;
  WeightFamily weights = WeightFamily::lebesgue();             // simulation family w
  WeightFamily evaluation_weights = WeightFamily::lebesgue();  // evaluation family w-bar
  CheckpointSpec checkpoints;
  std::string reference = "stationary";
  std::filesystem::path out_dir = "mkv_out";
  std::string preset;  // "", "desk" or "paper"
  double q = 4.0;             // declared moment order
  double epsilon1 = 0.05;     // Pi_1 probe exponent
  double epsilon2 = 0.5;      // Pi_2 probe exponent
  std::optional<double> aux_r_max;
  std::size_t aux_grid = 256;
  std::size_t dissipativity_samples = 2000;
  std::size_t weak_interaction_samples = 2000;
  bool save_trajectories = false;

  // Model JSON of sweep entry i.
  nlohmann::json entry_model(std::size_t i) const;
};

// Sets n_paths and n_steps: desk = (200, 2e4), paper = (1000, 5e4).
void apply_preset(ExperimentConfig& cfg, const std::string& preset);

// Every error is a ConfigError naming the field.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& file);

SchemeConfig parse_scheme(const nlohmann::json& j, const std::string& field);
WeightFamily parse_weights(const nlohmann::json& j, const std::string& field);
InitialLaw parse_initial(const nlohmann::json& j, const std::string& field);
nlohmann::json weights_json(const WeightFamily& w);

struct CouplingExperimentConfig {
  nlohmann::json model;
  std::string frozen = "stationary";  // "stationary" or "dirac"
  std::vector<double> frozen_point;   // for "dirac"
  CouplingConfig coupling;
  std::vector<double> x0;
  std::size_t checkpoint_every = 10;
  std::optional<double> aux_r_max;
  std::size_t aux_grid = 256;
  std::filesystem::path out_dir = "mkv_coupling";
};

CouplingExperimentConfig parse_coupling_config(const nlohmann::json& j);

}  // namespace mkv
