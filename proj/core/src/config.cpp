#include "mkv/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mkv/errors.hpp"

namespace mkv {

using nlohmann::json;

namespace {

std::string join(const std::string& field, const char* key) { return field.empty() ? key : field + "." + key; }

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& field, const char* key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) throw_config(join(field, key), "expected a number");
  return v->get<double>();
}

std::size_t get_count(const json& j, const std::string& field, const char* key, std::size_t fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) throw_config(join(field, key), "expected a nonnegative integer");
  const double x = v->get<double>();
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e15) throw_config(join(field, key), "expected a nonnegative integer");
  return static_cast<std::size_t>(x);
}

std::string get_string(const json& j, const std::string& field, const char* key, const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) throw_config(join(field, key), "expected a string");
  return v->get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& field, const char* key) {
  const json* v = find(j, key);
  if (!v) throw_config(join(field, key), "missing");
  if (!v->is_array()) throw_config(join(field, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw_config(join(field, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw_config(field, "expected an object");
  return j;
}

}  // namespace

std::vector<std::size_t> CheckpointSpec::resolve(std::size_t n_steps) const {
  std::vector<std::size_t> out;
  switch (mode) {
    case Mode::geometric: {
      if (count < 2) throw_config("checkpoints.count", "must be at least 2");
      const double top = std::log(static_cast<double>(n_steps));
      for (std::size_t i = 0; i < count; ++i) {
        const double s = std::exp(top * static_cast<double>(i) / static_cast<double>(count - 1));
        const auto step = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(s)), 1, n_steps);
        if (out.empty() || step > out.back()) out.push_back(step);
      }
      if (out.back() != n_steps) out.push_back(n_steps);
      break;
    }
    case Mode::linear:
      if (every == 0) throw_config("checkpoints.every", "must be positive");
      for (std::size_t s = every; s <= n_steps; s += every) out.push_back(s);
      if (out.empty() || out.back() != n_steps) out.push_back(n_steps);
      break;
    case Mode::steps:
      out = steps;
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == 0 || out[i] > n_steps) throw_config("checkpoints.steps", "steps must lie in [1, n_steps]");
        if (i > 0 && out[i] <= out[i - 1]) throw_config("checkpoints.steps", "steps must be strictly increasing");
      }
      break;
  }
  if (out.empty()) throw_config("checkpoints", "schedule is empty");
  return out;
}

json ExperimentConfig::entry_model(std::size_t i) const {
  json m = model;
  m[sweep.parameter] = sweep.values.at(i);
  return m;
}

void apply_preset(ExperimentConfig& cfg, const std::string& preset) {
  if (preset == "desk") {
    cfg.scheme.n_paths = 200;
    cfg.scheme.n_steps = 20000;
  } else if (preset == "paper") {
    cfg.scheme.n_paths = 1000;
    cfg.scheme.n_steps = 50000;
  } else {
    throw_config("preset", "unknown preset \"" + preset + "\" (expected desk or paper)");
  }
  cfg.preset = preset;
}

InitialLaw parse_initial(const json& j, const std::string& field) {
  require_object(j, field);
  const auto type = get_string(j, field, "type", "standard_normal");
  if (type == "standard_normal") return InitialLaw::standard_normal();
  if (type == "point") return InitialLaw::point(get_vector(j, field, "x"));
  if (type == "samples") {
    const auto dim = get_count(j, field, "dim", 1);
    auto values = get_vector(j, field, "values");
    if (dim == 0 || values.empty() || values.size() % dim != 0)
      throw_config(join(field, "values"), "length must be a positive multiple of dim");
    return InitialLaw::samples(dim, std::move(values));
  }
  throw_config(join(field, "type"), "unknown initial law \"" + type + "\"");
}

SchemeConfig parse_scheme(const json& j, const std::string& field) {
  require_object(j, field);
  SchemeConfig s;
  s.dt = get_number(j, field, "dt", 0.1);
  s.n_steps = get_count(j, field, "n_steps", 50000);
  s.n_paths = get_count(j, field, "n_paths", 1000);
  s.n0 = get_number(j, field, "n0", 1e4);
  s.alpha = get_number(j, field, "alpha", 0.1);
  if (const json* init = find(j, "initial")) s.initial = parse_initial(*init, join(field, "initial"));
  else s.initial = InitialLaw::standard_normal();
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw_config(join(field, "dt"), "must be positive");
  if (s.n_steps == 0) throw_config(join(field, "n_steps"), "must be positive");
  if (s.n_paths == 0) throw_config(join(field, "n_paths"), "must be positive");
  if (!(s.n0 >= 1.0)) throw_config(join(field, "n0"), "must be at least 1");
  if (!(s.alpha > 0.0 && s.alpha <= 0.5)) throw_config(join(field, "alpha"), "must lie in (0, 0.5]");
  return s;
}

WeightFamily parse_weights(const json& j, const std::string& field) {
  require_object(j, field);
  // "type" is accepted as an alias of "kind".
  const auto type = get_string(j, field, find(j, "kind") ? "kind" : "type", "lebesgue");
  if (type == "lebesgue") return WeightFamily::lebesgue();
  if (type == "discrete") {
    const double tau = get_number(j, field, "tau", 0.0);
    if (!(tau > 0.0)) throw_config(join(field, "tau"), "must be positive");
    return WeightFamily::discrete(tau);
  }
  if (type == "power") {
    const double gamma = get_number(j, field, "gamma", -1.0);
    if (!(gamma >= 0.0)) throw_config(join(field, "gamma"), "must be nonnegative");
    return WeightFamily::power(gamma);
  }
  throw_config(join(field, "kind"), "unknown weight family \"" + type + "\"");
}

json weights_json(const WeightFamily& w) {
  switch (w.kind()) {
    case WeightFamily::Kind::lebesgue: return {{"kind", "lebesgue"}};
    case WeightFamily::Kind::discrete: return {{"kind", "discrete"}, {"tau", w.tau()}};
    case WeightFamily::Kind::power: return {{"kind", "power"}, {"gamma", w.gamma()}};
  }
  return {};
}

namespace {

CheckpointSpec parse_checkpoints(const json& j) {
  const std::string field = "checkpoints";
  require_object(j, field);
  CheckpointSpec c;
  const auto mode = get_string(j, field, "mode", find(j, "steps") ? "steps" : "geometric");
  if (mode == "geometric") {
    c.mode = CheckpointSpec::Mode::geometric;
    c.count = get_count(j, field, "count", 25);
  } else if (mode == "linear") {
    c.mode = CheckpointSpec::Mode::linear;
    c.every = get_count(j, field, "every", 100);
  } else if (mode == "steps") {
    c.mode = CheckpointSpec::Mode::steps;
    for (double s : get_vector(j, field, "steps")) {
      if (!(s >= 0.0) || s != std::floor(s)) throw_config("checkpoints.steps", "expected nonnegative integers");
      c.steps.push_back(static_cast<std::size_t>(s));
    }
  } else {
    throw_config("checkpoints.mode", "unknown mode \"" + mode + "\"");
  }
  return c;
}

void check_model(const json& model, const std::string& field) {
  // Validates eagerly so errors name the field before any simulation starts.
  (void)model_from_json(model, field);
}

std::optional<double> parse_aux(const json& j, std::size_t& grid) {
  std::optional<double> r_max;
  if (const json* aux = find(j, "aux")) {
    require_object(*aux, "aux");
    if (find(*aux, "r_max")) {
      r_max = get_number(*aux, "aux", "r_max", 0.0);
      if (!(*r_max > 0.0)) throw_config("aux.r_max", "must be positive");
    }
    grid = get_count(*aux, "aux", "grid_size", grid);
    if (grid < 16) throw_config("aux.grid_size", "must be at least 16");
  }
  return r_max;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  require_object(j, "config");
  ExperimentConfig cfg;
  const json* model = find(j, "model");
  if (!model) throw_config("model", "missing");
  cfg.model = *model;
  require_object(cfg.model, "model");

  if (const json* sweep = find(j, "sweep")) {
    require_object(*sweep, "sweep");
    cfg.sweep.parameter = get_string(*sweep, "sweep", "parameter", "K");
    cfg.sweep.values = get_vector(*sweep, "sweep", "values");
    if (cfg.sweep.values.empty()) throw_config("sweep.values", "must be nonempty");
  } else {
    if (!cfg.model.contains("K") || !cfg.model.at("K").is_number())
      throw_config("sweep", "missing (and model.K is not set)");
    cfg.sweep.values = {cfg.model.at("K").get<double>()};
  }
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i)
    check_model(cfg.entry_model(i), "model");

  cfg.scheme = parse_scheme(find(j, "scheme") ? j.at("scheme") : json::object(), "scheme");
  if (const json* w = find(j, "weights")) cfg.weights = parse_weights(*w, "weights");
  cfg.evaluation_weights = cfg.weights;
  if (const json* w = find(j, "evaluation_weights")) cfg.evaluation_weights = parse_weights(*w, "evaluation_weights");
  if (const json* c = find(j, "checkpoints")) cfg.checkpoints = parse_checkpoints(*c);
  cfg.reference = get_string(j, "", "reference", "stationary");
  if (cfg.reference != "stationary") throw_config("reference", "only \"stationary\" is supported");
  cfg.out_dir = get_string(j, "", "out", "mkv_out");
  cfg.q = get_number(j, "", "q", 4.0);
  if (!(cfg.q > 1.0)) throw_config("q", "must exceed 1");
  cfg.epsilon1 = get_number(j, "", "epsilon1", 0.05);
  cfg.epsilon2 = get_number(j, "", "epsilon2", 0.5);
  if (!(cfg.epsilon1 > 0.0 && cfg.epsilon1 <= 1.0)) throw_config("epsilon1", "must lie in (0, 1]");
  if (!(cfg.epsilon2 > 0.0 && cfg.epsilon2 <= 1.0)) throw_config("epsilon2", "must lie in (0, 1]");
  cfg.aux_r_max = parse_aux(j, cfg.aux_grid);
  cfg.dissipativity_samples = get_count(j, "", "dissipativity_samples", 2000);
  cfg.weak_interaction_samples = get_count(j, "", "weak_interaction_samples", 2000);
  if (cfg.dissipativity_samples == 0) throw_config("dissipativity_samples", "must be positive");
  if (cfg.weak_interaction_samples == 0) throw_config("weak_interaction_samples", "must be positive");

  cfg.scheme.seed = get_count(j, "", "seed", 0);
  cfg.scheme.threads = static_cast<unsigned>(get_count(j, "", "threads", 1));
  if (const json* p = find(j, "preset")) {
    if (!p->is_string()) throw_config("preset", "expected a string");
    apply_preset(cfg, p->get<std::string>());
  }
  if (const json* s = find(j, "save_trajectories")) {
    if (!s->is_boolean()) throw_config("save_trajectories", "expected a boolean");
    cfg.save_trajectories = s->get<bool>();
  }
  const auto check_grid = [&](const WeightFamily& w, const char* field) {
    if (w.kind() != WeightFamily::Kind::discrete) return;
    const double ratio = w.tau() / cfg.scheme.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0)
      throw_config(field, "must be a positive integer multiple of scheme.dt");
  };
  check_grid(cfg.weights, "weights.tau");
  check_grid(cfg.evaluation_weights, "evaluation_weights.tau");
  return cfg;
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw_config("config", "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw_config("config", std::string("invalid JSON: ") + e.what());
  }
}

CouplingExperimentConfig parse_coupling_config(const json& j) {
  require_object(j, "config");
  CouplingExperimentConfig cfg;
  const json* model = find(j, "model");
  if (!model) throw_config("model", "missing");
  cfg.model = *model;
  check_model(cfg.model, "model");
  const auto dim = model_from_json(cfg.model).dim();

  cfg.frozen = get_string(j, "", "frozen", "stationary");
  if (cfg.frozen == "dirac") {
    cfg.frozen_point = get_vector(j, "", "frozen_point");
    if (cfg.frozen_point.size() != dim) throw_config("frozen_point", "dimension does not match the model");
  } else if (cfg.frozen != "stationary") {
    throw_config("frozen", "expected \"stationary\" or \"dirac\"");
  }

  json scheme = find(j, "scheme") ? j.at("scheme") : json::object();
  require_object(scheme, "scheme");
  if (!scheme.contains("n_paths")) scheme["n_paths"] = 1000;
  if (!scheme.contains("n_steps")) scheme["n_steps"] = 1000;
  if (!scheme.contains("dt")) scheme["dt"] = 0.01;
  cfg.coupling.scheme = parse_scheme(scheme, "scheme");
  cfg.coupling.scheme.seed = get_count(j, "", "seed", 0);
  cfg.coupling.scheme.threads = static_cast<unsigned>(get_count(j, "", "threads", 1));

  cfg.coupling.delta = get_number(j, "", "delta", 0.01);
  if (!(cfg.coupling.delta > 0.0 && cfg.coupling.delta < 1.0)) throw_config("delta", "must lie in (0, 1)");
  cfg.x0 = get_vector(j, "", "x0");
  cfg.coupling.initial_y = get_vector(j, "", "y0");
  if (cfg.x0.size() != dim) throw_config("x0", "dimension does not match the model");
  if (cfg.coupling.initial_y.size() != dim) throw_config("y0", "dimension does not match the model");
  cfg.coupling.scheme.initial = InitialLaw::point(cfg.x0);
  const auto meeting = get_string(j, "", "meeting", "maximal");
  if (meeting == "maximal") cfg.coupling.meeting = MeetingRule::maximal;
  else if (meeting == "none") cfg.coupling.meeting = MeetingRule::none;
  else throw_config("meeting", "expected \"maximal\" or \"none\"");
  cfg.checkpoint_every = get_count(j, "", "checkpoint_every", 10);
  if (cfg.checkpoint_every == 0) throw_config("checkpoint_every", "must be positive");
  cfg.aux_r_max = parse_aux(j, cfg.aux_grid);
  cfg.out_dir = get_string(j, "", "out", "mkv_coupling");
  return cfg;
}

}  // namespace mkv
