#include "mkv/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mkv/errors.hpp"
#include "mkv/format.hpp"
#include "mkv/integrator.hpp"
#include "mkv/svg.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

using nlohmann::json;

Density1D reference_density(const json& model) {
  const auto type = model.value("type", std::string());
  if (type == "curie_weiss") {
    CurieWeissParams p;
    p.beta = model.value("beta", 1.0);
    p.K = model.value("K", 0.0);
    return stationary_density_cw(p);
  }
  if (type == "custom_polynomial_1d") {
    std::vector<double> a = model.at("drift_coefficients").get<std::vector<double>>();
    return Density1D([a](double x) {
      double acc = 0.0, power = x;
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * power / static_cast<double>(i + 1);
        power *= x;
      }
      return 2.0 * acc;
    });
  }
  throw_config("model.type", "no reference density for model type \"" + type + "\"");
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const std::optional<LineFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope}, {"intercept", fit->intercept}, {"r2", fit->r2}, {"n_points", fit->n_points}};
}

std::optional<LineFit> try_fit(const std::vector<double>& t, const std::vector<double>& v, std::size_t begin) {
  try {
    return fit_loglog_slope(t, v, begin, t.size());
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

json constants_json(const ContractionConstants& k) {
  return {{"D", k.D},       {"c", k.c},       {"c_eta", k.c_eta}, {"kappa_inf", k.kappa_inf},
          {"fprime0", k.fprime0}, {"eta", k.eta}, {"admissible", k.admissible}};
}

json initial_json(const InitialLaw& law) {
  switch (law.kind()) {
    case InitialLaw::Kind::point: return {{"type", "point"}, {"x", law.values()}};
    case InitialLaw::Kind::standard_normal: return {{"type", "standard_normal"}};
    case InitialLaw::Kind::samples: return {{"type", "samples"}, {"count", law.values().size()}};
  }
  return nullptr;
}

json scheme_json(const SchemeConfig& s) {
  return {{"dt", s.dt}, {"n_steps", s.n_steps}, {"n_paths", s.n_paths}, {"n0", s.n0},
          {"alpha", s.alpha}, {"initial", initial_json(s.initial)}};
}

json interpretation_notes() {
  return {
      {"recursion",
       "Z_{k+1} = Z_k + tame(b_k) dt + xi_k: the previous state is added (the printed recursion omits Z_k)"},
      {"occupation_simulation",
       "drift at step k uses the occupation measure of Z_0..Z_k, weights 1/(k+1) for lebesgue"},
      {"occupation_evaluation",
       "W1 at checkpoint t = k dt uses E_t with state j carrying w_t([t_j, t_{j+1}]/t) (left-endpoint rule)"},
      {"stderr", "per-checkpoint standard error across paths; correlation between checkpoints is ignored"},
      {"rate_bounds", "rate bounds are open upper ends of the admissible range; empirical slopes may exceed them"},
      {"common_random_numbers", "every sweep entry uses the same master seed and path streams"},
  };
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("out: cannot write " + file.string());
  out << text;
  if (!out) throw ConfigError("out: failed writing " + file.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("out: cannot create " + dir.string() + ": " + ec.message());
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) { return seed ^ (salt * 0x9E3779B97F4A7C15ull); }

}  // namespace

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& file) {
  std::ostringstream s;
  s << "step,t,mean_w1,stderr,n_paths\n";
  for (const auto& p : curve)
    s << p.step << ',' << format_double(p.t) << ',' << format_double(p.mean_w1) << ','
      << format_double(p.stderr_w1) << ',' << p.n_paths << '\n';
  write_text(file, s.str());
}

std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "step,t,mean_w1,stderr,n_paths") throw ConfigError(file.string() + ": unexpected header");
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ConfigError(file.string() + ": malformed row \"" + line + "\"");
    out.push_back({static_cast<std::size_t>(std::stoull(cells[0])), parse_double(cells[1]), parse_double(cells[2]),
                   parse_double(cells[3]), static_cast<std::size_t>(std::stoull(cells[4]))});
  }
  return out;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const auto probes = default_probe_times();
  const auto checkpoints = cfg.checkpoints.resolve(cfg.scheme.n_steps);

  RunReport report;
  json entries = json::array();
  std::vector<SvgCurve> svg_curves;

  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
    const json model_json = cfg.entry_model(i);
    EntryResult entry{format_double(cfg.sweep.values[i]), cfg.sweep.values[i], {}, {}, {}, {}, {}, false, false,
                      {}, false, false};
    const std::string context = "sweep entry " + cfg.sweep.parameter + "=" + entry.label + ": ";
    try {
      const DriftModel model = model_from_json(model_json);
      const std::size_t d = model.dim();

      const auto dis = check_dissipativity(model, uniform_box_sampler(d, derived_seed(cfg.scheme.seed, 1)),
                                           cfg.dissipativity_samples);
      const auto weak = check_weak_interaction(model, cfg.weak_interaction_samples, derived_seed(cfg.scheme.seed, 2));
      entry.dissipativity_passed = dis.passed();
      entry.weak_interaction_passed = weak.passed();

      AuxOptions aux_opt;
      aux_opt.grid_size = cfg.aux_grid;
      if (!model.truncation()) throw_config("model.truncation_L", "required to build the auxiliary function");
      aux_opt.r_max = cfg.aux_r_max.value_or(truncation_radius(model.kappa_function(), *model.truncation()));
      const AuxFunction aux = build_aux_function(model, aux_opt);
      entry.contraction = contraction_constants(aux, model.eta());

      json threshold = nullptr;
      if (model_json.at("type") == "curie_weiss") {
        const double beta = model_json.value("beta", 1.0);
        const double K = model_json.at("K").get<double>();
        const double thr = weak_interaction_threshold_cw(beta);
        entry.below_cw_threshold = K < thr;
        threshold = {{"threshold", thr}, {"K", K}, {"below", K < thr}};
      }

      json pi1;
      if (model.eta() > 0.0) {
        const auto c = pi1_admissible(cfg.weights, cfg.epsilon1, model.eta(), aux.kappa_inf(), aux.fprime0(), probes);
        entry.pi1_admissible = c.admissible;
        pi1 = {{"epsilon", cfg.epsilon1}, {"admissible", c.admissible}, {"max_integral", finite_or_null(c.max_integral)},
               {"bound", c.bound}, {"margin", finite_or_null(c.margin)}};
      } else {
        entry.pi1_admissible = true;
        pi1 = {{"epsilon", cfg.epsilon1}, {"admissible", true}, {"bound", nullptr}, {"note", "eta = 0: no constraint"}};
      }
      const auto pi2 = pi2_bounded(cfg.evaluation_weights, cfg.epsilon2, probes);
      entry.pi2_bounded = pi2.bounded;

      entry.rate_path = rate_bound_path(d, cfg.q, model.eta(), aux.fprime0());
      const auto rate_dist = rate_bound_distribution(d, cfg.q);
      const auto rate_weighted = rate_bound_weighted(d, cfg.q, cfg.epsilon1, cfg.epsilon2);

      const TrajectorySet traj = simulate_self_interacting(model, cfg.weights, cfg.scheme);
      if (cfg.save_trajectories) write_trajectories_binary(traj, cfg.out_dir / ("trajectories_" + entry.label + ".bin"));
      const Density1D ref = reference_density(model_json);
      entry.curve = mean_w1_curve(traj, cfg.evaluation_weights, ref, checkpoints, cfg.scheme.threads);

      std::vector<double> ts, vs;
      for (const auto& p : entry.curve) {
        ts.push_back(p.t);
        vs.push_back(p.mean_w1);
      }
      entry.slope_last_half = try_fit(ts, vs, last_half_log_window(ts));
      entry.slope_final_decade = try_fit(ts, vs, final_decade_window(ts));

      const std::string csv = "curve_" + entry.label + ".csv";
      write_curve_csv(entry.curve, cfg.out_dir / csv);
      svg_curves.push_back({cfg.sweep.parameter + "=" + entry.label, ts, vs});

      json curve = json::array();
      for (const auto& p : entry.curve)
        curve.push_back({{"step", p.step}, {"t", p.t}, {"mean_w1", p.mean_w1}, {"stderr", p.stderr_w1}});

      entries.push_back({
          {"parameter", cfg.sweep.parameter},
          {"value", entry.value},
          {"model", model_json},
          {"curve_file", csv},
          {"curve", curve},
          {"final_mean_w1", entry.curve.back().mean_w1},
          {"slope_last_half_log", fit_json(entry.slope_last_half)},
          {"slope_final_decade", fit_json(entry.slope_final_decade)},
          {"rate_bounds",
           {{"path_dependent", rate_bound_json(entry.rate_path)},
            {"distribution_dependent", rate_bound_json(rate_dist)},
            {"weighted", rate_bound_json(rate_weighted)}}},
          {"contraction", constants_json(entry.contraction)},
          {"aux", {{"fprime0", aux.fprime0()}, {"kappa_inf", aux.kappa_inf()}, {"r_max", aux.r_max()},
                   {"grid_size", aux.grid().size()}}},
          {"admissibility",
           {{"dissipativity", {{"passed", dis.passed()}, {"max_violation", dis.max_violation},
                               {"n_samples", dis.n_samples}}},
            {"weak_interaction", {{"passed", weak.passed()}, {"eta_hat", weak.eta_hat},
                                  {"declared_eta", weak.declared_eta}, {"used_samples", weak.used_samples}}},
            {"curie_weiss_threshold", threshold},
            {"pi1", pi1},
            {"pi2", {{"epsilon", cfg.epsilon2}, {"bounded", pi2.bounded}}}}},
      });
    } catch (const SimulationError& e) {
      throw SimulationError(context + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(context + e.what());
    }
    report.entries.push_back(std::move(entry));
  }

  emit_svg_loglog(svg_curves, cfg.out_dir / "figure.svg",
                  {"mean W1 of the occupation measure to the stationary law", "t", "mean W1"});

  std::vector<std::size_t> steps(checkpoints.begin(), checkpoints.end());
  report.json = {
      {"model", cfg.model},
      {"sweep", {{"parameter", cfg.sweep.parameter}, {"values", cfg.sweep.values}}},
      {"scheme", scheme_json(cfg.scheme)},
      {"seed", cfg.scheme.seed},
      {"preset", cfg.preset.empty() ? json(nullptr) : json(cfg.preset)},
      {"weights", weights_json(cfg.weights)},
      {"evaluation_weights", weights_json(cfg.evaluation_weights)},
      {"checkpoints", steps},
      {"q", cfg.q},
      {"reference", cfg.reference},
      {"metadata", {{"notes", interpretation_notes()}, {"version", "0.1.0"}}},
      {"entries", entries},
  };
  write_text(cfg.out_dir / "report.json", report.json.dump(2) + "\n");
  return report;
}

CouplingReport run_coupling_diagnostic(const CouplingExperimentConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const DriftModel model = model_from_json(cfg.model);
  const std::size_t d = model.dim();

  std::optional<WeightedEmpiricalMeasure> frozen;
  if (cfg.frozen == "dirac") {
    frozen = WeightedEmpiricalMeasure::dirac(cfg.frozen_point);
  } else {
    if (d != 1) throw_config("frozen", "\"stationary\" needs a one-dimensional model");
    const Density1D ref = reference_density(cfg.model);
    frozen = WeightedEmpiricalMeasure::uniform(1, ref.quantile_table());
  }

  if (!model.truncation()) throw_config("model.truncation_L", "required to build the auxiliary function");
  AuxOptions aux_opt;
  aux_opt.grid_size = cfg.aux_grid;
  aux_opt.r_max = cfg.aux_r_max.value_or(truncation_radius(model.kappa_function(), *model.truncation()));
  const AuxFunction aux = build_aux_function(model, aux_opt);

  const TimeDrift drift = frozen_drift(model, *frozen);
  const CouplingResult res = simulate_reflection_coupling(d, drift, drift, cfg.coupling, &aux);

  CouplingReport out;
  out.constants = contraction_constants(aux, model.eta());
  const double w1_initial = res.mean_gap.front();
  std::ostringstream csv;
  csv << "step,t,mean_gap,mean_f_gap,envelope\n";
  const std::size_t n_steps = cfg.coupling.scheme.n_steps;
  for (std::size_t k = 0; k <= n_steps; k += cfg.checkpoint_every) {
    const double t = static_cast<double>(k) * cfg.coupling.scheme.dt;
    const CouplingRow row{k, t, res.mean_gap[k], res.mean_f_gap[k], gronwall_envelope(out.constants, w1_initial, t)};
    out.rows.push_back(row);
    csv << row.step << ',' << format_double(row.t) << ',' << format_double(row.mean_gap) << ','
        << format_double(row.mean_f_gap) << ',' << format_double(row.envelope) << '\n';
  }
  write_text(cfg.out_dir / "coupling.csv", csv.str());

  out.json = {
      {"model", cfg.model},
      {"frozen", cfg.frozen},
      {"delta", cfg.coupling.delta},
      {"meeting", cfg.coupling.meeting == MeetingRule::maximal ? "maximal" : "none"},
      {"scheme", scheme_json(cfg.coupling.scheme)},
      {"seed", cfg.coupling.scheme.seed},
      {"x0", cfg.x0},
      {"y0", cfg.coupling.initial_y},
      {"contraction", constants_json(out.constants)},
      {"envelope", "kappa_inf f'(0)^2 E|Delta_0| exp(-c_eta t), rho(delta) taken as 0"},
      {"final_mean_gap", res.mean_gap.back()},
      {"final_mean_f_gap", res.mean_f_gap.back()},
  };
  write_text(cfg.out_dir / "coupling.json", out.json.dump(2) + "\n");
  return out;
}

}  // namespace mkv
