#include "mkv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "mkv/errors.hpp"
#include "mkv/metrics.hpp"
#include "mkv/rng.hpp"

namespace mkv {

// ---------------------------------------------------------------------------
// DriftModel

DriftModel DriftModel::general(std::size_t dim, MeasureDrift drift, Kappa kappa,
                               std::optional<double> truncation, double eta) {
  if (dim == 0) throw DimensionError("drift model dimension must be positive");
  if (!drift || !kappa) throw ConfigError("drift model needs a drift and a kappa profile");
  if (!(eta >= 0.0)) throw DomainError("eta must be nonnegative");
  if (truncation && !(*truncation > 0.0)) throw DomainError("truncation level must be positive");
  DriftModel m;
  m.dim_ = dim;
  m.measure_drift_ = std::move(drift);
  m.kappa_ = std::move(kappa);
  m.truncation_ = truncation;
  m.eta_ = eta;
  return m;
}

DriftModel DriftModel::mean_field(std::size_t dim, MeanDrift drift, Kappa kappa,
                                  std::optional<double> truncation, double eta) {
  if (!drift) throw ConfigError("drift model needs a drift");
  auto measure_drift = [drift](std::span<const double> x, const WeightedEmpiricalMeasure& mu,
                               std::span<double> out) { drift(x, mu.mean(), out); };
  DriftModel m = general(dim, measure_drift, std::move(kappa), truncation, eta);
  m.mean_drift_ = std::move(drift);
  return m;
}

void DriftModel::drift(std::span<const double> x, const WeightedEmpiricalMeasure& mu, std::span<double> out) const {
  if (x.size() != dim_ || out.size() != dim_ || mu.dim() != dim_) throw DimensionError("drift: dimension mismatch");
  measure_drift_(x, mu, out);
}

std::vector<double> DriftModel::drift(std::span<const double> x, const WeightedEmpiricalMeasure& mu) const {
  std::vector<double> out(dim_);
  drift(x, mu, out);
  return out;
}

void DriftModel::drift_from_mean(std::span<const double> x, std::span<const double> mean,
                                 std::span<double> out) const {
  if (!mean_drift_) throw ConfigError("drift model does not factor through the mean");
  mean_drift_(x, mean, out);
}

DriftModel DriftModel::with_truncation(std::optional<double> level) const {
  if (level && !(*level > 0.0)) throw DomainError("truncation level must be positive");
  DriftModel copy = *this;
  copy.truncation_ = level;
  return copy;
}

double default_truncation_cw(double beta) { return 8.0 * beta; }

DriftModel curie_weiss_model(const CurieWeissParams& params, std::optional<double> truncation) {
  if (!(params.beta > 0.0)) throw DomainError("Curie-Weiss beta must be positive");
  if (!(params.K >= 0.0)) throw DomainError("Curie-Weiss K must be nonnegative");
  const double beta = params.beta, coupling = params.beta * params.K;
  auto drift = [beta, coupling](std::span<const double> x, std::span<const double> mean, std::span<double> out) {
    const double z = x[0];
    out[0] = -beta * (z * z * z - z) + coupling * mean[0];
  };
  auto kappa = [beta](double r) { return beta * (r * r / 4.0 - 1.0); };
  return DriftModel::mean_field(1, drift, kappa, truncation, coupling);
}

namespace {

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

DriftModel polynomial_model(const PolynomialModelSpec& spec) {
  if (spec.kappa_coefficients.empty()) throw ConfigError("polynomial model needs kappa coefficients");
  const auto coeffs = spec.drift_coefficients;
  const double coupling = spec.mean_coupling;
  auto drift = [coeffs, coupling](std::span<const double> x, std::span<const double> mean, std::span<double> out) {
    out[0] = horner(coeffs, x[0]) + coupling * mean[0];
  };
  const auto kc = spec.kappa_coefficients;
  auto kappa = [kc](double r) { return horner(kc, r); };
  return DriftModel::mean_field(1, drift, kappa, spec.truncation, spec.eta.value_or(std::abs(coupling)));
}

double kappa_eff(const DriftModel& model, double r) {
  if (!(r > 0.0)) throw DomainError("kappa_eff needs r > 0, got " + std::to_string(r));
  const double k = model.kappa(r);
  return model.truncation() ? std::min(k, *model.truncation()) : k;
}

KappaProfileCheck check_kappa_profile(const DriftModel& model, std::span<const double> grid, double tol) {
  if (grid.empty()) throw DomainError("empty grid");
  KappaProfileCheck out{true, true};
  double prev = kappa_eff(model, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double k = kappa_eff(model, grid[i]);
    if (k < prev) out.nondecreasing = false;
    prev = k;
  }
  out.vanishes_at_zero = std::abs(grid[0] * kappa_eff(model, grid[0])) <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Assumption checkers

namespace {

double sampler_uniform(std::uint64_t seed, std::size_t index, std::uint32_t& slot) {
  return uniform01(seed, index, slot++, NoiseChannel::sampler);
}

std::vector<double> sample_box(std::uint64_t seed, std::size_t index, std::uint32_t& slot, std::size_t n,
                               double box) {
  std::vector<double> v(n);
  for (auto& x : v) x = box * (2.0 * sampler_uniform(seed, index, slot) - 1.0);
  return v;
}

std::size_t sample_count(std::uint64_t seed, std::size_t index, std::uint32_t& slot, std::size_t max_atoms) {
  const double u = sampler_uniform(seed, index, slot);
  return std::min<std::size_t>(max_atoms, 1 + static_cast<std::size_t>(u * static_cast<double>(max_atoms)));
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

AssumptionSampler uniform_box_sampler(std::size_t dim, std::uint64_t seed, double box, std::size_t max_atoms) {
  if (dim == 0 || max_atoms == 0 || !(box > 0.0)) throw DomainError("uniform_box_sampler: invalid arguments");
  return [=](std::size_t index) {
    std::uint32_t slot = 0;
    auto x = sample_box(seed, index, slot, dim, box);
    auto y = sample_box(seed, index, slot, dim, box);
    const std::size_t n = sample_count(seed, index, slot, max_atoms);
    auto atoms = sample_box(seed, index, slot, n * dim, box);
    return AssumptionSample{std::move(x), std::move(y), WeightedEmpiricalMeasure::uniform(dim, std::move(atoms))};
  };
}

DissipativityReport check_dissipativity(const DriftModel& model, const AssumptionSampler& sampler,
                                        std::size_t n_samples) {
  if (n_samples == 0) throw DomainError("check_dissipativity needs n_samples >= 1");
  const std::size_t d = model.dim();
  DissipativityReport report{-std::numeric_limits<double>::infinity(), {}, {}, n_samples};
  std::vector<double> bx(d), by(d), diff(d);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto s = sampler(i);
    model.drift(s.x, s.mu, bx);
    model.drift(s.y, s.mu, by);
    double inner = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      diff[j] = s.x[j] - s.y[j];
      inner += diff[j] * (bx[j] - by[j]);
    }
    const double r = norm(diff);
    const double violation = r > 0.0 ? inner + kappa_eff(model, r) * r * r : inner;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_x = s.x;
      report.worst_y = s.y;
    }
  }
  return report;
}

namespace {

double measure_distance(const WeightedEmpiricalMeasure& mu, const WeightedEmpiricalMeasure& nu) {
  if (mu.dim() == 1) return w1_1d(mu, nu);
  return w1_assignment_oracle(mu, nu);
}

}  // namespace

WeakInteractionReport check_weak_interaction(const DriftModel& model, std::span<const WeakInteractionSample> samples) {
  const std::size_t d = model.dim();
  WeakInteractionReport report{0.0, model.eta(), 0};
  std::vector<double> bm(d), bn(d), diff(d);
  for (const auto& s : samples) {
    const double w = measure_distance(s.mu, s.nu);
    if (!(w > 0.0)) continue;
    model.drift(s.x, s.mu, bm);
    model.drift(s.x, s.nu, bn);
    for (std::size_t j = 0; j < d; ++j) diff[j] = bm[j] - bn[j];
    report.eta_hat = std::max(report.eta_hat, norm(diff) / w);
    ++report.used_samples;
  }
  if (report.used_samples == 0)
    throw EstimationError("check_weak_interaction: every sampled pair had W1(mu, nu) = 0");
  return report;
}

WeakInteractionReport check_weak_interaction(const DriftModel& model, std::size_t n_samples, std::uint64_t seed,
                                             double box, std::size_t max_atoms) {
  if (n_samples == 0) throw DomainError("check_weak_interaction needs n_samples >= 1");
  const std::size_t d = model.dim();
  std::vector<WeakInteractionSample> samples;
  samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::uint32_t slot = 0;
    auto x = sample_box(seed, i, slot, d, box);
    const std::size_t n_mu = sample_count(seed, i, slot, max_atoms);
    // The multi-dimensional distance oracle needs equal atom counts.
    const std::size_t n_nu = d == 1 ? sample_count(seed, i, slot, max_atoms) : n_mu;
    auto a = sample_box(seed, i, slot, n_mu * d, box);
    auto b = sample_box(seed, i, slot, n_nu * d, box);
    samples.push_back({std::move(x), WeightedEmpiricalMeasure::uniform(d, std::move(a)),
                       WeightedEmpiricalMeasure::uniform(d, std::move(b))});
  }
  return check_weak_interaction(model, samples);
}

// ---------------------------------------------------------------------------
// Auxiliary function

AuxFunction::AuxFunction(std::vector<double> grid, std::vector<double> f, std::vector<double> fprime,
                         std::vector<double> fsecond, double kappa_inf)
    : grid_(std::move(grid)), f_(std::move(f)), fprime_(std::move(fprime)), fsecond_(std::move(fsecond)),
      kappa_inf_(kappa_inf) {
  if (grid_.size() < 2 || f_.size() != grid_.size() || fprime_.size() != grid_.size() ||
      fsecond_.size() != grid_.size())
    throw DimensionError("aux function: table sizes disagree");
}

double AuxFunction::operator()(double r) const {
  if (r < 0.0) throw DomainError("aux function evaluated at negative radius");
  if (r >= grid_.back()) return f_.back() + fprime_.back() * (r - grid_.back());
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double h = grid_[i + 1] - grid_[i];
  const double u = (r - grid_[i]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * f_[i] + h10 * h * fprime_[i] + h01 * f_[i + 1] + h11 * h * fprime_[i + 1];
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

template <class F>
double integrate_checked(const F& f, double a, double b, double tol, const char* what) {
  double err = 0.0;
  // Boost's adaptive error estimate is dominated by roundoff on very short
  // intervals, where one Kronrod panel is already exact to machine precision.
  const unsigned depth = b - a <= 1e-6 * (1.0 + std::abs(a)) ? 0 : 8;
  const double value = Kronrod::integrate(f, a, b, depth, tol, &err);
  if (!std::isfinite(value) || err > 1e-6 * std::abs(value) + 1e-12)
    throw NumericalError(std::string("aux function: quadrature did not converge (") + what + ")");
  return value;
}

// Splits [a, b] at the kink of kappa^L so each piece is smooth.
template <class F>
double integrate_split(const F& f, double a, double b, double kink, double tol, const char* what) {
  const double guard = 1e-12 * (1.0 + std::abs(kink));
  if (kink > a + guard && kink < b - guard)
    return integrate_checked(f, a, kink, tol, what) + integrate_checked(f, kink, b, tol, what);
  return integrate_checked(f, a, b, tol, what);
}

}  // namespace

double truncation_radius(const DriftModel::Kappa& kappa, double level, double fallback) {
  double lo = 1e-9, hi = 1e3;
  if (kappa(lo) >= level || kappa(hi) < level) return fallback;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kappa(mid) >= level ? hi : lo) = mid;
  }
  return hi;
}

AuxFunction build_aux_function(const DriftModel::Kappa& kappa, std::optional<double> truncation,
                               const AuxOptions& options) {
  if (!truncation) throw ConfigError("aux function: truncation level L is required (kappa_inf must be finite)");
  const double L = *truncation;
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("aux function: truncation level must be positive");
  if (!(options.r_max > 0.0)) throw ConfigError("aux function: r_max must be positive");
  if (options.grid_size < 16) throw ConfigError("aux function: grid size must be at least 16");
  const double tol = options.rel_tol;

  const auto kappa_l = [&](double t) { return t > 0.0 ? std::min(kappa(t), L) : std::min(kappa(1e-300), L); };
  const auto rate = [&](double t) { return t > 0.0 ? t * kappa_l(t) : 0.0; };

  // Panel width tracks the Gaussian tail scale exp(-L s^2 / 4).
  const double panel = 0.5 * std::min(1.0, 1.0 / std::sqrt(L));
  const double kink = truncation_radius(kappa, L, std::numeric_limits<double>::infinity());

  const auto fprime_at = [&](double r) {
    double accumulated = 0.0;  // int_r^a tau kappa^L(tau) dtau
    double total = 0.0;
    double gmax = r;
    for (std::size_t j = 0;; ++j) {
      if (j > 200000) throw NumericalError("aux function: outer integral did not reach its tail");
      const double a = r + static_cast<double>(j) * panel;
      const double b = a + panel;
      const auto integrand = [&](double s) {
        const double inner = s > a ? integrate_split(rate, a, s, kink, tol, "inner") : 0.0;
        return s * std::exp(-0.5 * (accumulated + inner));
      };
      const double piece = integrate_split(integrand, a, b, kink, tol, "outer");
      total += piece;
      accumulated += integrate_split(rate, a, b, kink, tol, "inner");
      const double gb = b * std::exp(-0.5 * accumulated);
      if (!std::isfinite(gb) || !std::isfinite(total)) throw NumericalError("aux function: integrand overflow");
      gmax = std::max(gmax, gb);
      if (kappa_l(b) > 0.0 && gb < 1e-16 * gmax && piece <= 1e-17 * total) break;
    }
    return 0.5 * total;
  };

  const std::size_t m = options.grid_size;
  std::vector<double> grid(m), f(m), fp(m), fpp(m);
  const double h = options.r_max / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = i + 1 == m ? options.r_max : static_cast<double>(i) * h;
    fp[i] = fprime_at(grid[i]);
    fpp[i] = grid[i] > 0.0 ? 0.5 * (grid[i] * kappa_l(grid[i]) * fp[i] - grid[i]) : 0.0;
  }
  // Trapezoid with endpoint derivative correction (exact for cubics).
  f[0] = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double step = grid[i + 1] - grid[i];
    f[i + 1] = f[i] + 0.5 * step * (fp[i] + fp[i + 1]) + step * step / 12.0 * (fpp[i] - fpp[i + 1]);
  }
  return AuxFunction(std::move(grid), std::move(f), std::move(fp), std::move(fpp), L);
}

AuxFunction build_aux_function(const DriftModel& model, const AuxOptions& options) {
  return build_aux_function(model.kappa_function(), model.truncation(), options);
}

AuxInvariantReport check_aux_invariants(const AuxFunction& aux, const DriftModel::Kappa& kappa,
                                        std::optional<double> truncation, double tol) {
  const auto& r = aux.grid();
  const auto& f = aux.f();
  const auto& fp = aux.fprime();
  const auto& fpp = aux.fsecond();
  const double L = truncation.value_or(std::numeric_limits<double>::infinity());
  const auto kappa_l = [&](double t) { return std::min(kappa(t), L); };
  const std::size_t m = r.size();

  AuxInvariantReport rep{f[0] == 0.0, true, true, true, 0.0, 0.0};
  for (std::size_t i = 0; i < m; ++i) {
    if (!(fp[i] > 0.0)) rep.fprime_positive = false;
    if (fpp[i] > tol) rep.concave = false;
    if (i > 0) {
      const double ratio = f[i] / r[i];
      if (ratio < (1.0 - 1e-9) / aux.kappa_inf() || ratio > aux.fprime0() * (1.0 + 1e-9)) rep.bounds_hold = false;
    }
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double res = std::abs(2.0 * fpp[i] - r[i] * kappa_l(r[i]) * fp[i] + r[i]) / (1.0 + r[i]);
    rep.max_ode_residual = std::max(rep.max_ode_residual, res);
  }
  for (std::size_t i = 2; i + 2 < m; ++i) {
    const double h = r[i + 1] - r[i];
    const double fd = (-fp[i + 2] + 8.0 * fp[i + 1] - 8.0 * fp[i - 1] + fp[i - 2]) / (12.0 * h);
    const double res = std::abs(2.0 * fd - r[i] * kappa_l(r[i]) * fp[i] + r[i]) / (1.0 + r[i]);
    rep.max_fd_residual = std::max(rep.max_fd_residual, res);
  }
  return rep;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double weak_interaction_threshold_cw(double beta) {
  if (!(beta > 0.0)) throw DomainError("weak_interaction_threshold_cw needs beta > 0");
  return 1.0 / (std::sqrt(2.0 * std::numbers::pi * beta * std::exp(beta)) * normal_cdf(std::sqrt(beta)));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

double number_field(const nlohmann::json& j, const std::string& field, const char* key,
                    std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw_config(field + "." + key, "missing");
  }
  if (!j.at(key).is_number()) throw_config(field + "." + key, "expected a number");
  return j.at(key).get<double>();
}

std::vector<double> number_array(const nlohmann::json& j, const std::string& field, const char* key) {
  if (!j.contains(key)) throw_config(field + "." + key, "missing");
  const auto& a = j.at(key);
  if (!a.is_array() || a.empty()) throw_config(field + "." + key, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw_config(field + "." + key, "expected a nonempty array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::optional<double> truncation_field(const nlohmann::json& j, const std::string& field,
                                       std::optional<double> fallback) {
  if (!j.contains("truncation_L")) return fallback;
  const auto& v = j.at("truncation_L");
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "none")) return std::nullopt;
  if (!v.is_number() || !(v.get<double>() > 0.0))
    throw_config(field + ".truncation_L", "expected a positive number or \"none\"");
  return v.get<double>();
}

}  // namespace

DriftModel model_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw_config(field, "expected an object");
  if (!j.contains("type") || !j.at("type").is_string()) throw_config(field + ".type", "missing or not a string");
  const auto type = j.at("type").get<std::string>();
  DriftModel model = [&] {
    if (type == "curie_weiss") {
      CurieWeissParams p;
      p.beta = number_field(j, field, "beta", 1.0);
      p.K = number_field(j, field, "K");
      if (!(p.beta > 0.0)) throw_config(field + ".beta", "must be positive");
      if (!(p.K >= 0.0)) throw_config(field + ".K", "must be nonnegative");
      return curie_weiss_model(p, truncation_field(j, field, default_truncation_cw(p.beta)));
    }
    if (type == "custom_polynomial_1d") {
      PolynomialModelSpec spec;
      spec.drift_coefficients = number_array(j, field, "drift_coefficients");
      spec.kappa_coefficients = number_array(j, field, "kappa_coefficients");
      spec.mean_coupling = number_field(j, field, "mean_coupling", 0.0);
      spec.truncation = truncation_field(j, field, std::nullopt);
      if (j.contains("eta")) {
        spec.eta = number_field(j, field, "eta");
        if (!(*spec.eta >= 0.0)) throw_config(field + ".eta", "must be nonnegative");
      }
      return polynomial_model(spec);
    }
    throw_config(field + ".type", "unknown model type \"" + type + "\"");
  }();
  if (j.contains("moment_order")) {
    model.moment_order = number_field(j, field, "moment_order");
    if (!(*model.moment_order > 1.0)) throw_config(field + ".moment_order", "must exceed 1");
  }
  if (j.contains("moment_bound")) model.moment_bound = number_field(j, field, "moment_bound");
  return model;
}

}  // namespace mkv
