#include "mkv/analysis.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "mkv/errors.hpp"

namespace mkv {

Density1D stationary_density_cw(const CurieWeissParams& params) {
  if (!(params.beta > 0.0)) throw DomainError("stationary density needs beta > 0");
  const double beta = params.beta;
  Density1D::Options opt;
  opt.center = 0.0;
  opt.scale = std::max(1.0, 1.0 / std::sqrt(beta));
  return Density1D([beta](double x) { return -2.0 * beta * (x * x * x * x / 4.0 - x * x / 2.0); }, opt);
}

namespace {

void check_dq(std::size_t d, double q) {
  if (d < 1) throw DomainError("rate bound needs d >= 1");
  if (!(q > 1.0)) throw DomainError("rate bound needs q > 1");
}

struct Term {
  const char* label;
  double value;
};

RateBound pick(std::initializer_list<Term> terms, std::map<std::string, double> inputs) {
  const Term* best = nullptr;
  for (const auto& t : terms)
    if (!best || t.value < best->value) best = &t;
  return {std::max(0.0, best->value), best->label, std::move(inputs)};
}

}  // namespace

RateBound rate_bound_distribution(std::size_t d, double q) {
  check_dq(d, q);
  const double m = 1.0 - 1.0 / q;
  return pick({{"dimension-term", m / static_cast<double>(d)}, {"half-term", m / 2.0}},
              {{"d", static_cast<double>(d)}, {"q", q}});
}

RateBound rate_bound_path(std::size_t d, double q, double eta, double fprime0) {
  check_dq(d, q);
  if (!(eta >= 0.0) || !(fprime0 >= 0.0)) throw DomainError("rate bound needs eta >= 0 and f'(0) >= 0");
  const double m = 1.0 - 1.0 / q;
  return pick({{"dimension-term", m / static_cast<double>(d)}, {"half-term", m / 2.0},
               {"interaction", 1.0 - eta * fprime0}},
              {{"d", static_cast<double>(d)}, {"q", q}, {"eta", eta}, {"fprime0", fprime0}});
}

RateBound rate_bound_weighted(std::size_t d, double q, double eps1, double eps2) {
  check_dq(d, q);
  if (!(eps1 > 0.0 && eps1 <= 1.0)) throw DomainError("rate bound needs eps1 in (0, 1]");
  if (!(eps2 > 0.0 && eps2 <= 1.0)) throw DomainError("rate bound needs eps2 in (0, 1]");
  const double m = 1.0 - 1.0 / q;
  return pick({{"epsilon1", eps1}, {"dimension-term", eps2 * m / static_cast<double>(d)},
               {"half-term", eps2 * m / 2.0}},
              {{"d", static_cast<double>(d)}, {"q", q}, {"epsilon1", eps1}, {"epsilon2", eps2}});
}

nlohmann::json rate_bound_json(const RateBound& bound) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [k, v] : bound.inputs) inputs[k] = v;
  return {{"epsilon_max", bound.epsilon_max}, {"binding", bound.binding}, {"inputs", inputs}};
}

double markov_rate_envelope(std::size_t d, double q, double t_hat) {
  check_dq(d, q);
  if (!(t_hat > std::numbers::e)) throw DomainError("markov_rate_envelope needs t_hat > e");
  const double lg = std::log(t_hat);
  const double m = 1.0 - 1.0 / q;
  double base;
  if (d == 1) {
    base = std::sqrt(lg / t_hat);
  } else if (d == 2) {
    base = lg / std::sqrt(t_hat);
  } else {
    const double dd = static_cast<double>(d);
    base = std::pow(lg, dd - 2.0 + 1.0 / dd) / std::pow(t_hat, 1.0 / dd);
  }
  return std::pow(base, m);
}

double markov_rate_envelope_at(std::size_t d, double q, double eps, double t) {
  if (!(eps > 0.0) || !(t > 0.0)) throw DomainError("markov_rate_envelope_at needs eps > 0 and t > 0");
  return markov_rate_envelope(d, q, std::pow(t, eps));
}

ContractionConstants contraction_constants(double kappa_inf, double fprime0, double eta) {
  if (!(kappa_inf > 0.0) || !(fprime0 > 0.0) || !(eta >= 0.0))
    throw DomainError("contraction constants need kappa_inf > 0, f'(0) > 0, eta >= 0");
  const double c = 1.0 / fprime0;
  return {kappa_inf * fprime0, c, c - eta, kappa_inf, fprime0, eta, c - eta > 0.0};
}

ContractionConstants contraction_constants(const AuxFunction& aux, double eta) {
  return contraction_constants(aux.kappa_inf(), aux.fprime0(), eta);
}

double gronwall_bound_distribution(const ContractionConstants& k, double w1_initial, double t) {
  if (!(t > 0.0)) throw DomainError("gronwall bound needs t > 0");
  const double slack = 1.0 - k.eta * k.fprime0;
  if (!(slack > 0.0)) throw DomainError("gronwall bound needs eta f'(0) < 1");
  return k.kappa_inf * k.kappa_inf * k.fprime0 * k.fprime0 * k.fprime0 * w1_initial / slack / t;
}

double gronwall_envelope(const ContractionConstants& k, double w1_initial, double t, double rho) {
  return k.fprime0 * rho + k.kappa_inf * k.fprime0 * k.fprime0 * w1_initial * std::exp(-k.c_eta * t);
}

namespace {

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit needs at least two distinct abscissae");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    sse += r * r;
  }
  const double r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return {slope, intercept, r2, n};
}

void check_series(std::span<const double> t, std::span<const double> value, std::size_t begin, std::size_t end) {
  if (t.size() != value.size()) throw DimensionError("fit: t and value lengths differ");
  if (end > t.size() || begin > end || end - begin < 3) throw DomainError("fit needs at least 3 points");
  for (std::size_t i = begin; i < end; ++i)
    if (!(value[i] > 0.0)) throw DomainError("fit needs positive values, got " + std::to_string(value[i]));
}

}  // namespace

LineFit fit_loglog_slope(std::span<const double> t, std::span<const double> value, std::size_t begin,
                         std::size_t end) {
  check_series(t, value, begin, end);
  std::vector<double> lx, ly;
  for (std::size_t i = begin; i < end; ++i) {
    if (!(t[i] > 0.0)) throw DomainError("log-log fit needs positive times");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  return least_squares(lx, ly);
}

LineFit fit_loglog_slope(std::span<const double> t, std::span<const double> value) {
  return fit_loglog_slope(t, value, 0, t.size());
}

LineFit fit_log_linear(std::span<const double> t, std::span<const double> value) {
  check_series(t, value, 0, t.size());
  std::vector<double> ly;
  for (double v : value) ly.push_back(std::log(v));
  return least_squares(t, ly);
}

std::size_t last_half_log_window(std::span<const double> t) {
  if (t.empty() || !(t.front() > 0.0)) throw DomainError("window needs positive times");
  const double mid = 0.5 * (std::log(t.front()) + std::log(t.back()));
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::log(t[i]) >= mid) return i;
  return t.size();
}

std::size_t final_decade_window(std::span<const double> t) {
  if (t.empty()) throw DomainError("window needs times");
  const double from = t.back() / 10.0 * (1.0 - 1e-12);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= from) return i;
  return t.size();
}

}  // namespace mkv
