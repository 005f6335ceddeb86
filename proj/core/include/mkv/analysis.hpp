#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mkv/metrics.hpp"
#include "mkv/model.hpp"

namespace mkv {

// p*(x) proportional to exp(-2 beta (x^4/4 - x^2/2)).
Density1D stationary_density_cw(const CurieWeissParams& params);

// Upper end of the admissible rate range 0 < eps < eps_max.
struct RateBound {
  double epsilon_max;
  std::string binding;  // "dimension-term", "half-term", "interaction" or "epsilon1"
  std::map<std::string, double> inputs;
};

// min{(1/d)(1 - 1/q), (1/2)(1 - 1/q)}
RateBound rate_bound_distribution(std::size_t d, double q);
// min{(1/d)(1 - 1/q), (1/2)(1 - 1/q), 1 - eta f'(0)}, 0 once eta f'(0) >= 1.
RateBound rate_bound_path(std::size_t d, double q, double eta, double fprime0);
// min{eps1, (eps2/d)(1 - 1/q), (eps2/2)(1 - 1/q)}
RateBound rate_bound_weighted(std::size_t d, double q, double eps1, double eps2);

// {"epsilon_max": ..., "binding": ..., "inputs": {...}}
nlohmann::json rate_bound_json(const RateBound& bound);

// Rate envelope without its suppressed constant, t_hat > e:
//   d = 1: (sqrt(log t_hat / t_hat))^{1-1/q}
//   d = 2: (log t_hat / sqrt(t_hat))^{1-1/q}
//   d >= 3: ((log t_hat)^{d-2+1/d} / t_hat^{1/d})^{1-1/q}
double markov_rate_envelope(std::size_t d, double q, double t_hat);
// Same with t_hat = t^eps.
double markov_rate_envelope_at(std::size_t d, double q, double eps, double t);

struct ContractionConstants {
  double D;        // kappa_inf f'(0)
  double c;        // 1 / f'(0)
  double c_eta;    // 1 / f'(0) - eta
  double kappa_inf;
  double fprime0;
  double eta;
  bool admissible;  // c_eta > 0
};

ContractionConstants contraction_constants(const AuxFunction& aux, double eta);
ContractionConstants contraction_constants(double kappa_inf, double fprime0, double eta);

// kappa_inf^2 f'(0)^3 W1(gamma0, mu*) / (1 - eta f'(0)) / t
double gronwall_bound_distribution(const ContractionConstants& k, double w1_initial, double t);

// f'(0) rho + kappa_inf f'(0)^2 W1(gamma0, mu*) exp(-c_eta t)
double gronwall_envelope(const ContractionConstants& k, double w1_initial, double t, double rho = 0.0);

struct LineFit {
  double slope;
  double intercept;
  double r2;
  std::size_t n_points;
};

// Least squares of log(value) on log(t) over indices [begin, end).
LineFit fit_loglog_slope(std::span<const double> t, std::span<const double> value, std::size_t begin,
                         std::size_t end);
LineFit fit_loglog_slope(std::span<const double> t, std::span<const double> value);
// Least squares of log(value) on t.
LineFit fit_log_linear(std::span<const double> t, std::span<const double> value);

// First index of the default regression window: points in the upper half of
// [log t_front, log t_back].
std::size_t last_half_log_window(std::span<const double> t);
// First index with t >= t_back / 10.
std::size_t final_decade_window(std::span<const double> t);

}  // namespace mkv
