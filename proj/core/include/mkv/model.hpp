#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mkv/measures.hpp"

namespace mkv {

// Drift b(x, mu) of dX = b(X, L(X)) dt + dB together with its dissipativity
// profile kappa and declared interaction constant eta.
class DriftModel {
 public:
  using MeasureDrift =
      std::function<void(std::span<const double> x, const WeightedEmpiricalMeasure& mu, std::span<double> out)>;
  // Drift that sees mu only through its mean.
  using MeanDrift =
      std::function<void(std::span<const double> x, std::span<const double> mean, std::span<double> out)>;
  using Kappa = std::function<double(double)>;

  static DriftModel general(std::size_t dim, MeasureDrift drift, Kappa kappa,
                            std::optional<double> truncation, double eta);
  static DriftModel mean_field(std::size_t dim, MeanDrift drift, Kappa kappa,
                               std::optional<double> truncation, double eta);

  std::size_t dim() const noexcept { return dim_; }
  bool depends_on_mean_only() const noexcept { return static_cast<bool>(mean_drift_); }

  void drift(std::span<const double> x, const WeightedEmpiricalMeasure& mu, std::span<double> out) const;
  std::vector<double> drift(std::span<const double> x, const WeightedEmpiricalMeasure& mu) const;
  // Requires depends_on_mean_only().
  void drift_from_mean(std::span<const double> x, std::span<const double> mean, std::span<double> out) const;

  double kappa(double r) const { return kappa_(r); }
  const Kappa& kappa_function() const noexcept { return kappa_; }
  std::optional<double> truncation() const noexcept { return truncation_; }
  DriftModel with_truncation(std::optional<double> level) const;
  double eta() const noexcept { return eta_; }

  // Declared L^q moment bound (optional metadata).
  std::optional<double> moment_order;
  std::optional<double> moment_bound;

 private:
  DriftModel() = default;
  std::size_t dim_ = 1;
  MeasureDrift measure_drift_;
  MeanDrift mean_drift_;
  Kappa kappa_;
  std::optional<double> truncation_;
  double eta_ = 0.0;
};

struct CurieWeissParams {
  double beta = 1.0;
  double K = 0.2;
};

// Default truncation level kappa(6) = 8 beta.
double default_truncation_cw(double beta);

// b(x, mu) = -beta (x^3 - x) + beta K int u mu(du), kappa(r) = beta (r^2/4 - 1),
// eta = beta K.
DriftModel curie_weiss_model(const CurieWeissParams& params, std::optional<double> truncation = std::nullopt);

// One-dimensional polynomial model: b(x, mu) = sum_i drift[i] x^i + mean_coupling * mean(mu),
// kappa(r) = sum_i kappa[i] r^i; eta defaults to |mean_coupling|.
struct PolynomialModelSpec {
  std::vector<double> drift_coefficients;
  double mean_coupling = 0.0;
  std::vector<double> kappa_coefficients;
  std::optional<double> truncation;
  std::optional<double> eta;
};
DriftModel polynomial_model(const PolynomialModelSpec& spec);

// min(kappa(r), L); kappa(r) when untruncated. Throws DomainError for r <= 0.
double kappa_eff(const DriftModel& model, double r);

// Nondecreasing on the grid and r kappa^L(r) -> 0 at the left end (|r0 kappa(r0)| <= tol).
struct KappaProfileCheck {
  bool nondecreasing;
  bool vanishes_at_zero;
};
KappaProfileCheck check_kappa_profile(const DriftModel& model, std::span<const double> grid, double tol = 1e-6);

// One draw (x, y, mu) for the assumption checkers.
struct AssumptionSample {
  std::vector<double> x;
  std::vector<double> y;
  WeightedEmpiricalMeasure mu;
};
using AssumptionSampler = std::function<AssumptionSample(std::size_t index)>;

// Points uniform in [-box, box]^d, mu uniform on 1..max_atoms uniform atoms.
// Deterministic in (seed, index).
AssumptionSampler uniform_box_sampler(std::size_t dim, std::uint64_t seed, double box = 5.0,
                                      std::size_t max_atoms = 8);

struct DissipativityReport {
  double max_violation;  // max of <x-y, b(x,mu)-b(y,mu)> + kappa^L(|x-y|) |x-y|^2
  std::vector<double> worst_x;
  std::vector<double> worst_y;
  std::size_t n_samples;

  bool passed(double tolerance = 1e-9) const { return max_violation <= tolerance; }
};
DissipativityReport check_dissipativity(const DriftModel& model, const AssumptionSampler& sampler,
                                        std::size_t n_samples);

struct WeakInteractionSample {
  std::vector<double> x;
  WeightedEmpiricalMeasure mu;
  WeightedEmpiricalMeasure nu;
};

struct WeakInteractionReport {
  double eta_hat;  // max |b(x,mu) - b(x,nu)| / W1(mu, nu) over pairs with W1 > 0
  double declared_eta;
  std::size_t used_samples;

  bool passed(double tolerance = 1e-9) const { return eta_hat <= declared_eta + tolerance; }
};

WeakInteractionReport check_weak_interaction(const DriftModel& model, std::span<const WeakInteractionSample> samples);
// Random pairs of uniform measures with up to max_atoms atoms in [-box, box]^d.
WeakInteractionReport check_weak_interaction(const DriftModel& model, std::size_t n_samples,
                                             std::uint64_t seed = 0x5eed, double box = 5.0,
                                             std::size_t max_atoms = 8);

// Tabulated auxiliary function f with f(0) = 0 and
// f'(r) = 1/2 int_r^inf s exp(-1/2 int_r^s tau kappa^L(tau) dtau) ds.
class AuxFunction {
 public:
  AuxFunction(std::vector<double> grid, std::vector<double> f, std::vector<double> fprime,
              std::vector<double> fsecond, double kappa_inf);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& f() const noexcept { return f_; }
  const std::vector<double>& fprime() const noexcept { return fprime_; }
  const std::vector<double>& fsecond() const noexcept { return fsecond_; }
  double fprime0() const noexcept { return fprime_.front(); }
  double kappa_inf() const noexcept { return kappa_inf_; }
  double r_max() const noexcept { return grid_.back(); }

  // Cubic Hermite interpolation of f on the grid, linear with slope f'(r_max) beyond.
  double operator()(double r) const;

 private:
  std::vector<double> grid_, f_, fprime_, fsecond_;
  double kappa_inf_;
};

struct AuxOptions {
  double r_max = 6.0;
  std::size_t grid_size = 256;
  double rel_tol = 1e-10;
};

AuxFunction build_aux_function(const DriftModel::Kappa& kappa, std::optional<double> truncation,
                               const AuxOptions& options = {});
AuxFunction build_aux_function(const DriftModel& model, const AuxOptions& options = {});

// Default r_max: the radius where kappa first reaches L (kappa^{-1}(L)), found by
// bisection on [0, 1e3]; falls back to `fallback` when kappa never reaches L.
double truncation_radius(const DriftModel::Kappa& kappa, double level, double fallback = 8.0);

struct AuxInvariantReport {
  bool f0_zero;
  bool fprime_positive;
  bool concave;        // f'' <= tol
  bool bounds_hold;    // 1/kappa_inf <= f(r)/r <= f'(0)
  double max_ode_residual;     // stored f'' (scaled by 1 + r)
  double max_fd_residual;      // f'' from a centered 5-point stencil on f' (scaled by 1 + r)
};
AuxInvariantReport check_aux_invariants(const AuxFunction& aux, const DriftModel::Kappa& kappa,
                                        std::optional<double> truncation, double tol = 1e-12);

// Standard normal CDF.
double normal_cdf(double x);

// (sqrt(2 pi beta e^beta) Phi(sqrt(beta)))^{-1}: K below this satisfies the weak
// interaction condition for the Curie-Weiss drift.
double weak_interaction_threshold_cw(double beta);

// Model definitions from JSON:
//   {"type":"curie_weiss","beta":1,"K":0.2,"truncation_L":8}
//   {"type":"custom_polynomial_1d","drift_coefficients":[0,-1],"mean_coupling":0,
//    "kappa_coefficients":[1],"truncation_L":1,"eta":0}
DriftModel model_from_json(const nlohmann::json& j, const std::string& field = "model");

}  // namespace mkv
