#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mkv/measures.hpp"
#include "mkv/model.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

// Law of the initial state of every path.
class InitialLaw {
 public:
  enum class Kind { point, standard_normal, samples };

  // Point mass; an empty vector means the origin.
  static InitialLaw point(std::vector<double> x = {});
  static InitialLaw standard_normal();
  // Custom sample list (flat, dim values per sample); path i starts at sample i mod count.
  static InitialLaw samples(std::size_t dim, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& values() const noexcept { return values_; }

  // Initial state of `path`; deterministic in (seed, path).
  void draw(std::uint64_t seed, std::uint64_t path, std::span<double> out) const;

 private:
  InitialLaw(Kind kind, std::size_t dim, std::vector<double> values)
      : kind_(kind), dim_(dim), values_(std::move(values)) {}
  Kind kind_;
  std::size_t dim_;
  std::vector<double> values_;
};

struct SchemeConfig {
  double dt = 0.1;
  std::size_t n_steps = 1;
  std::size_t n_paths = 1;
  double n0 = 1e4;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  InitialLaw initial = InitialLaw::point();
  unsigned threads = 1;  // 0: hardware concurrency; never changes the output
  bool zero_noise = false;  // testing hook: xi == 0

  // Throws ConfigError on dt <= 0, n_steps/n_paths == 0, n0 < 1, alpha outside (0, 0.5].
  void validate() const;
};

// b / (1 + n0^{-alpha} |b|)
double tame(double b, double n0, double alpha);
void tame_in_place(std::span<double> b, double n0, double alpha);
std::vector<double> tame(std::span<const double> b, double n0, double alpha);

// Y_{k+1} = Y_k + tame(b(Y_k, frozen)) dt + xi_k.
TrajectorySet simulate_markov(const DriftModel& model, const WeightedEmpiricalMeasure& frozen,
                              const SchemeConfig& cfg);

// Z_{k+1} = Z_k + tame(b(Z_k, E_k)) dt + xi_k where E_k is the grid occupation
// measure of the path's own history:
//   lebesgue:   (1/(k+1)) sum_{j=0..k} delta_{Z_j}
//   power(g):   weights ((j+1)^{g+1} - j^{g+1}) / (k+1)^{g+1}, j = 0..k
//   discrete:   (1/n) sum_{j=1..n} delta_{Z_{j r}}, r = tau/dt, n = floor(k dt / tau); delta_{Z_0} when n = 0
// Mean-only drifts update a running weighted sum in O(1) per step.
TrajectorySet simulate_self_interacting(const DriftModel& model, const WeightFamily& family,
                                        const SchemeConfig& cfg);

// N interacting particles; step k uses the time-k ensemble empirical measure.
TrajectorySet simulate_mckean_particles(const DriftModel& model, const SchemeConfig& cfg);

// ---------------------------------------------------------------------------
// Reflection coupling

using TimeDrift = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

// Time-independent drift b(., mu) for a fixed measure.
TimeDrift frozen_drift(const DriftModel& model, const WeightedEmpiricalMeasure& mu);

// 0 on [0, delta/2], 1 on [delta, inf), quintic smoothstep in between.
double coupling_lambda(double r, double delta);
// sqrt(1 - lambda^2)
double coupling_pi(double r, double delta);

// (I - 2 e e^T) v
void reflect(std::span<const double> e, std::span<const double> v, std::span<double> out);

// Noise pair of one coupled step for the gap Delta = X - Y:
//   X: lambda xi + pi xi_hat,   Y: lambda (I - 2 e e^T) xi + pi xi_hat,   e = Delta/|Delta| (0 if Delta = 0).
void coupling_increment(std::span<const double> gap, double delta, std::span<const double> xi,
                        std::span<const double> xi_hat, std::span<double> noise_x, std::span<double> noise_y);

enum class MeetingRule {
  // Once lambda = 1, the discrete step uses the reflection-maximal coupling of the
  // two Gaussian one-step kernels, so the pair can meet exactly.
  maximal,
  // Plain Euler discretization of the continuous construction at all radii.
  none,
};

struct CouplingConfig {
  double delta = 0.1;
  SchemeConfig scheme;         // scheme.initial gives X_0
  std::vector<double> initial_y;  // Y_0
  MeetingRule meeting = MeetingRule::maximal;
};

struct CouplingResult {
  TrajectorySet x;
  TrajectorySet y;
  std::vector<double> mean_gap;    // E|Delta_k|, k = 0..n_steps
  std::vector<double> mean_f_gap;  // E f(|Delta_k|); empty without an aux function
};

CouplingResult simulate_reflection_coupling(std::size_t dim, const TimeDrift& drift_x, const TimeDrift& drift_y,
                                            const CouplingConfig& cc, const AuxFunction* aux = nullptr);

}  // namespace mkv
