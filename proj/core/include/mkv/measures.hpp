#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace mkv {

// Finitely supported probability measure on R^d: sum_i w_i delta_{x_i}.
// Support points are stored contiguously (point i occupies [i*d, (i+1)*d)).
class WeightedEmpiricalMeasure {
 public:
  static constexpr double kWeightTolerance = 1e-12;
  static constexpr double kMergeDistance = 1e-12;

  // Validates: equal lengths, at least one atom, nonnegative weights summing
  // to 1 within kWeightTolerance.
  WeightedEmpiricalMeasure(std::size_t dim, std::vector<double> support, std::vector<double> weights);

  static WeightedEmpiricalMeasure dirac(std::span<const double> point);
  static WeightedEmpiricalMeasure uniform(std::size_t dim, std::vector<double> support);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const noexcept {
    return {support_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::vector<double> mean() const;

  // Canonical form: lexicographically sorted, points within kMergeDistance of
  // their predecessor merged with summed weights, zero-weight atoms dropped.
  WeightedEmpiricalMeasure merged() const;

 private:
  std::size_t dim_;
  std::vector<double> support_;
  std::vector<double> weights_;
};

// t -> w_t, a probability measure on [0, 1].
class WeightFamily {
 public:
  enum class Kind { lebesgue, discrete, power };

  static WeightFamily lebesgue() { return WeightFamily(Kind::lebesgue, 0.0); }
  // Equal atoms at k*tau/t, k = 1..floor(t/tau); delta_0 while t < tau.
  static WeightFamily discrete(double tau);
  // Density (gamma + 1) s^gamma on [0, 1].
  static WeightFamily power(double gamma);

  Kind kind() const noexcept { return kind_; }
  double tau() const noexcept { return kind_ == Kind::discrete ? param_ : 0.0; }
  double gamma() const noexcept { return kind_ == Kind::power ? param_ : 0.0; }
  bool is_atomic() const noexcept { return kind_ == Kind::discrete; }

  // Density of w_t at s (non-atomic kinds; independent of t).
  double density(double s) const;
  // w_t([0, s]) for non-atomic kinds.
  double cumulative(double s) const;

  struct Atom {
    double s;
    double mass;
  };
  // Atoms of w_t (discrete kind only).
  std::vector<Atom> atoms(double t) const;

  // Number of atoms floor(t / tau) with a relative guard against t = n*tau
  // landing just below an integer in floating point.
  std::size_t discrete_count(double t) const;

  bool operator==(const WeightFamily&) const = default;

 private:
  WeightFamily(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

// A single path sampled on a time grid: states[k*dim .. (k+1)*dim) at times[k].
struct PathView {
  std::span<const double> times;
  std::span<const double> states;
  std::size_t dim;

  std::size_t n_points() const noexcept { return times.size(); }
  std::span<const double> state(std::size_t k) const noexcept { return states.subspan(k * dim, dim); }
};

// Mass assigned to each grid state by the occupation measure E_t^w over
// [0, t]. Length = number of grid points; entries after t are zero.
// lebesgue/power: left-endpoint rule, state k gets w_t([t_k/t, min(t_{k+1},t)/t]).
// discrete(tau): states at k*tau (must lie on the grid) get 1/n each.
std::vector<double> occupation_weights(std::span<const double> times, const WeightFamily& family, double t);

// E_t^w(path) in canonical (merged) form.
WeightedEmpiricalMeasure occupation_measure(const PathView& path, const WeightFamily& family, double t);

// int_0^1 s^{-eps} w_t(ds); +inf when w_t has an atom at 0 or the integral diverges.
double pi1_integral(const WeightFamily& family, double t, double eps);

struct Pi1Check {
  bool admissible;
  double max_integral;
  double bound;   // 1 / (eta kappa_inf f'(0)^2)
  double margin;  // bound - max_integral
};

std::vector<double> default_probe_times();

Pi1Check pi1_admissible(const WeightFamily& family, double eps, double eta, double kappa_inf,
                        double fprime0, std::span<const double> probe_times);

struct Pi2Integrals {
  double single;  // int_0^1 t^eps ^ s^{-eps} w_t(ds)
  double dbl;     // int int t^eps ^ |s1 - s2|^{-eps} w_t(ds1) w_t(ds2)
};

Pi2Integrals pi2_integrals(const WeightFamily& family, double t, double eps);

struct Pi2Check {
  bool bounded;
  std::vector<Pi2Integrals> values;  // one per probe time
};

// Finite-probe surrogate for the sup conditions: all values finite and the
// last probe's values exceed the previous probe's by at most `growth_tolerance`
// (relative).
Pi2Check pi2_bounded(const WeightFamily& family, double eps, std::span<const double> probe_times,
                     double growth_tolerance = 0.05);

}  // namespace mkv
