#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mkv/measures.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

// Normalized density on R built from an unnormalized log-density. The CDF F
// and its antiderivative G(x) = int_{-inf}^x F are tabulated on a cell grid
// over the effective support (where p >= 1e-16 max p) and refined inside a
// cell by Gauss-Legendre quadrature, so both are accurate to ~1e-14.
class Density1D {
 public:
  struct Options {
    double center = 0.0;  // a point near the bulk of the mass
    double scale = 1.0;   // rough width of the bulk
    std::size_t cells = 2048;
    std::size_t quantile_points = 10000;
  };

  explicit Density1D(std::function<double(double)> log_unnormalized);
  Density1D(std::function<double(double)> log_unnormalized, Options options);

  double pdf(double x) const;
  double cdf(double x) const;
  // int_{-inf}^x F(s) ds
  double integrated_cdf(double x) const;
  // Both of the above with one quadrature pass.
  std::pair<double, double> cdf_and_integrated(double x) const;
  double quantile(double level) const;

  // Normalizing constant C = int exp(log_unnormalized).
  double normalization() const noexcept { return normalization_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }
  double mean() const;
  // Quantiles at levels (i + 1/2) / n, i = 0..n-1; strictly increasing.
  const std::vector<double>& quantile_table() const noexcept { return quantiles_; }

 private:
  double unnormalized(double x) const;
  std::size_t cell_of(double x) const;

  std::function<double(double)> log_p_;
  double log_peak_ = 0.0;
  double normalization_ = 0.0;  // of the peak-shifted density, times exp(log_peak_)
  double scaled_mass_ = 0.0;    // int exp(log_p - log_peak)
  double lo_ = 0.0, hi_ = 0.0, h_ = 0.0;
  std::vector<double> cdf_;  // F at cell edges
  std::vector<double> icdf_;  // G at cell edges
  std::vector<double> quantiles_;
};

// W1 between two 1-D measures: exact integral of |F_mu - F_nu|.
double w1_1d(const WeightedEmpiricalMeasure& mu, const WeightedEmpiricalMeasure& nu);

// W1 between a 1-D measure and a reference density: int |F_mu - F*| dx.
double w1_1d_vs_density(const WeightedEmpiricalMeasure& mu, const Density1D& ref);

// Lower-level form: atoms sorted ascending with F* and G at each atom
// precomputed, positive masses summing to 1.
double w1_sorted_vs_density(std::span<const double> x, std::span<const double> cdf_at,
                            std::span<const double> icdf_at, std::span<const double> mass,
                            const Density1D& ref);

// Exact W1 between two uniform measures with the same number n <= 10 of atoms
// in any dimension, via the optimal assignment (Hungarian algorithm).
double w1_assignment_oracle(const WeightedEmpiricalMeasure& mu, const WeightedEmpiricalMeasure& nu);

// Minimum-cost perfect matching on an n x n row-major cost matrix; returns
// the column assigned to each row.
std::vector<std::size_t> hungarian_assignment(std::span<const double> cost, std::size_t n);

struct CurvePoint {
  std::size_t step;
  double t;
  double mean_w1;
  double stderr_w1;
  std::size_t n_paths;
};

// For each checkpoint step k: mean over paths of W1(E_{k dt}^w(path), ref) and its
// standard error. Independent of `threads`.
std::vector<CurvePoint> mean_w1_curve(const TrajectorySet& traj, const WeightFamily& family,
                                      const Density1D& ref, std::span<const std::size_t> checkpoints,
                                      unsigned threads = 1);

}  // namespace mkv
