#include "mkv/integrator.hpp"

#include <cmath>
#include <string>

#include "mkv/errors.hpp"
#include "mkv/parallel.hpp"
#include "mkv/rng.hpp"

namespace mkv {

InitialLaw InitialLaw::point(std::vector<double> x) {
  const std::size_t d = x.size();
  return InitialLaw(Kind::point, d, std::move(x));
}

InitialLaw InitialLaw::standard_normal() { return InitialLaw(Kind::standard_normal, 0, {}); }

InitialLaw InitialLaw::samples(std::size_t dim, std::vector<double> values) {
  if (dim == 0 || values.empty() || values.size() % dim != 0)
    throw DimensionError("initial samples: length must be a positive multiple of the dimension");
  return InitialLaw(Kind::samples, dim, std::move(values));
}

void InitialLaw::draw(std::uint64_t seed, std::uint64_t path, std::span<double> out) const {
  switch (kind_) {
    case Kind::point:
      if (values_.empty()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
      }
      if (values_.size() != out.size()) throw DimensionError("initial point dimension does not match the model");
      std::copy(values_.begin(), values_.end(), out.begin());
      return;
    case Kind::standard_normal:
      gaussian_block(seed, path, 0, NoiseChannel::initial, 1.0, out);
      return;
    case Kind::samples: {
      if (dim_ != out.size()) throw DimensionError("initial sample dimension does not match the model");
      const std::size_t count = values_.size() / dim_;
      const std::size_t i = static_cast<std::size_t>(path % count);
      std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_, out.begin());
      return;
    }
  }
}

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw_config("dt", "must be positive");
  if (n_steps == 0) throw_config("n_steps", "must be positive");
  if (n_paths == 0) throw_config("n_paths", "must be positive");
  if (!(n0 >= 1.0)) throw_config("n0", "must be at least 1");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw_config("alpha", "must lie in (0, 0.5]");
}

double tame(double b, double n0, double alpha) { return b / (1.0 + std::pow(n0, -alpha) * std::abs(b)); }

void tame_in_place(std::span<double> b, double n0, double alpha) {
  double sq = 0.0;
  for (double v : b) sq += v * v;
  const double scale = 1.0 + std::pow(n0, -alpha) * std::sqrt(sq);
  for (double& v : b) v /= scale;
}

std::vector<double> tame(std::span<const double> b, double n0, double alpha) {
  std::vector<double> out(b.begin(), b.end());
  tame_in_place(out, n0, alpha);
  return out;
}

namespace {

void require_finite(std::span<const double> x, std::size_t path, std::size_t step) {
  for (double v : x)
    if (!std::isfinite(v))
      throw SimulationError("non-finite state on path " + std::to_string(path) + " at step " + std::to_string(step));
}

// One explicit step: next = cur + tame(drift) dt + xi.
void euler_step(const SchemeConfig& cfg, std::size_t path, std::size_t step, std::span<const double> cur,
                std::span<double> drift, std::span<double> noise, std::span<double> next) {
  tame_in_place(drift, cfg.n0, cfg.alpha);
  if (cfg.zero_noise)
    std::fill(noise.begin(), noise.end(), 0.0);
  else
    path_increment(cfg.seed, path, step, cfg.dt, noise);
  for (std::size_t j = 0; j < cur.size(); ++j) next[j] = cur[j] + drift[j] * cfg.dt + noise[j];
  require_finite(next, path, step + 1);
}

TrajectorySet make_set(std::size_t dim, const SchemeConfig& cfg) {
  cfg.validate();
  TrajectorySet traj(dim, cfg.n_paths, cfg.n_steps, cfg.dt, cfg.seed);
  return traj;
}

void draw_initial(const SchemeConfig& cfg, TrajectorySet& traj, std::size_t path) {
  auto x0 = traj.state(path, 0);
  cfg.initial.draw(cfg.seed, path, x0);
  require_finite(x0, path, 0);
}

}  // namespace

TrajectorySet simulate_markov(const DriftModel& model, const WeightedEmpiricalMeasure& frozen,
                              const SchemeConfig& cfg) {
  const std::size_t d = model.dim();
  if (frozen.dim() != d) throw DimensionError("frozen measure dimension does not match the model");
  TrajectorySet traj = make_set(d, cfg);
  const bool by_mean = model.depends_on_mean_only();
  const std::vector<double> mean = frozen.mean();
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    std::vector<double> drift(d), noise(d);
    draw_initial(cfg, traj, p);
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
      const auto cur = traj.state(p, k);
      if (by_mean)
        model.drift_from_mean(cur, mean, drift);
      else
        model.drift(cur, frozen, drift);
      euler_step(cfg, p, k, cur, drift, noise, traj.state(p, k + 1));
    }
  });
  return traj;
}

namespace {

// Steps per discrete sampling interval, requiring tau to be a multiple of dt.
std::size_t sampling_stride(const WeightFamily& family, double dt) {
  const double ratio = family.tau() / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("weights.tau: must be a positive integer multiple of dt");
  return static_cast<std::size_t>(rounded);
}

// Unnormalized grid weight of state j for the power family.
double power_cell(double gamma, std::size_t j) {
  const double g1 = gamma + 1.0;
  return std::pow(static_cast<double>(j + 1), g1) - std::pow(static_cast<double>(j), g1);
}

// Occupation measure of states 0..k of one path (general drifts).
WeightedEmpiricalMeasure grid_occupation(const TrajectorySet& traj, std::size_t p, std::size_t k,
                                         const WeightFamily& family, std::size_t stride) {
  const std::size_t d = traj.dim();
  std::vector<double> support, weights;
  switch (family.kind()) {
    case WeightFamily::Kind::lebesgue:
    case WeightFamily::Kind::power: {
      support.reserve((k + 1) * d);
      weights.reserve(k + 1);
      double total = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        const auto s = traj.state(p, j);
        support.insert(support.end(), s.begin(), s.end());
        const double w = family.kind() == WeightFamily::Kind::lebesgue ? 1.0 : power_cell(family.gamma(), j);
        weights.push_back(w);
        total += w;
      }
      for (double& w : weights) w /= total;
      break;
    }
    case WeightFamily::Kind::discrete: {
      const std::size_t n = k / stride;
      if (n == 0) return WeightedEmpiricalMeasure::dirac(traj.state(p, 0));
      for (std::size_t j = 1; j <= n; ++j) {
        const auto s = traj.state(p, j * stride);
        support.insert(support.end(), s.begin(), s.end());
      }
      return WeightedEmpiricalMeasure::uniform(d, std::move(support));
    }
  }
  return WeightedEmpiricalMeasure(d, std::move(support), std::move(weights));
}

}  // namespace

TrajectorySet simulate_self_interacting(const DriftModel& model, const WeightFamily& family,
                                        const SchemeConfig& cfg) {
  const std::size_t d = model.dim();
  TrajectorySet traj = make_set(d, cfg);
  const std::size_t stride = family.kind() == WeightFamily::Kind::discrete ? sampling_stride(family, cfg.dt) : 1;
  const bool by_mean = model.depends_on_mean_only();
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    std::vector<double> drift(d), noise(d), sum(d, 0.0), mean(d);
    double mass = 0.0;
    std::size_t atoms = 0;
    draw_initial(cfg, traj, p);
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
      const auto cur = traj.state(p, k);
      if (by_mean) {
        switch (family.kind()) {
          case WeightFamily::Kind::lebesgue:
            for (std::size_t j = 0; j < d; ++j) {
              sum[j] += cur[j];
              mean[j] = sum[j] / static_cast<double>(k + 1);
            }
            break;
          case WeightFamily::Kind::power: {
            const double w = power_cell(family.gamma(), k);
            mass += w;
            for (std::size_t j = 0; j < d; ++j) {
              sum[j] += w * cur[j];
              mean[j] = sum[j] / mass;
            }
            break;
          }
          case WeightFamily::Kind::discrete:
            if (k > 0 && k % stride == 0) {
              ++atoms;
              for (std::size_t j = 0; j < d; ++j) sum[j] += cur[j];
            }
            for (std::size_t j = 0; j < d; ++j)
              mean[j] = atoms == 0 ? traj.state(p, 0)[j] : sum[j] / static_cast<double>(atoms);
            break;
        }
        model.drift_from_mean(cur, mean, drift);
      } else {
        model.drift(cur, grid_occupation(traj, p, k, family, stride), drift);
      }
      euler_step(cfg, p, k, cur, drift, noise, traj.state(p, k + 1));
    }
  });
  return traj;
}

TrajectorySet simulate_mckean_particles(const DriftModel& model, const SchemeConfig& cfg) {
  if (cfg.n_paths < 2) throw_config("n_paths", "the particle system needs at least 2 particles");
  const std::size_t d = model.dim();
  TrajectorySet traj = make_set(d, cfg);
  const std::size_t n = cfg.n_paths;
  for (std::size_t p = 0; p < n; ++p) draw_initial(cfg, traj, p);
  const bool by_mean = model.depends_on_mean_only();
  std::vector<double> column(n), mean(d), support;
  for (std::size_t k = 0; k < cfg.n_steps; ++k) {
    std::optional<WeightedEmpiricalMeasure> ensemble;
    if (by_mean) {
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t p = 0; p < n; ++p) column[p] = traj.state(p, k)[j];
        mean[j] = pairwise_sum(column.data(), n) / static_cast<double>(n);
      }
    } else {
      support.clear();
      for (std::size_t p = 0; p < n; ++p) {
        const auto s = traj.state(p, k);
        support.insert(support.end(), s.begin(), s.end());
      }
      ensemble = WeightedEmpiricalMeasure::uniform(d, support);
    }
    parallel_for(n, cfg.threads, [&](std::size_t p) {
      std::vector<double> drift(d), noise(d);
      const auto cur = traj.state(p, k);
      if (by_mean)
        model.drift_from_mean(cur, mean, drift);
      else
        model.drift(cur, *ensemble, drift);
      euler_step(cfg, p, k, cur, drift, noise, traj.state(p, k + 1));
    });
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Reflection coupling

TimeDrift frozen_drift(const DriftModel& model, const WeightedEmpiricalMeasure& mu) {
  if (mu.dim() != model.dim()) throw DimensionError("frozen measure dimension does not match the model");
  if (model.depends_on_mean_only()) {
    return [model, mean = mu.mean()](std::span<const double> x, double, std::span<double> out) {
      model.drift_from_mean(x, mean, out);
    };
  }
  return [model, mu](std::span<const double> x, double, std::span<double> out) { model.drift(x, mu, out); };
}

double coupling_lambda(double r, double delta) {
  if (r <= 0.5 * delta) return 0.0;
  if (r >= delta) return 1.0;
  const double u = (r - 0.5 * delta) / (0.5 * delta);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double coupling_pi(double r, double delta) {
  const double l = coupling_lambda(r, delta);
  return std::sqrt(std::max(0.0, 1.0 - l * l));
}

void reflect(std::span<const double> e, std::span<const double> v, std::span<double> out) {
  double dot = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) dot += e[j] * v[j];
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] - 2.0 * dot * e[j];
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void unit_or_zero(std::span<const double> v, std::span<double> e) {
  const double r = std::sqrt(norm2(v));
  for (std::size_t j = 0; j < v.size(); ++j) e[j] = r > 0.0 ? v[j] / r : 0.0;
}

}  // namespace

void coupling_increment(std::span<const double> gap, double delta, std::span<const double> xi,
                        std::span<const double> xi_hat, std::span<double> noise_x, std::span<double> noise_y) {
  const std::size_t d = gap.size();
  if (xi.size() != d || xi_hat.size() != d || noise_x.size() != d || noise_y.size() != d)
    throw DimensionError("coupling_increment: dimension mismatch");
  const double r = std::sqrt(norm2(gap));
  const double lam = coupling_lambda(r, delta), pi = coupling_pi(r, delta);
  std::vector<double> e(d), reflected(d);
  unit_or_zero(gap, e);
  reflect(e, xi, reflected);
  for (std::size_t j = 0; j < d; ++j) {
    noise_x[j] = lam * xi[j] + pi * xi_hat[j];
    noise_y[j] = lam * reflected[j] + pi * xi_hat[j];
  }
}

CouplingResult simulate_reflection_coupling(std::size_t dim, const TimeDrift& drift_x, const TimeDrift& drift_y,
                                            const CouplingConfig& cc, const AuxFunction* aux) {
  const SchemeConfig& cfg = cc.scheme;
  if (!(cc.delta > 0.0 && cc.delta < 1.0)) throw_config("delta", "must lie in (0, 1)");
  if (cc.initial_y.size() != dim) throw DimensionError("coupling: initial_y dimension does not match");
  if (!drift_x || !drift_y) throw ConfigError("coupling: both drifts are required");
  CouplingResult res{make_set(dim, cfg), make_set(dim, cfg), {}, {}};
  const double dt = cfg.dt;

  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    std::vector<double> bx(dim), by(dim), xi(dim), xi_hat(dim), nx(dim), ny(dim), gap(dim), z(dim), e(dim);
    draw_initial(cfg, res.x, p);
    std::copy(cc.initial_y.begin(), cc.initial_y.end(), res.y.state(p, 0).begin());
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const auto x = res.x.state(p, k);
      const auto y = res.y.state(p, k);
      auto x_next = res.x.state(p, k + 1);
      auto y_next = res.y.state(p, k + 1);
      drift_x(x, t, bx);
      drift_y(y, t, by);
      tame_in_place(bx, cfg.n0, cfg.alpha);
      tame_in_place(by, cfg.n0, cfg.alpha);
      if (cfg.zero_noise) {
        std::fill(xi.begin(), xi.end(), 0.0);
        std::fill(xi_hat.begin(), xi_hat.end(), 0.0);
      } else {
        gaussian_block(cfg.seed, p, k, NoiseChannel::primary, dt, xi);
        gaussian_block(cfg.seed, p, k, NoiseChannel::auxiliary, dt, xi_hat);
      }
      for (std::size_t j = 0; j < dim; ++j) gap[j] = x[j] - y[j];
      const double r = std::sqrt(norm2(gap));

      if (cc.meeting == MeetingRule::maximal && coupling_lambda(r, cc.delta) == 1.0 && !cfg.zero_noise) {
        // Gap of the drift-predicted points; Y's noise is xi + z with the maximal
        // acceptance probability, otherwise xi reflected across z's normal plane.
        for (std::size_t j = 0; j < dim; ++j) {
          z[j] = (x[j] + bx[j] * dt) - (y[j] + by[j] * dt);
          xi_hat[j] = xi[j] + z[j];
        }
        const double log_u = std::log(uniform01(cfg.seed, p, k, NoiseChannel::uniform));
        const bool meet = log_u <= (norm2(xi) - norm2(xi_hat)) / (2.0 * dt);
        for (std::size_t j = 0; j < dim; ++j) x_next[j] = x[j] + bx[j] * dt + xi[j];
        if (meet) {
          std::copy(x_next.begin(), x_next.end(), y_next.begin());
        } else {
          unit_or_zero(z, e);
          reflect(e, xi, ny);
          for (std::size_t j = 0; j < dim; ++j) y_next[j] = y[j] + by[j] * dt + ny[j];
        }
      } else {
        coupling_increment(gap, cc.delta, xi, xi_hat, nx, ny);
        for (std::size_t j = 0; j < dim; ++j) {
          x_next[j] = x[j] + bx[j] * dt + nx[j];
          y_next[j] = y[j] + by[j] * dt + ny[j];
        }
      }
      require_finite(x_next, p, k + 1);
      require_finite(y_next, p, k + 1);
    }
  });

  const std::size_t n = cfg.n_paths;
  std::vector<double> gaps(n), fgaps(n), diff(dim);
  res.mean_gap.resize(cfg.n_steps + 1);
  if (aux) res.mean_f_gap.resize(cfg.n_steps + 1);
  for (std::size_t k = 0; k <= cfg.n_steps; ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      const auto x = res.x.state(p, k);
      const auto y = res.y.state(p, k);
      for (std::size_t j = 0; j < dim; ++j) diff[j] = x[j] - y[j];
      gaps[p] = std::sqrt(norm2(diff));
      if (aux) fgaps[p] = (*aux)(gaps[p]);
    }
    res.mean_gap[k] = pairwise_sum(gaps.data(), n) / static_cast<double>(n);
    if (aux) res.mean_f_gap[k] = pairwise_sum(fgaps.data(), n) / static_cast<double>(n);
  }
  return res;
}

}  // namespace mkv
