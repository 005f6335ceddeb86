#include "mkv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "mkv/errors.hpp"
#include "mkv/parallel.hpp"

namespace mkv {

namespace {

using GaussRule = boost::math::quadrature::gauss<double, 10>;

// Integrates q(s) and (x - s) q(s) over [a, x] in one pass.
template <class Q>
std::pair<double, double> moments_on(const Q& q, double a, double x) {
  const double half = 0.5 * (x - a), mid = 0.5 * (x + a);
  const auto& nodes = GaussRule::abscissa();
  const auto& weights = GaussRule::weights();
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (double sign : {-1.0, 1.0}) {
      const double s = mid + sign * half * nodes[j];
      const double qs = q(s);
      m0 += weights[j] * qs;
      m1 += weights[j] * (x - s) * qs;
    }
  }
  return {m0 * half, m1 * half};
}

constexpr double kLogTailCut = 36.841361487904734;  // ln(1e16)

}  // namespace

// ---------------------------------------------------------------------------
// Density1D

Density1D::Density1D(std::function<double(double)> log_unnormalized)
    : Density1D(std::move(log_unnormalized), Options{}) {}

Density1D::Density1D(std::function<double(double)> log_unnormalized, Options options)
    : log_p_(std::move(log_unnormalized)) {
  if (!log_p_) throw ConfigError("density: missing log-density");
  if (!(options.scale > 0.0) || options.cells < 16 || options.quantile_points < 2)
    throw ConfigError("density: invalid options");
  const double c = options.center;
  constexpr std::size_t kScan = 8192;

  // Grow a symmetric window until both ends are negligible relative to the peak.
  double radius = 8.0 * options.scale;
  std::vector<double> grid(kScan + 1), vals(kScan + 1);
  bool enclosed = false;
  for (int attempt = 0; attempt < 40 && !enclosed; ++attempt, radius *= 2.0) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= kScan; ++j) {
      grid[j] = c - radius + 2.0 * radius * static_cast<double>(j) / kScan;
      vals[j] = log_p_(grid[j]);
      if (std::isnan(vals[j])) throw NumericalError("density: log-density is NaN at " + std::to_string(grid[j]));
      peak = std::max(peak, vals[j]);
    }
    if (!std::isfinite(peak)) continue;
    log_peak_ = peak;
    enclosed = vals.front() < peak - kLogTailCut - 4.0 && vals.back() < peak - kLogTailCut - 4.0;
    if (enclosed) break;
  }
  if (!enclosed) throw NumericalError("density: reference is not normalizable (tails do not decay)");

  std::size_t first = 0, last = kScan;
  while (first < kScan && vals[first] < log_peak_ - kLogTailCut) ++first;
  while (last > 0 && vals[last] < log_peak_ - kLogTailCut) --last;
  lo_ = grid[first == 0 ? 0 : first - 1];
  hi_ = grid[last == kScan ? kScan : last + 1];

  const std::size_t n = options.cells;
  h_ = (hi_ - lo_) / static_cast<double>(n);
  cdf_.assign(n + 1, 0.0);
  icdf_.assign(n + 1, 0.0);
  const auto q = [this](double s) { return unnormalized(s); };
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lo_ + static_cast<double>(i) * h_;
    const double b = lo_ + static_cast<double>(i + 1) * h_;
    const auto [m0, m1] = moments_on(q, a, b);
    cdf_[i + 1] = cdf_[i] + m0;
    icdf_[i + 1] = icdf_[i] + (b - a) * cdf_[i] + m1;
  }
  scaled_mass_ = cdf_[n];
  if (!(scaled_mass_ > 0.0) || !std::isfinite(scaled_mass_))
    throw NumericalError("density: reference is not normalizable");
  for (auto& v : cdf_) v /= scaled_mass_;
  for (auto& v : icdf_) v /= scaled_mass_;
  cdf_[n] = 1.0;
  normalization_ = scaled_mass_ * std::exp(log_peak_);

  quantiles_.resize(options.quantile_points);
  for (std::size_t i = 0; i < quantiles_.size(); ++i)
    quantiles_[i] = quantile((static_cast<double>(i) + 0.5) / static_cast<double>(quantiles_.size()));
  for (std::size_t i = 1; i < quantiles_.size(); ++i)
    if (!(quantiles_[i] > quantiles_[i - 1])) throw NumericalError("density: quantile table not increasing");
}

double Density1D::unnormalized(double x) const { return std::exp(log_p_(x) - log_peak_); }

double Density1D::pdf(double x) const { return unnormalized(x) / scaled_mass_; }

std::size_t Density1D::cell_of(double x) const {
  const auto i = static_cast<std::size_t>((x - lo_) / h_);
  return std::min(i, cdf_.size() - 2);
}

std::pair<double, double> Density1D::cdf_and_integrated(double x) const {
  if (x <= lo_) return {0.0, 0.0};
  if (x >= hi_) return {1.0, icdf_.back() + (x - hi_)};
  const std::size_t i = cell_of(x);
  const double a = lo_ + static_cast<double>(i) * h_;
  const auto [m0, m1] = moments_on([this](double s) { return unnormalized(s); }, a, x);
  const double f = std::min(1.0, cdf_[i] + m0 / scaled_mass_);
  const double g = icdf_[i] + (x - a) * cdf_[i] + m1 / scaled_mass_;
  return {f, g};
}

double Density1D::cdf(double x) const { return cdf_and_integrated(x).first; }

double Density1D::integrated_cdf(double x) const { return cdf_and_integrated(x).second; }

double Density1D::quantile(double level) const {
  if (level <= 0.0) return lo_;
  if (level >= 1.0) return hi_;
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), level);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  i = std::clamp<std::size_t>(i, 1, cdf_.size() - 1) - 1;
  double a = lo_ + static_cast<double>(i) * h_, b = a + h_;
  const double fa = cdf_[i], fb = cdf_[i + 1];
  double x = fb > fa ? a + h_ * (level - fa) / (fb - fa) : 0.5 * (a + b);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = cdf(x) - level;
    if (f == 0.0) return x;
    if (f < 0.0) a = x; else b = x;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) break;
    const double p = pdf(x);
    double next = p > 0.0 ? x - f / p : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-16 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double Density1D::mean() const { return hi_ - icdf_.back(); }

// ---------------------------------------------------------------------------
// Distances

double w1_1d(const WeightedEmpiricalMeasure& mu, const WeightedEmpiricalMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("w1_1d needs one-dimensional measures");
  struct Event {
    double x;
    double mass;
    bool from_mu;
  };
  std::vector<Event> events;
  events.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) events.push_back({mu.point(i)[0], mu.weight(i), true});
  for (std::size_t i = 0; i < nu.size(); ++i) events.push_back({nu.point(i)[0], nu.weight(i), false});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  double cm = 0.0, cn = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    (events[i].from_mu ? cm : cn) += events[i].mass;
    const double gap = events[i + 1].x - events[i].x;
    if (gap > 0.0) total += std::abs(cm - cn) * gap;
  }
  return total;
}

double w1_sorted_vs_density(std::span<const double> x, std::span<const double> cdf_at,
                            std::span<const double> icdf_at, std::span<const double> mass,
                            const Density1D& ref) {
  const std::size_t n = x.size();
  if (n == 0) throw DomainError("w1: empty measure");
  double total = icdf_at[0];  // left tail: F_mu = 0
  double level = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    level += mass[i];
    const double a = x[i], b = x[i + 1];
    if (!(b > a)) continue;
    const double dg = icdf_at[i + 1] - icdf_at[i];
    double piece;
    if (level <= cdf_at[i]) {
      piece = dg - level * (b - a);
    } else if (level >= cdf_at[i + 1]) {
      piece = level * (b - a) - dg;
    } else {
      const double xc = std::clamp(ref.quantile(level), a, b);
      const double gc = ref.integrated_cdf(xc);
      piece = (level * (xc - a) - (gc - icdf_at[i])) + ((icdf_at[i + 1] - gc) - level * (b - xc));
    }
    total += std::max(0.0, piece);
  }
  // Right tail: F_mu = 1.
  const double xn = x[n - 1];
  const double upper = std::max(ref.upper(), xn);
  const double g_upper = ref.integrated_cdf(upper);
  total += std::max(0.0, (upper - xn) - (g_upper - icdf_at[n - 1]));
  return total;
}

double w1_1d_vs_density(const WeightedEmpiricalMeasure& mu, const Density1D& ref) {
  if (mu.dim() != 1) throw DimensionError("w1_1d_vs_density needs a one-dimensional measure");
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mu.point(a)[0] < mu.point(b)[0] || (mu.point(a)[0] == mu.point(b)[0] && a < b);
  });
  std::vector<double> x, f, g, m;
  for (std::size_t idx : order) {
    if (mu.weight(idx) <= 0.0) continue;
    x.push_back(mu.point(idx)[0]);
    const auto [fx, gx] = ref.cdf_and_integrated(x.back());
    f.push_back(fx);
    g.push_back(gx);
    m.push_back(mu.weight(idx));
  }
  return w1_sorted_vs_density(x, f, g, m, ref);
}

std::vector<std::size_t> hungarian_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw DimensionError("hungarian: cost matrix is not n x n");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with potentials; 1-based with column 0 as sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost[(r - 1) * n + (col - 1)] - u[r] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

double w1_assignment_oracle(const WeightedEmpiricalMeasure& mu, const WeightedEmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim()) throw DimensionError("assignment oracle: dimension mismatch");
  const std::size_t n = mu.size();
  if (nu.size() != n) throw DomainError("assignment oracle needs equal atom counts");
  if (n > 10) throw DomainError("assignment oracle is limited to n <= 10");
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(mu.weight(i) - w) > 1e-12 || std::abs(nu.weight(i) - w) > 1e-12)
      throw DomainError("assignment oracle needs uniform weights");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < mu.dim(); ++k) {
        const double d = mu.point(i)[k] - nu.point(j)[k];
        d2 += d * d;
      }
      cost[i * n + j] = std::sqrt(d2);
    }
  const auto assignment = hungarian_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assignment[i]];
  return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Curves

std::vector<CurvePoint> mean_w1_curve(const TrajectorySet& traj, const WeightFamily& family,
                                      const Density1D& ref, std::span<const std::size_t> checkpoints,
                                      unsigned threads) {
  if (traj.dim() != 1) throw DimensionError("mean_w1_curve needs one-dimensional trajectories");
  if (traj.n_paths() == 0) throw DomainError("mean_w1_curve: no paths");
  if (checkpoints.empty()) return {};
  std::size_t last = 0;
  for (std::size_t k : checkpoints) {
    if (k > traj.n_steps())
      throw RangeError("checkpoint step " + std::to_string(k) + " exceeds horizon " + std::to_string(traj.n_steps()));
    last = std::max(last, k);
  }
  const std::span<const double> times(traj.times().data(), last + 1);
  const std::size_t n_paths = traj.n_paths();
  const std::size_t n_ck = checkpoints.size();

  // Occupation weights depend only on the grid, not on the path.
  std::vector<std::vector<double>> weights(n_ck);
  for (std::size_t c = 0; c < n_ck; ++c)
    weights[c] = occupation_weights(times, family, traj.time(checkpoints[c]));

  std::vector<double> values(n_ck * n_paths);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    const auto states = traj.path_states(p);
    std::vector<std::size_t> order(last + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return states[a] < states[b]; });
    std::vector<double> fx(last + 1), gx(last + 1);
    for (std::size_t k = 0; k <= last; ++k) std::tie(fx[k], gx[k]) = ref.cdf_and_integrated(states[k]);
    std::vector<double> x, f, g, m;
    x.reserve(last + 1);
    f.reserve(last + 1);
    g.reserve(last + 1);
    m.reserve(last + 1);
    for (std::size_t c = 0; c < n_ck; ++c) {
      x.clear(), f.clear(), g.clear(), m.clear();
      const auto& w = weights[c];
      for (std::size_t idx : order) {
        if (w[idx] <= 0.0) continue;
        x.push_back(states[idx]);
        f.push_back(fx[idx]);
        g.push_back(gx[idx]);
        m.push_back(w[idx]);
      }
      values[c * n_paths + p] = w1_sorted_vs_density(x, f, g, m, ref);
    }
  });

  std::vector<CurvePoint> curve;
  curve.reserve(n_ck);
  std::vector<double> sq(n_paths);
  for (std::size_t c = 0; c < n_ck; ++c) {
    const double* row = values.data() + c * n_paths;
    const double mean = pairwise_sum(row, n_paths) / static_cast<double>(n_paths);
    double se = 0.0;
    if (n_paths > 1) {
      for (std::size_t p = 0; p < n_paths; ++p) sq[p] = (row[p] - mean) * (row[p] - mean);
      const double var = pairwise_sum(sq.data(), n_paths) / static_cast<double>(n_paths - 1);
      se = std::sqrt(var / static_cast<double>(n_paths));
    }
    curve.push_back({checkpoints[c], traj.time(checkpoints[c]), mean, se, n_paths});
  }
  return curve;
}

}  // namespace mkv
