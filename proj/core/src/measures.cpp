#include "mkv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mkv/errors.hpp"

namespace mkv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1], got " + std::to_string(eps));
}

void check_positive_time(double t) {
  if (!(t > 0.0)) throw DomainError("t must be positive, got " + std::to_string(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedEmpiricalMeasure

WeightedEmpiricalMeasure::WeightedEmpiricalMeasure(std::size_t dim, std::vector<double> support,
                                                   std::vector<double> weights)
    : dim_(dim), support_(std::move(support)), weights_(std::move(weights)) {
  if (dim_ == 0) throw DimensionError("measure dimension must be positive");
  if (weights_.empty()) throw DomainError("measure needs at least one atom");
  if (support_.size() != weights_.size() * dim_)
    throw DimensionError("support holds " + std::to_string(support_.size()) + " values, expected " +
                         std::to_string(weights_.size() * dim_));
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
  const double total = compensated_sum(weights_);
  if (std::abs(total - 1.0) > kWeightTolerance)
    throw DomainError("weights sum to " + std::to_string(total) + ", expected 1");
}

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::dirac(std::span<const double> point) {
  return {point.size(), std::vector<double>(point.begin(), point.end()), {1.0}};
}

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::uniform(std::size_t dim, std::vector<double> support) {
  if (dim == 0 || support.empty() || support.size() % dim != 0)
    throw DimensionError("uniform measure: support length is not a positive multiple of dim");
  const std::size_t n = support.size() / dim;
  return {dim, std::move(support), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

std::vector<double> WeightedEmpiricalMeasure::mean() const {
  std::vector<double> m(dim_, 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < dim_; ++j) m[j] += weights_[i] * support_[i * dim_ + j];
  return m;
}

WeightedEmpiricalMeasure WeightedEmpiricalMeasure::merged() const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = point(a), pb = point(b);
    if (std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end())) return true;
    if (std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end())) return false;
    return a < b;
  });
  std::vector<double> support, weights;
  std::size_t rep = size();  // index of the current representative
  for (std::size_t idx : order) {
    if (weights_[idx] == 0.0) continue;
    bool merge = false;
    if (rep != size()) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        const double diff = support_[idx * dim_ + j] - support_[rep * dim_ + j];
        d2 += diff * diff;
      }
      merge = std::sqrt(d2) <= kMergeDistance;
    }
    if (merge) {
      weights.back() += weights_[idx];
    } else {
      rep = idx;
      const auto p = point(idx);
      support.insert(support.end(), p.begin(), p.end());
      weights.push_back(weights_[idx]);
    }
  }
  return {dim_, std::move(support), std::move(weights)};
}

// ---------------------------------------------------------------------------
// WeightFamily

WeightFamily WeightFamily::discrete(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("discrete weight family needs tau > 0");
  return WeightFamily(Kind::discrete, tau);
}

WeightFamily WeightFamily::power(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("power weight family needs gamma >= 0");
  return WeightFamily(Kind::power, gamma);
}

double WeightFamily::density(double s) const {
  if (is_atomic()) throw DomainError("discrete weight family has no density");
  if (s < 0.0 || s > 1.0) return 0.0;
  const double g = gamma();
  return g == 0.0 ? 1.0 : (g + 1.0) * std::pow(s, g);
}

double WeightFamily::cumulative(double s) const {
  if (is_atomic()) throw DomainError("discrete weight family has no density");
  s = std::clamp(s, 0.0, 1.0);
  const double g = gamma();
  return g == 0.0 ? s : std::pow(s, g + 1.0);
}

std::size_t WeightFamily::discrete_count(double t) const {
  if (!is_atomic()) throw DomainError("discrete_count on a non-atomic family");
  if (t < 0.0) throw DomainError("t must be nonnegative");
  return static_cast<std::size_t>(std::floor(t / param_ * (1.0 + 1e-12)));
}

std::vector<WeightFamily::Atom> WeightFamily::atoms(double t) const {
  const std::size_t n = discrete_count(t);
  if (n == 0) return {{0.0, 1.0}};
  std::vector<Atom> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k)
    out.push_back({std::min(1.0, static_cast<double>(k) * param_ / t), 1.0 / static_cast<double>(n)});
  return out;
}

// ---------------------------------------------------------------------------
// Occupation measures

std::vector<double> occupation_weights(std::span<const double> times, const WeightFamily& family, double t) {
  if (times.empty()) throw RangeError("empty path");
  const double horizon = times.back();
  if (t > horizon * (1.0 + 1e-12) + 1e-12)
    throw RangeError("t = " + std::to_string(t) + " exceeds path horizon " + std::to_string(horizon));
  std::vector<double> w(times.size(), 0.0);

  if (family.is_atomic()) {
    if (t < 0.0) throw DomainError("t must be nonnegative");
    const std::size_t n = family.discrete_count(t);
    if (n == 0) {
      w[0] = 1.0;
      return w;
    }
    const double mass = 1.0 / static_cast<double>(n);
    for (std::size_t k = 1; k <= n; ++k) {
      const double target = static_cast<double>(k) * family.tau();
      const auto it = std::lower_bound(times.begin(), times.end(), target - 1e-9 * std::max(1.0, target));
      if (it == times.end() || std::abs(*it - target) > 1e-9 * std::max(1.0, target))
        throw RangeError("path grid does not contain sampling time " + std::to_string(target));
      w[static_cast<std::size_t>(it - times.begin())] += mass;
    }
    return w;
  }

  check_positive_time(t);
  for (std::size_t k = 0; k + 1 < times.size() && times[k] < t; ++k) {
    const double lo = times[k] / t;
    const double hi = std::min(times[k + 1], t) / t;
    w[k] = family.cumulative(hi) - family.cumulative(lo);
  }
  return w;
}

WeightedEmpiricalMeasure occupation_measure(const PathView& path, const WeightFamily& family, double t) {
  if (path.states.size() != path.times.size() * path.dim) throw DimensionError("path states/times mismatch");
  const auto w = occupation_weights(path.times, family, t);
  std::vector<double> support, weights;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    const auto x = path.state(k);
    support.insert(support.end(), x.begin(), x.end());
    weights.push_back(w[k]);
  }
  return WeightedEmpiricalMeasure(path.dim, std::move(support), std::move(weights)).merged();
}

// ---------------------------------------------------------------------------
// Pi_1 / Pi_2 integrals

double pi1_integral(const WeightFamily& family, double t, double eps) {
  check_positive_time(t);
  check_eps(eps);
  if (family.is_atomic()) {
    const auto atoms = family.atoms(t);
    double sum = 0.0;
    for (const auto& a : atoms) {
      if (a.s == 0.0) return kInf;
      sum += a.mass * std::pow(a.s, -eps);
    }
    return sum;
  }
  const double g1 = family.gamma() + 1.0;
  return g1 > eps ? g1 / (g1 - eps) : kInf;
}

std::vector<double> default_probe_times() { return {1.0, 1e1, 1e2, 1e3, 1e4}; }

Pi1Check pi1_admissible(const WeightFamily& family, double eps, double eta, double kappa_inf, double fprime0,
                        std::span<const double> probe_times) {
  if (!(eta > 0.0 && kappa_inf > 0.0 && fprime0 > 0.0))
    throw DomainError("pi1_admissible needs positive eta, kappa_inf and f'(0)");
  if (probe_times.empty()) throw DomainError("empty probe grid");
  double worst = 0.0;
  for (double t : probe_times) worst = std::max(worst, pi1_integral(family, t, eps));
  const double bound = 1.0 / (eta * kappa_inf * fprime0 * fprime0);
  return {worst < bound, worst, bound, bound - worst};
}

Pi2Integrals pi2_integrals(const WeightFamily& family, double t, double eps) {
  check_positive_time(t);
  check_eps(eps);
  const double cap = std::pow(t, eps);
  const auto kernel = [&](double u) { return u == 0.0 ? cap : std::min(cap, std::pow(u, -eps)); };

  if (family.is_atomic()) {
    const auto atoms = family.atoms(t);
    double single = 0.0, dbl = 0.0;
    for (const auto& a : atoms) {
      single += a.mass * kernel(a.s);
      for (const auto& b : atoms) dbl += a.mass * b.mass * kernel(std::abs(a.s - b.s));
    }
    return {single, dbl};
  }

  // For t <= 1 the cap t^eps <= 1 <= u^{-eps} on [0, 1], so both integrals equal the cap.
  if (t <= 1.0) return {cap, cap};

  const double a = 1.0 / t;
  const double g1 = family.gamma() + 1.0;
  const double e = g1 - eps;
  const double tail = e == 0.0 ? -g1 * std::log(a) : g1 * (1.0 - std::pow(a, e)) / e;
  const double single = cap * std::pow(a, g1) + tail;

  using boost::math::quadrature::gauss_kronrod;
  const auto inner = [&](double s1) {
    std::vector<double> knots{0.0, s1 - a, s1, s1 + a, 1.0};
    std::sort(knots.begin(), knots.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double lo = std::max(0.0, knots[i]), hi = std::min(1.0, knots[i + 1]);
      if (hi <= lo) continue;
      sum += gauss_kronrod<double, 21>::integrate(
          [&](double s2) { return kernel(std::abs(s1 - s2)) * family.density(s2); }, lo, hi, 12, 1e-11);
    }
    return sum * family.density(s1);
  };
  std::vector<double> outer_knots{0.0, std::min(a, 1.0), std::max(0.0, 1.0 - a), 1.0};
  std::sort(outer_knots.begin(), outer_knots.end());
  double dbl = 0.0;
  for (std::size_t i = 0; i + 1 < outer_knots.size(); ++i) {
    if (outer_knots[i + 1] <= outer_knots[i]) continue;
    dbl += gauss_kronrod<double, 21>::integrate(inner, outer_knots[i], outer_knots[i + 1], 12, 1e-10);
  }
  return {single, dbl};
}

Pi2Check pi2_bounded(const WeightFamily& family, double eps, std::span<const double> probe_times,
                     double growth_tolerance) {
  if (probe_times.size() < 2) throw DomainError("pi2_bounded needs at least two probe times");
  Pi2Check out{true, {}};
  for (double t : probe_times) {
    out.values.push_back(pi2_integrals(family, t, eps));
    const auto& v = out.values.back();
    if (!std::isfinite(v.single) || !std::isfinite(v.dbl)) out.bounded = false;
  }
  const auto& last = out.values[out.values.size() - 1];
  const auto& prev = out.values[out.values.size() - 2];
  if (last.single > prev.single * (1.0 + growth_tolerance) || last.dbl > prev.dbl * (1.0 + growth_tolerance))
    out.bounded = false;
  return out;
}

}  // namespace mkv
