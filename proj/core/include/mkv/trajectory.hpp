#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mkv/measures.hpp"

namespace mkv {

// N paths sampled on the shared grid t_k = k dt, k = 0..n_steps.
class TrajectorySet {
 public:
  TrajectorySet() = default;
  TrajectorySet(std::size_t dim, std::size_t n_paths, std::size_t n_steps, double dt, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_points() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return dt_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double time(std::size_t step) const noexcept { return static_cast<double>(step) * dt_; }
  const std::vector<double>& times() const noexcept { return times_; }

  // Noise stream id of each path (the `path` argument of the RNG).
  const std::vector<std::uint64_t>& stream_ids() const noexcept { return stream_ids_; }
  std::vector<std::uint64_t>& stream_ids() noexcept { return stream_ids_; }

  std::span<double> state(std::size_t path, std::size_t step) noexcept {
    return {states_.data() + (path * n_points() + step) * dim_, dim_};
  }
  std::span<const double> state(std::size_t path, std::size_t step) const noexcept {
    return {states_.data() + (path * n_points() + step) * dim_, dim_};
  }
  // All states of one path, step-major.
  std::span<const double> path_states(std::size_t path) const noexcept {
    return {states_.data() + path * n_points() * dim_, n_points() * dim_};
  }
  PathView path(std::size_t i) const noexcept { return {times_, path_states(i), dim_}; }

  const std::vector<double>& raw() const noexcept { return states_; }
  std::vector<double>& raw() noexcept { return states_; }

  bool operator==(const TrajectorySet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t n_paths_ = 0;
  std::size_t n_steps_ = 0;
  double dt_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> times_;
  std::vector<std::uint64_t> stream_ids_;
  std::vector<double> states_;
};

// Binary layout, all little-endian: magic "MKVTRAJ1", u64 d, u64 N, u64 n_steps,
// f64 dt, u64 seed, then N * (n_steps + 1) * d f64 states (path, step, component).
void write_trajectories_binary(const TrajectorySet& traj, const std::filesystem::path& file);
TrajectorySet read_trajectories_binary(const std::filesystem::path& file);

// CSV: path,step,t,x1..xd
void write_trajectories_csv(const TrajectorySet& traj, const std::filesystem::path& file);

}  // namespace mkv
