#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mkv/errors.hpp"
#include "mkv/format.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

TrajectorySet::TrajectorySet(std::size_t dim, std::size_t n_paths, std::size_t n_steps, double dt,
                             std::uint64_t seed)
    : dim_(dim), n_paths_(n_paths), n_steps_(n_steps), dt_(dt), seed_(seed),
      times_(n_steps + 1), stream_ids_(n_paths), states_(dim * n_paths * (n_steps + 1), 0.0) {
  for (std::size_t k = 0; k <= n_steps; ++k) times_[k] = static_cast<double>(k) * dt;
  for (std::size_t i = 0; i < n_paths; ++i) stream_ids_[i] = i;
}

namespace {

constexpr std::array<char, 8> kMagic{'M', 'K', 'V', 'T', 'R', 'A', 'J', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!is) throw Error("truncated trajectory file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_trajectories_binary(const TrajectorySet& traj, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error("cannot open " + file.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, traj.dim());
  put_u64(os, traj.n_paths());
  put_u64(os, traj.n_steps());
  put_u64(os, std::bit_cast<std::uint64_t>(traj.dt()));
  put_u64(os, traj.seed());
  for (double x : traj.raw()) put_u64(os, std::bit_cast<std::uint64_t>(x));
  if (!os) throw Error("write failed for " + file.string());
}

TrajectorySet read_trajectories_binary(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error("cannot open " + file.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw Error(file.string() + " is not a trajectory file");
  const auto dim = get_u64(is);
  const auto n_paths = get_u64(is);
  const auto n_steps = get_u64(is);
  const double dt = std::bit_cast<double>(get_u64(is));
  const auto seed = get_u64(is);
  TrajectorySet traj(dim, n_paths, n_steps, dt, seed);
  for (double& x : traj.raw()) x = std::bit_cast<double>(get_u64(is));
  return traj;
}

void write_trajectories_csv(const TrajectorySet& traj, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("cannot open " + file.string() + " for writing");
  os << "path,step,t";
  for (std::size_t j = 0; j < traj.dim(); ++j) os << ",x" << (j + 1);
  os << '\n';
  for (std::size_t p = 0; p < traj.n_paths(); ++p)
    for (std::size_t k = 0; k < traj.n_points(); ++k) {
      os << p << ',' << k << ',' << format_double(traj.time(k));
      for (double x : traj.state(p, k)) os << ',' << format_double(x);
      os << '\n';
    }
}

}  // namespace mkv
