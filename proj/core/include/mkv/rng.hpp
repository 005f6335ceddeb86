#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mkv {

// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output is a
// function of (counter, key) only.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Independent noise sources drawn for the same (path, step).
enum class NoiseChannel : std::uint32_t {
  primary = 0,    // the Brownian increment of a path
  auxiliary = 1,  // the independent second Brownian motion of a coupling
  initial = 2,    // initial-law sampling
  uniform = 3,    // accept/reject decisions
  sampler = 4,    // assumption-checker sampling
};

// Fills `out` with i.i.d. N(0, variance) values that depend only on
// (seed, path, step, channel, component index).
void gaussian_block(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                    NoiseChannel channel, double variance, std::span<double> out);

// Gaussian increment N(0, dt I_d) of `path` at `step`.
inline void path_increment(std::uint64_t seed, std::uint64_t path, std::uint64_t step, double dt,
                           std::span<double> out) {
  gaussian_block(seed, path, step, NoiseChannel::primary, dt, out);
}

// Uniform value in (0, 1] for (seed, path, step, channel, slot).
double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step, NoiseChannel channel,
                 std::uint32_t slot = 0);

}  // namespace mkv
