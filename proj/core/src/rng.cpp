#include "mkv/rng.hpp"

#include <cmath>
#include <numbers>

namespace mkv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Counter layout: word0 = slot | channel << 24, word1 = path (low 32 bits),
// word2/word3 = step. The high path bits are folded into the key.
std::array<std::uint32_t, 4> draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                  NoiseChannel channel, std::uint32_t slot) {
  const std::array<std::uint32_t, 4> ctr{
      (slot & 0x00FFFFFFu) | (static_cast<std::uint32_t>(channel) << 24),
      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(step),
      static_cast<std::uint32_t>(step >> 32)};
  const std::uint64_t k = seed ^ ((path >> 32) * 0x9E3779B97F4A7C15ull);
  return philox4x32(ctr, {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)});
}

// 53-bit uniform on (0, 1].
double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

void gaussian_block(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                    NoiseChannel channel, double variance, std::span<double> out) {
  const double sd = std::sqrt(variance);
  for (std::size_t j = 0; j < out.size(); j += 2) {
    const auto w = draw(seed, path, step, channel, static_cast<std::uint32_t>(j / 2));
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[j] = sd * radius * std::cos(angle);
    if (j + 1 < out.size()) out[j + 1] = sd * radius * std::sin(angle);
  }
}

double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t step, NoiseChannel channel,
                 std::uint32_t slot) {
  const auto w = draw(seed, path, step, channel, slot);
  return to_unit(w[0], w[1]);
}

}  // namespace mkv
