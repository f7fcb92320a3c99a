#include "heatchain/rng.hpp"

#include <cmath>
#include <numbers>

namespace heatchain {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

// 53-bit uniform in (0, 1), never exactly 0 or 1.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t global, std::string_view stream, std::uint64_t index) {
  // FNV-1a over the stream name keeps the derivation readable in the docs.
  std::uint64_t tag = 0xCBF29CE484222325ull;
  for (char c : stream) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 0x100000001B3ull;
  }
  return mix64(mix64(global ^ tag) + index);
}

std::array<std::uint32_t, 4> NormalStream::block(std::uint64_t step, std::uint32_t lane) const {
  return philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), lane, replica_},
                    {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

void NormalStream::normals(std::uint64_t step, std::span<double> out) const {
  // Box-Muller: one Philox block gives two 53-bit uniforms and so two normals.
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto b = block(step, static_cast<std::uint32_t>(i / 2));
    const double u1 = to_unit(b[0], b[1]);
    const double u2 = to_unit(b[2], b[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    out[i] = rad * std::cos(ang);
    if (i + 1 < out.size()) out[i + 1] = rad * std::sin(ang);
  }
}

void NormalStream::uniforms(std::uint64_t step, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    // High lanes keep uniforms disjoint from the normal draws of the same step.
    const auto b = block(step, 0x80000000u + static_cast<std::uint32_t>(i / 2));
    out[i] = to_unit(b[0], b[1]);
    if (i + 1 < out.size()) out[i + 1] = to_unit(b[2], b[3]);
  }
}

}  // namespace heatchain
