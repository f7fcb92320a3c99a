#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace heatchain {

/// Philox4x32-10 block function (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t z);

/// Seed for a named sub-stream of a run. All randomness in a run is derived from the
/// global seed through this function: derive_seed(global, "sde", i) etc.
std::uint64_t derive_seed(std::uint64_t global, std::string_view stream, std::uint64_t index = 0);

/// Stateless Gaussian source keyed by (seed, replica). normals(step, out) fills `out`
/// with standard normal draws that depend only on (seed, replica, step, position in out),
/// so any step of any replica can be regenerated independently.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t replica) : seed_(seed), replica_(replica) {}

  void normals(std::uint64_t step, std::span<double> out) const;
  /// Uniform draws in (0, 1).
  void uniforms(std::uint64_t step, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint32_t replica() const { return replica_; }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t lane) const;

  std::uint64_t seed_;
  std::uint32_t replica_;
};

}  // namespace heatchain
