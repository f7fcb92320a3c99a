#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heatchain/dynamics.hpp"
#include "heatchain/model.hpp"
#include "heatchain/region.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

enum class SdeScheme {
  euler_maruyama,
  /// Symplectic Euler for (p, q) and an implicit step for the linear relaxation of r. Does not
  /// pump energy into weakly damped oscillations the way explicit Euler does.
  semi_implicit,
};

/// One step of the finite-temperature dynamics. Noise enters only the r block:
/// x' = x + h drift(x) + sqrt(eps h) noise_matrix gauss.
/// `gauss` holds 2d standard normal draws. Throws NumericalError on non-finite output.
State sde_step(const ModelParams& m, const State& x, double h, std::span<const double> gauss,
               SdeScheme scheme = SdeScheme::euler_maruyama);

/// Allocation-free stepping of a single trajectory with a counter-based noise source.
/// Step k (0-based) consumes NormalStream::normals(k).
class SdeIntegrator {
 public:
  SdeIntegrator(const ModelParams& m, const State& x0, double h, NormalStream noise,
                SdeScheme scheme = SdeScheme::euler_maruyama, double blowup_bound = 1e6);

  void advance();
  const Vec& state() const { return x_; }
  double time() const { return static_cast<double>(step_) * h_; }
  std::uint64_t steps() const { return step_; }
  double h() const { return h_; }

 private:
  const ModelParams* m_;
  double h_;
  NormalStream noise_;
  SdeScheme scheme_;
  double blowup_;
  std::uint64_t step_ = 0;
  Vec x_;
  Vec f_;
  Vec noise_scale_;
  std::vector<double> gauss_;
};

struct HitEvent {
  double time = 0.0;
  int region = 0;
};

/// Result of simulate(): the (thinned) trajectory and region-entry events.
struct SdeRun {
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  double h = 0.0;
  FlowPath trajectory;
  std::vector<HitEvent> hit_events;
};

struct SimulateOptions {
  double T = 1.0;
  double h = 0.01;
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  int thin = 1;
  bool store_trajectory = true;
  double blowup_bound = 1e6;
  SdeScheme scheme = SdeScheme::euler_maruyama;
  /// Entry into any of these regions is logged as a HitEvent.
  std::vector<Region> regions;
};

SdeRun simulate(const ModelParams& m, const State& x0, const SimulateOptions& opts);

/// First grid time at which the trajectory lies in `target`; nullopt if the horizon runs out.
std::optional<double> hitting_time(const ModelParams& m, const State& x0, const Region& target, double h,
                                   std::uint64_t seed, double horizon, std::uint32_t replica = 0,
                                   SdeScheme scheme = SdeScheme::euler_maruyama);

struct HittingRecord {
  std::uint32_t replica = 0;
  std::uint64_t seed = 0;
  std::optional<double> time;
};

/// Independent hitting times for replicas 0..count-1 of one seed.
std::vector<HittingRecord> hitting_times(const ModelParams& m, const State& x0, const Region& target, double h,
                                         std::uint64_t seed, double horizon, int count, Exec exec = Exec::parallel,
                                         SdeScheme scheme = SdeScheme::euler_maruyama);

}  // namespace heatchain
