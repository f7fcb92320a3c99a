#pragma once

#include "heatchain/dynamics.hpp"
#include "heatchain/model.hpp"

namespace testing {

/// Two harmonic particles: pinning q^2/2, spring (q1 - q2)^2/2, lambda2 = 1/2.
inline heatchain::ModelParams quadratic_model(double eps = 0.0, double eta = 0.0) {
  using namespace heatchain;
  return ModelParams::make(2, 1, {PotentialKind::quadratic, {0, 0, 0.5}}, {PotentialKind::quadratic, {0, 0, 0.5}},
                           1.0, 0.5, eps, eta);
}

/// Quartic double-well pinning -q^2/2 + q^4/4 (+ tilt q), harmonic spring, lambda2 = 0.1.
inline heatchain::ModelParams double_well_model(double eps = 0.0, double eta = 0.0, double tilt = 0.0) {
  using namespace heatchain;
  return ModelParams::make(2, 1, {PotentialKind::quartic_double_well, {0, tilt, -0.5, 0, 0.25}},
                           {PotentialKind::quadratic, {0, 0, 0.5}}, 1.0, 0.1, eps, eta);
}

inline std::vector<heatchain::CriticalSet> critical_sets(const heatchain::ModelParams& m) {
  return heatchain::find_critical_points(m, heatchain::default_seeds(m, 3.0, 7), {}, heatchain::Exec::serial);
}

}  // namespace testing
