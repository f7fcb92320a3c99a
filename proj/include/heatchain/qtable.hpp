#pragma once

#include <vector>

#include "heatchain/model.hpp"

namespace heatchain {

/// One minimum-action cost with its solver diagnostics.
struct CostEntry {
  int from = 0;
  /// Target critical set (pair table) or target point index (point table).
  int to = 0;
  double value = 0.0;
  double T_star = 0.0;
  bool converged = false;
  double endpoint_gap = 0.0;
  /// Intermediate set when the value comes from V(from, via) + V(via, to), else -1.
  int via = -1;
};

/// Pairwise costs between L critical sets plus costs from each set to target points.
struct QuasipotentialTable {
  int L = 0;
  double eta = 0.0;
  /// L x L, zero diagonal, +infinity where missing.
  Mat V;
  /// Per-set weights W(K_i), filled by compute_weights().
  Vec W;
  std::vector<double> g_values;
  std::vector<CostEntry> pair_entries;

  std::vector<State> targets;
  /// L x Z costs V(K_i, z), +infinity where missing.
  Mat V_to_target;
  std::vector<CostEntry> target_entries;
};

}  // namespace heatchain
