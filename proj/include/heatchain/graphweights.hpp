#pragma once

#include <string>
#include <vector>

#include "heatchain/model.hpp"
#include "heatchain/qtable.hpp"

namespace heatchain {

inline constexpr int kMaxGraphLabels = 8;

/// {i}-graph on labels 0..L-1: every j != root has exactly one outgoing arrow
/// j -> target[j], the root has none (target[root] == -1), and there are no cycles.
struct IGraph {
  int root = 0;
  std::vector<int> target;

  bool valid() const;
};

/// Every {root}-graph on L labels (the spanning in-trees toward root of the complete digraph).
/// Throws std::invalid_argument for L outside [1, kMaxGraphLabels].
std::vector<IGraph> enumerate_igraphs(int L, int root);

/// Sum of V(m, target[m]) over the arrows of g.
double graph_weight(const Mat& V, const IGraph& g);

/// W(K_i) = min over {i}-graphs of the arrow-cost sum. +infinity when every graph uses a
/// missing entry.
double weight_of_set(const QuasipotentialTable& table, int i);

/// Fills table.W for every set.
void compute_weights(QuasipotentialTable& table);

/// W(x) = min_i (W(K_i) + V(K_i, x)) - min_j W(K_j).
double W_of_x(const QuasipotentialTable& table, const Eigen::Ref<const Vec>& V_to_x);

struct BoundSample {
  double g_excess = 0.0;  // G(x) - min G
  double W = 0.0;
};

struct BoundViolation {
  std::size_t index = 0;
  double lower = 0.0;
  double upper = 0.0;
  double W = 0.0;
};

struct BoundsReport {
  double eta = 0.0;
  double slack = 0.0;
  std::size_t checked = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<BoundViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// (1 + |eta|)^{-1} (G - min G) <= W <= (1 - |eta|)^{-1} (G - min G), with relative slack
/// and an absolute floor `abs_slack` for samples at the minimum.
BoundsReport verify_bounds(double eta, const std::vector<BoundSample>& samples, double slack,
                           double abs_slack = 1e-6);

struct BalanceResidual {
  int m = 0;
  int n = 0;
  double residual = 0.0;  // |V(m,n) - V(n,m) - (G_n - G_m)|
};

struct BalanceReport {
  std::vector<BalanceResidual> residuals;
  double max_residual = 0.0;
  double max_cost = 0.0;
  /// max_residual / max_cost (0 when there are no finite costs)
  double relative() const { return max_cost > 0.0 ? max_residual / max_cost : 0.0; }
};

/// Equilibrium identity V(m, n) = V(n, m) + G_n - G_m over all unordered pairs (uphill costs more).
BalanceReport detailed_balance_check(const QuasipotentialTable& table, const std::vector<double>& g_values);

}  // namespace heatchain
