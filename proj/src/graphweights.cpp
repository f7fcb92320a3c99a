#include "heatchain/graphweights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// True when following assigned arrows from `start` reaches `j` (which would close a cycle).
bool reaches(const std::vector<int>& target, int start, int j) {
  int at = start;
  for (std::size_t guard = 0; guard <= target.size(); ++guard) {
    if (at == j) return true;
    if (at < 0 || target[at] < 0) return false;
    at = target[at];
  }
  return true;
}

void extend(std::vector<int>& target, int root, int j, std::vector<IGraph>& out) {
  const int L = static_cast<int>(target.size());
  if (j == L) {
    out.push_back({root, target});
    return;
  }
  if (j == root) {
    extend(target, root, j + 1, out);
    return;
  }
  for (int t = 0; t < L; ++t) {
    if (t == j || reaches(target, t, j)) continue;
    target[j] = t;
    extend(target, root, j + 1, out);
    target[j] = -1;
  }
}

}  // namespace

bool IGraph::valid() const {
  const int L = static_cast<int>(target.size());
  if (root < 0 || root >= L || target[root] != -1) return false;
  for (int j = 0; j < L; ++j) {
    if (j == root) continue;
    if (target[j] < 0 || target[j] >= L || target[j] == j) return false;
    int at = j;
    int steps = 0;
    while (at != root) {
      at = target[at];
      if (at < 0 || ++steps > L) return false;
    }
  }
  return true;
}

std::vector<IGraph> enumerate_igraphs(int L, int root) {
  if (L < 1 || L > kMaxGraphLabels) {
    throw std::invalid_argument(fmt::format("graph enumeration supports 1..{} labels, got {}", kMaxGraphLabels, L));
  }
  if (root < 0 || root >= L) throw std::invalid_argument(fmt::format("root {} out of range for {} labels", root, L));
  std::vector<IGraph> out;
  std::vector<int> target(static_cast<std::size_t>(L), -1);
  extend(target, root, 0, out);
  return out;
}

double graph_weight(const Mat& V, const IGraph& g) {
  double sum = 0.0;
  for (std::size_t j = 0; j < g.target.size(); ++j) {
    if (g.target[j] < 0) continue;
    sum += V(static_cast<Eigen::Index>(j), g.target[j]);
  }
  return sum;
}

double weight_of_set(const QuasipotentialTable& table, int i) {
  if (table.V.rows() != table.L || table.V.cols() != table.L) throw DimensionError("cost table is not L x L");
  double best = kInf;
  for (const auto& g : enumerate_igraphs(table.L, i)) best = std::min(best, graph_weight(table.V, g));
  return best;
}

void compute_weights(QuasipotentialTable& table) {
  table.W.resize(table.L);
  for (int i = 0; i < table.L; ++i) {
    table.W[i] = weight_of_set(table, i);
    if (!std::isfinite(table.W[i])) {
      fmt::print(stderr, "warning: every {{{}}}-graph uses a missing cost; W(K_{}) = inf\n", i, i);
    }
  }
}

double W_of_x(const QuasipotentialTable& table, const Eigen::Ref<const Vec>& V_to_x) {
  if (table.W.size() != table.L) throw std::invalid_argument("set weights not computed");
  if (V_to_x.size() != table.L) throw DimensionError("need one cost per critical set");
  double best = kInf;
  for (int i = 0; i < table.L; ++i) best = std::min(best, table.W[i] + V_to_x[i]);
  return best - table.W.minCoeff();
}

BoundsReport verify_bounds(double eta, const std::vector<BoundSample>& samples, double slack, double abs_slack) {
  if (!(std::abs(eta) < 1.0)) throw ModelError("bounds need |eta| < 1");
  const double a = std::abs(eta);
  BoundsReport rep;
  rep.eta = eta;
  rep.slack = slack;
  rep.checked = samples.size();
  rep.lower.reserve(samples.size());
  rep.upper.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double lo = samples[k].g_excess / (1.0 + a);
    const double hi = samples[k].g_excess / (1.0 - a);
    rep.lower.push_back(lo);
    rep.upper.push_back(hi);
    const double w = samples[k].W;
    const bool inside = w >= lo * (1.0 - slack) - abs_slack && w <= hi * (1.0 + slack) + abs_slack;
    if (!inside) rep.violations.push_back({k, lo, hi, w});
  }
  return rep;
}

BalanceReport detailed_balance_check(const QuasipotentialTable& table, const std::vector<double>& g_values) {
  if (static_cast<int>(g_values.size()) != table.L) throw DimensionError("need one G value per critical set");
  BalanceReport rep;
  for (int m = 0; m < table.L; ++m) {
    for (int n = 0; n < table.L; ++n) {
      if (m != n && std::isfinite(table.V(m, n))) rep.max_cost = std::max(rep.max_cost, table.V(m, n));
    }
  }
  for (int m = 0; m < table.L; ++m) {
    for (int n = m + 1; n < table.L; ++n) {
      const double r = std::abs(table.V(m, n) - table.V(n, m) - (g_values[n] - g_values[m]));
      rep.residuals.push_back({m, n, r});
      if (std::isfinite(r)) {
        rep.max_residual = std::max(rep.max_residual, r);
      } else {
        rep.max_residual = kInf;
      }
    }
  }
  return rep;
}

}  // namespace heatchain
