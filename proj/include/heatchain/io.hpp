#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatchain/action.hpp"
#include "heatchain/dynamics.hpp"
#include "heatchain/graphweights.hpp"
#include "heatchain/measure.hpp"
#include "heatchain/qtable.hpp"
#include "heatchain/sde.hpp"

namespace heatchain::io {

using json = nlohmann::ordered_json;

// JSON reports. Non-finite numbers are written as null and read back as +infinity.

json to_json(const Vec& v);
json to_json(const CriticalSet& set);
json critical_report(const ModelParams& m, const std::vector<CriticalSet>& sets);

json to_json(const CostEntry& e);
CostEntry cost_entry_from_json(const json& j);
json to_json(const QuasipotentialTable& table);
QuasipotentialTable table_from_json(const json& j, int n, int d);

json to_json(const ReversalReport& r);
json to_json(const ScalingFit& fit);
json to_json(const BoundsReport& r);
json to_json(const BalanceReport& r);

// CSV plot data. Every number is printed with round-trip precision.

std::string format_number(double v);

/// t, p..., q..., r..., G
void write_trajectory_csv(std::ostream& os, const ModelParams& m, const FlowPath& path);
/// replica, seed, time (empty when the horizon ran out)
void write_hitting_csv(std::ostream& os, const std::vector<HittingRecord>& records);
/// t, p..., q..., r..., u...
void write_control_path_csv(std::ostream& os, const ModelParams& m, const ControlPath& path);
/// Control grid of a ControlPath read back from write_control_path_csv output.
Mat read_control_csv(std::istream& is, int controls);

struct MeasureRow {
  std::string region;
  std::string estimator;
  double eps = 0.0;
  double mu_hat = 0.0;
  double stderr = 0.0;
};
/// region, estimator, eps, mu_hat, stderr, eps_log_mu
void write_measure_csv(std::ostream& os, const std::vector<MeasureRow>& rows);

struct WRow {
  Vec x;
  double g = 0.0;
  double W = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
/// x_0..x_{dim-1}, G, W, lower_bound, upper_bound
void write_w_csv(std::ostream& os, const std::vector<WRow>& rows);

/// Header names for the state columns: p1..., q1..., r1..., rn... (with _k suffixes when d > 1).
std::vector<std::string> state_column_names(const ModelParams& m);

}  // namespace heatchain::io
