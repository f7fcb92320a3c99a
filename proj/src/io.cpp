#include "heatchain/io.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain::io {

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json to_json(const CriticalSet& set) {
  json j;
  j["id"] = set.id;
  j["point"] = to_json(set.point.vec());
  j["g_value"] = number(set.g_value);
  j["stability"] = std::string(to_string(set.stability));
  j["spectrum"] = set.hessian_spectrum;
  j["newton_steps"] = set.newton_steps;
  return j;
}

json critical_report(const ModelParams& m, const std::vector<CriticalSet>& sets) {
  json j;
  j["n"] = m.n;
  j["d"] = m.d;
  j["layout"] = state_column_names(m);
  j["sets"] = json::array();
  for (const auto& s : sets) j["sets"].push_back(to_json(s));
  return j;
}

json to_json(const CostEntry& e) {
  json j;
  j["i"] = e.from;
  j["j"] = e.to;
  j["value"] = number(e.value);
  j["T_star"] = e.T_star;
  j["converged"] = e.converged;
  j["endpoint_gap"] = number(e.endpoint_gap);
  if (e.via >= 0) j["via"] = e.via;
  return j;
}

json to_json(const QuasipotentialTable& table) {
  json j;
  j["L"] = table.L;
  j["eta"] = table.eta;
  j["g_values"] = table.g_values;
  j["V"] = json::array();
  for (int i = 0; i < table.L; ++i) {
    json row = json::array();
    for (int k = 0; k < table.L; ++k) row.push_back(number(table.V(i, k)));
    j["V"].push_back(row);
  }
  if (table.W.size() == table.L) j["W"] = to_json(table.W);
  j["entries"] = json::array();
  for (const auto& e : table.pair_entries) j["entries"].push_back(to_json(e));
  j["targets"] = json::array();
  for (const auto& t : table.targets) j["targets"].push_back(to_json(t.vec()));
  j["target_entries"] = json::array();
  for (const auto& e : table.target_entries) j["target_entries"].push_back(to_json(e));
  return j;
}

CostEntry cost_entry_from_json(const json& e) {
  CostEntry c;
  c.from = e.at("i").get<int>();
  c.to = e.at("j").get<int>();
  c.value = read_number(e.at("value"));
  c.T_star = e.at("T_star").get<double>();
  c.converged = e.at("converged").get<bool>();
  c.endpoint_gap = read_number(e.at("endpoint_gap"));
  c.via = e.value("via", -1);
  return c;
}

QuasipotentialTable table_from_json(const json& j, int n, int d) {
  QuasipotentialTable t;
  try {
    t.L = j.at("L").get<int>();
    t.eta = j.at("eta").get<double>();
    t.g_values = j.at("g_values").get<std::vector<double>>();
    t.V.resize(t.L, t.L);
    const auto& V = j.at("V");
    if (static_cast<int>(V.size()) != t.L) throw DimensionError("table V has the wrong number of rows");
    for (int i = 0; i < t.L; ++i) {
      if (static_cast<int>(V[i].size()) != t.L) throw DimensionError("table V row has the wrong length");
      for (int k = 0; k < t.L; ++k) t.V(i, k) = read_number(V[i][k]);
    }
    if (j.contains("W")) {
      t.W.resize(t.L);
      for (int i = 0; i < t.L; ++i) t.W[i] = read_number(j["W"][i]);
    }
    for (const auto& e : j.at("entries")) t.pair_entries.push_back(cost_entry_from_json(e));
    for (const auto& p : j.at("targets")) {
      Vec x(static_cast<Eigen::Index>(p.size()));
      for (std::size_t i = 0; i < p.size(); ++i) x[static_cast<Eigen::Index>(i)] = read_number(p[i]);
      t.targets.emplace_back(n, d, std::move(x));
    }
    const int Z = static_cast<int>(t.targets.size());
    t.V_to_target = Mat::Constant(t.L, Z, std::numeric_limits<double>::infinity());
    for (const auto& e : j.at("target_entries")) {
      CostEntry c = cost_entry_from_json(e);
      if (c.from < 0 || c.from >= t.L || c.to < 0 || c.to >= Z) throw DimensionError("target entry out of range");
      t.V_to_target(c.from, c.to) = c.converged ? c.value : std::numeric_limits<double>::infinity();
      t.target_entries.push_back(c);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed quasipotential table: {}", e.what()));
  }
  return t;
}

json to_json(const ReversalReport& r) {
  json j;
  j["branch"] = r.equilibrium_branch ? "equilibrium" : "driven";
  j["I_fwd"] = number(r.action_forward);
  j["I_rev"] = number(r.action_reversed);
  j["boundary_term"] = number(r.boundary_term);
  j["theta_integral"] = number(r.theta_integral);
  j["residual"] = number(r.residual);
  return j;
}

json to_json(const ScalingFit& fit) {
  json j;
  j["eps_grid"] = fit.eps_grid;
  j["log_mu"] = fit.log_mu;
  j["log_mu_stderr"] = fit.log_mu_stderr;
  j["extrapolated_limit"] = number(fit.extrapolated_limit);
  j["slope"] = number(fit.slope);
  j["stderr"] = number(fit.stderr);
  j["excluded_eps"] = fit.excluded_eps;
  return j;
}

json to_json(const BoundsReport& r) {
  json j;
  j["eta"] = r.eta;
  j["slack"] = r.slack;
  j["checked"] = r.checked;
  j["violations"] = json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back({{"index", v.index}, {"lower", v.lower}, {"upper", v.upper}, {"W", number(v.W)}});
  }
  j["ok"] = r.ok();
  return j;
}

json to_json(const BalanceReport& r) {
  json j;
  j["max_residual"] = number(r.max_residual);
  j["max_cost"] = number(r.max_cost);
  j["relative"] = number(r.relative());
  j["residuals"] = json::array();
  for (const auto& e : r.residuals) j["residuals"].push_back({{"m", e.m}, {"n", e.n}, {"residual", number(e.residual)}});
  return j;
}

std::vector<std::string> state_column_names(const ModelParams& m) {
  std::vector<std::string> names;
  auto component = [&](const std::string& base) {
    if (m.d == 1) {
      names.push_back(base);
      return;
    }
    for (int k = 0; k < m.d; ++k) names.push_back(fmt::format("{}_{}", base, k + 1));
  };
  for (int i = 0; i < m.n; ++i) component(fmt::format("p{}", i + 1));
  for (int i = 0; i < m.n; ++i) component(fmt::format("q{}", i + 1));
  component("r1");
  component(fmt::format("r{}", m.n));
  return names;
}

void write_trajectory_csv(std::ostream& os, const ModelParams& m, const FlowPath& path) {
  std::vector<std::string> head{"t"};
  for (auto& s : state_column_names(m)) head.push_back(s);
  head.push_back("G");
  write_row(os, head);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    std::vector<std::string> row{format_number(path.times[k])};
    const Vec& x = path.states[k].vec();
    for (Eigen::Index i = 0; i < x.size(); ++i) row.push_back(format_number(x[i]));
    row.push_back(format_number(path.g_values[k]));
    write_row(os, row);
  }
}

void write_hitting_csv(std::ostream& os, const std::vector<HittingRecord>& records) {
  write_row(os, {"replica", "seed", "time"});
  for (const auto& r : records) {
    write_row(os, {std::to_string(r.replica), std::to_string(r.seed), r.time ? format_number(*r.time) : ""});
  }
}

void write_control_path_csv(std::ostream& os, const ModelParams& m, const ControlPath& path) {
  std::vector<std::string> head{"t"};
  for (auto& s : state_column_names(m)) head.push_back(s);
  for (Eigen::Index j = 0; j < path.u.cols(); ++j) head.push_back(fmt::format("u{}", j + 1));
  write_row(os, head);
  for (Eigen::Index k = 0; k < path.times.size(); ++k) {
    std::vector<std::string> row{format_number(path.times[k])};
    for (Eigen::Index i = 0; i < path.states.cols(); ++i) row.push_back(format_number(path.states(k, i)));
    for (Eigen::Index j = 0; j < path.u.cols(); ++j) row.push_back(format_number(path.u(k, j)));
    write_row(os, row);
  }
}

Mat read_control_csv(std::istream& is, int controls) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("control CSV is empty");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (static_cast<int>(cells.size()) < controls) throw DimensionError("control CSV row is too short");
    rows.emplace_back(cells.end() - controls, cells.end());
  }
  Mat u(static_cast<Eigen::Index>(rows.size()), controls);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int j = 0; j < controls; ++j) u(static_cast<Eigen::Index>(k), j) = rows[k][static_cast<std::size_t>(j)];
  }
  return u;
}

void write_measure_csv(std::ostream& os, const std::vector<MeasureRow>& rows) {
  write_row(os, {"region", "estimator", "eps", "mu_hat", "stderr", "eps_log_mu"});
  for (const auto& r : rows) {
    const double elm = r.mu_hat > 0.0 ? r.eps * std::log(r.mu_hat) : -std::numeric_limits<double>::infinity();
    write_row(os, {r.region, r.estimator, format_number(r.eps), format_number(r.mu_hat), format_number(r.stderr),
                   format_number(elm)});
  }
}

void write_w_csv(std::ostream& os, const std::vector<WRow>& rows) {
  if (rows.empty()) {
    write_row(os, {"G", "W", "lower_bound", "upper_bound"});
    return;
  }
  std::vector<std::string> head;
  for (Eigen::Index i = 0; i < rows.front().x.size(); ++i) head.push_back(fmt::format("x{}", i));
  for (const char* s : {"G", "W", "lower_bound", "upper_bound"}) head.emplace_back(s);
  write_row(os, head);
  for (const auto& r : rows) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < r.x.size(); ++i) row.push_back(format_number(r.x[i]));
    for (double v : {r.g, r.W, r.lower, r.upper}) row.push_back(format_number(v));
    write_row(os, row);
  }
}

}  // namespace heatchain::io
