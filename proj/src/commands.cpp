#include "heatchain/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <fmt/core.h>

#include "heatchain/graphweights.hpp"
#include "heatchain/io.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

using io::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

json state_json(const State& x) { return io::to_json(x.vec()); }

// Uniform random state in [-box, box]^dim.
State random_state(const ModelParams& m, std::uint64_t seed, double box) {
  std::vector<double> u(static_cast<std::size_t>(m.dim()));
  NormalStream(seed, 0).uniforms(0, u);
  Vec x(m.dim());
  for (int i = 0; i < m.dim(); ++i) x[i] = box * (2.0 * u[static_cast<std::size_t>(i)] - 1.0);
  return State(m.n, m.d, std::move(x));
}

double min_g(const QuasipotentialTable& t) {
  return t.g_values.empty() ? 0.0 : *std::min_element(t.g_values.begin(), t.g_values.end());
}

struct TargetReport {
  std::vector<io::WRow> rows;
  std::vector<BoundSample> samples;
};

TargetReport target_report(const ModelParams& m, const QuasipotentialTable& table) {
  TargetReport out;
  const double g0 = min_g(table);
  const double a = std::abs(m.eta);
  for (std::size_t z = 0; z < table.targets.size(); ++z) {
    const State& x = table.targets[z];
    const double g = eval_G(m, x) - g0;
    const double w = W_of_x(table, table.V_to_target.col(static_cast<Eigen::Index>(z)));
    out.rows.push_back({x.vec(), g, w, g / (1.0 + a), g / (1.0 - a)});
    out.samples.push_back({g, w});
  }
  return out;
}

// |W - (G - min G)| relative to G - min G; targets at the minimum use an absolute floor.
json equilibrium_check(const TargetReport& rep, double tol, bool& passed) {
  double worst = 0.0;
  json rows = json::array();
  passed = true;
  for (std::size_t z = 0; z < rep.rows.size(); ++z) {
    const auto& r = rep.rows[z];
    const double err = std::abs(r.W - r.g);
    const bool ok = std::isfinite(r.W) && err <= tol * r.g + 1e-6;
    const double rel = r.g > 1e-12 ? err / r.g : err;
    worst = std::max(worst, std::isfinite(rel) ? rel : kInf);
    passed = passed && ok;
    rows.push_back({{"target", z}, {"G_excess", r.g}, {"W", std::isfinite(r.W) ? json(r.W) : json(nullptr)},
                    {"relative_error", std::isfinite(rel) ? json(rel) : json(nullptr)}, {"ok", ok}});
  }
  return {{"tolerance", tol},
          {"max_relative_error", std::isfinite(worst) ? json(worst) : json(nullptr)},
          {"targets", rows},
          {"passed", passed}};
}

json fit_or_null(const std::vector<ScalingInput>& inputs, std::uint64_t seed, int bootstrap) {
  try {
    return io::to_json(fit_scaling(inputs, seed, bootstrap));
  } catch (const std::invalid_argument& e) {
    return {{"error", e.what()}};
  }
}

}  // namespace

std::string tool_version() { return "0.1.0"; }

std::string RunManifest::to_json() const {
  json j;
  j["tool"] = "heatchain";
  j["version"] = tool_version();
  j["command"] = command;
  j["config"] = config_path;
  j["config_hash"] = hex(config_hash);
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a", hex(f.fnv1a)}});
  j["timings"] = json::object();
  for (const auto& [label, seconds] : timings) j["timings"][label] = seconds;
  return j.dump(2) + "\n";
}

RunContext::RunContext(const ExperimentConfig& cfg, const RunOptions& opts, std::string command)
    : cfg_(cfg), opts_(opts), seed_(opts.seed.value_or(cfg.seed)), out_(opts.out.value_or(cfg.out)) {
  std::filesystem::create_directories(out_);
  set_max_threads(opts.jobs);
  manifest_.command = std::move(command);
  manifest_.config_path = cfg.source.string();
  manifest_.config_hash = cfg.hash;
  manifest_.seed = seed_;
  manifest_.jobs = max_threads();
}

void RunContext::write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
  std::ostringstream buf;
  fill(buf);
  const std::string bytes = buf.str();
  std::ofstream f(out_ / name, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (out_ / name).string()));
  f << bytes;
  f.close();
  auto& files = manifest_.files;
  files.erase(std::remove_if(files.begin(), files.end(), [&](const auto& e) { return e.name == name; }), files.end());
  files.push_back({name, bytes.size(), fnv1a64(bytes)});
}

void RunContext::timed(const std::string& label, const std::function<void()>& stage) {
  const auto start = std::chrono::steady_clock::now();
  stage();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  manifest_.timings.emplace_back(label, dt.count());
}

void RunContext::log(const std::string& line) const {
  if (opts_.log) *opts_.log << line << '\n' << std::flush;
}

const std::vector<CriticalSet>& RunContext::critical_sets() {
  if (!sets_) {
    timed("critical_points", [&] {
      const auto& c = cfg_.critical;
      sets_ = find_critical_points(model(), default_seeds(model(), c.box, c.per_axis), c.options);
    });
    log(fmt::format("{} critical set(s)", sets_->size()));
  }
  return *sets_;
}

void RunContext::finish(int exit_code, const std::string& error) {
  manifest_.exit_code = exit_code;
  manifest_.error = error;
  std::ofstream f(out_ / kManifestName, std::ios::binary);
  f << manifest_.to_json();
}

int cmd_critical(RunContext& ctx) {
  const auto& sets = ctx.critical_sets();
  ctx.write("critical.json", [&](std::ostream& os) { write_json(os, io::critical_report(ctx.model(), sets)); });
  return sets.empty() ? kExitNumerical : kExitOk;
}

int cmd_simulate(RunContext& ctx) {
  const ModelParams& m = ctx.model();
  const SdeSection& s = ctx.config().sde;
  std::vector<CriticalSet> none;
  const auto& sets = s.x0.critical || !s.hitting_target.empty() ? ctx.critical_sets() : none;
  const State x0 = s.x0.resolve(m, sets);
  json report;
  report["eps"] = m.eps;
  report["eta"] = m.eta;
  report["h"] = s.h;
  report["T"] = s.T;
  report["x0"] = state_json(x0);

  if (m.eps == 0.0) {
    FlowPath flow;
    ctx.timed("flow", [&] { flow = integrate_zero_T(m, x0, s.T, s.h); });
    FlowPath thinned;
    for (std::size_t k = 0; k < flow.times.size(); k += static_cast<std::size_t>(s.thin)) {
      thinned.times.push_back(flow.times[k]);
      thinned.states.push_back(flow.states[k]);
      thinned.g_values.push_back(flow.g_values[k]);
    }
    ctx.write("trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, m, thinned); });
    report["mode"] = "zero-temperature flow";
    report["final_state"] = state_json(flow.states.back());
    report["final_G"] = flow.g_values.back();
  } else {
    report["mode"] = s.scheme == SdeScheme::euler_maruyama ? "euler-maruyama" : "semi-implicit";
    const std::uint64_t seed = derive_seed(ctx.seed(), "simulate");
    std::vector<SdeRun> runs(static_cast<std::size_t>(s.replicas));
    ctx.timed("simulate", [&] {
      for_each_index(s.replicas, Exec::parallel, [&](long r) {
        SimulateOptions o;
        o.T = s.T;
        o.h = s.h;
        o.seed = seed;
        o.replica = static_cast<std::uint32_t>(r);
        o.thin = s.thin;
        o.blowup_bound = s.blowup_bound;
        o.scheme = s.scheme;
        runs[static_cast<std::size_t>(r)] = simulate(m, x0, o);
      });
    });
    report["replicas"] = json::array();
    for (const auto& run : runs) {
      const std::string name = fmt::format("trajectory_{}.csv", run.replica);
      ctx.write(name, [&](std::ostream& os) { io::write_trajectory_csv(os, m, run.trajectory); });
      report["replicas"].push_back({{"replica", run.replica},
                                    {"seed", run.seed},
                                    {"file", name},
                                    {"final_state", state_json(run.trajectory.states.back())},
                                    {"final_G", run.trajectory.g_values.back()}});
    }
    if (!s.hitting_target.empty()) {
      const Region target = ctx.config().region(s.hitting_target).resolve(m, sets);
      std::vector<HittingRecord> records;
      ctx.timed("hitting", [&] {
        records = hitting_times(m, x0, target, s.h, derive_seed(ctx.seed(), "hitting"), s.hitting_horizon,
                                s.hitting_count, Exec::parallel, s.scheme);
      });
      ctx.write("hitting.csv", [&](std::ostream& os) { io::write_hitting_csv(os, records); });
      const HittingSummary sum = summarize_hitting(records);
      report["hitting"] = {{"target", s.hitting_target}, {"horizon", s.hitting_horizon}, {"mean", sum.mean},
                           {"stderr", sum.stderr},        {"hits", sum.hits},          {"timeouts", sum.timeouts}};
    }
  }
  ctx.write("simulate.json", [&](std::ostream& os) { write_json(os, report); });
  return kExitOk;
}

int cmd_action(RunContext& ctx) {
  const ModelParams& m = ctx.model();
  const ActionSection& a = ctx.config().action;
  const bool needs_sets = a.x0.critical || (a.minimize_from && a.minimize_from->critical) ||
                          (a.minimize_to && a.minimize_to->critical);
  std::vector<CriticalSet> none;
  const auto& sets = needs_sets ? ctx.critical_sets() : none;
  const State x0 = a.x0.resolve(m, sets);

  Mat u;
  json report;
  if (!a.control_csv.empty()) {
    std::ifstream in(a.control_csv);
    if (!in) throw ConfigError(fmt::format("action.control_csv: cannot read '{}'", a.control_csv));
    u = io::read_control_csv(in, 2 * m.d);
    if (u.rows() < 2) throw ConfigError("action.control_csv: need at least two rows");
    report["control"] = {{"source", a.control_csv}};
  } else {
    const std::uint64_t seed = derive_seed(ctx.seed(), "action");
    u = sample_control(random_smooth_control(m, a.T, seed, a.modes, a.amplitude), a.N);
    report["control"] = {{"source", "random-smooth"}, {"seed", seed}, {"modes", a.modes}, {"amplitude", a.amplitude}};
  }
  ControlPath cp;
  ctx.timed("integrate", [&] { cp = integrate_controlled(m, x0, u, a.T); });
  ctx.write("action_path.csv", [&](std::ostream& os) { io::write_control_path_csv(os, m, cp); });
  const PathRecord path = to_path_record(cp);
  const double I = eval_action_path(m, path);
  report["T"] = a.T;
  report["segments"] = cp.segments();
  report["x0"] = state_json(x0);
  report["control_energy"] = cp.action;
  report["path_action"] = std::isfinite(I) ? json(I) : json(nullptr);
  report["constraint_residual"] = constraint_residual(m, path);
  report["reversal"] = io::to_json(check_reversal_identity(m, cp));

  int code = kExitOk;
  if (a.minimize_from && a.minimize_to) {
    const State from = a.minimize_from->resolve(m, sets);
    const State to = a.minimize_to->resolve(m, sets);
    PairResult r;
    ctx.timed("minimize", [&] { r = quasipotential_pair(m, from, to, ctx.config().mam); });
    json curve = json::array();
    for (const auto& c : r.curve) {
      curve.push_back({{"T", c.T}, {"N", c.N}, {"value", c.value}, {"endpoint_gap", c.endpoint_gap},
                       {"converged", c.converged}});
    }
    report["minimize"] = {{"from", state_json(from)},
                          {"to", state_json(to)},
                          {"value", std::isfinite(r.value) ? json(r.value) : json(nullptr)},
                          {"T_star", r.T_star},
                          {"converged", r.converged},
                          {"endpoint_gap", r.best.endpoint_gap},
                          {"warm_start_flags", r.warm_start_flags},
                          {"curve", curve}};
    if (r.best.control.times.size() > 0) {
      ctx.write("mam_path.csv", [&](std::ostream& os) { io::write_control_path_csv(os, m, r.best.control); });
    }
    if (!r.converged) code = kExitNumerical;
  }
  ctx.write("action.json", [&](std::ostream& os) { write_json(os, report); });
  return code;
}

int cmd_quasipotential(RunContext& ctx) {
  const ModelParams& m = ctx.model();
  const auto& sets = ctx.critical_sets();
  const std::vector<State> targets = resolve_targets(ctx.config(), sets);
  const std::string cache_name = "quasipotential_cache.json";

  CostCache cache;
  const auto cache_path = ctx.out() / cache_name;
  if (ctx.options().resume && std::filesystem::exists(cache_path)) {
    std::ifstream in(cache_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw NumericalError(fmt::format("unreadable cache '{}': {}", cache_path.string(), e.what()));
    }
    if (j.value("config_hash", std::string()) == hex(ctx.config().hash)) {
      for (const auto& e : j.at("pairs")) cache.pairs.push_back(io::cost_entry_from_json(e));
      for (const auto& e : j.at("targets")) cache.targets.push_back(io::cost_entry_from_json(e));
      ctx.log(fmt::format("resuming from {} cached entries", cache.pairs.size() + cache.targets.size()));
    } else {
      ctx.log("cache belongs to a different config; ignoring it");
    }
  }

  QuasipotentialTable table;
  ctx.timed("pairwise_costs", [&] {
    table = pairwise_costs(m, sets, targets, ctx.config().mam, Exec::parallel, cache);
    compute_weights(table);
  });
  ctx.write(cache_name, [&](std::ostream& os) {
    json j;
    j["config_hash"] = hex(ctx.config().hash);
    j["pairs"] = json::array();
    for (const auto& e : cache.pairs) j["pairs"].push_back(io::to_json(e));
    j["targets"] = json::array();
    for (const auto& e : cache.targets) j["targets"].push_back(io::to_json(e));
    write_json(os, j);
  });

  const TargetReport rep = target_report(m, table);
  ctx.write("w_report.csv", [&](std::ostream& os) { io::write_w_csv(os, rep.rows); });

  json report;
  report["table"] = io::to_json(table);
  json failures = json::array();
  for (const auto* list : {&table.pair_entries, &table.target_entries}) {
    for (const auto& e : *list) {
      if (!e.converged) failures.push_back(io::to_json(e));
    }
  }
  report["failures"] = failures;
  const VerifySection& v = ctx.config().verify;
  if (m.eta == 0.0) {
    bool passed = false;
    report["equilibrium"] = equilibrium_check(rep, v.equilibrium_tol, passed);
    if (table.L > 1) {
      const BalanceReport bal = detailed_balance_check(table, table.g_values);
      report["detailed_balance"] = io::to_json(bal);
      report["detailed_balance"]["passed"] = bal.relative() <= v.balance_tol;
    }
  } else {
    report["sandwich"] = io::to_json(verify_bounds(m.eta, rep.samples, v.sandwich_slack));
  }
  ctx.write("quasipotential.json", [&](std::ostream& os) { write_json(os, report); });
  if (!failures.empty()) ctx.log(fmt::format("{} cost(s) did not converge; see quasipotential.json", failures.size()));
  return kExitOk;
}

int cmd_measure(RunContext& ctx) {
  const ModelParams& m = ctx.model();
  const MeasureSection& ms = ctx.config().measure;
  if (ms.eps_grid.empty()) throw ConfigError("measure: section missing or empty eps_grid");
  const auto& sets = ctx.critical_sets();
  const State x0 = ms.x0 ? ms.x0->resolve(m, sets) : sets.front().point;
  std::vector<Region> regions;
  for (const auto& name : ms.regions) regions.push_back(ctx.config().region(name).resolve(m, sets));
  const std::size_t R = regions.size();

  std::vector<io::MeasureRow> rows;
  std::vector<std::vector<ScalingInput>> direct(R), cycle(R);
  json report;
  report["x0"] = state_json(x0);
  report["eps_grid"] = ms.eps_grid;
  json runs = json::array();
  for (std::size_t k = 0; k < ms.eps_grid.size(); ++k) {
    const double eps = ms.eps_grid[k];
    const ModelParams mk = m.with_temperature(eps, m.eta);
    json run;
    run["eps"] = eps;
    if (ms.direct) {
      SamplingOptions o = ms.sampling;
      o.seed = derive_seed(ctx.seed(), "measure.direct", k);
      o.T_burn = ms.burn_in ? *ms.burn_in : default_burn_in(mk, sets, x0);
      run["burn_in"] = o.T_burn;
      std::vector<MuEstimate> est;
      ctx.timed(fmt::format("direct eps={}", eps), [&] { est = estimate_mu(mk, x0, regions, o); });
      json j = json::array();
      for (std::size_t r = 0; r < R; ++r) {
        rows.push_back({ms.regions[r], "direct", eps, est[r].mu_hat, est[r].stderr});
        direct[r].push_back({eps, est[r].mu_hat, est[r].stderr});
        j.push_back({{"region", ms.regions[r]}, {"mu_hat", est[r].mu_hat}, {"stderr", est[r].stderr},
                     {"hits", est[r].hits}, {"samples", est[r].samples}, {"upper_bound", est[r].upper_bound}});
      }
      run["direct"] = j;
    }
    if (ms.cycle) {
      json j = json::array();
      for (std::size_t r = 0; r < R; ++r) {
        CycleOptions o = ms.cycle_options;
        o.seed = derive_seed(ctx.seed(), "measure.cycle", k * R + r);
        CycleEstimate est;
        ctx.timed(fmt::format("cycle eps={} region={}", eps, ms.regions[r]),
                  [&] { est = estimate_nu_cycle(mk, sets, regions[r], o); });
        rows.push_back({ms.regions[r], "cycle", eps, est.mu_hat, est.stderr});
        cycle[r].push_back({eps, est.mu_hat, est.stderr});
        j.push_back({{"region", ms.regions[r]}, {"mu_hat", est.mu_hat},     {"stderr", est.stderr},
                     {"nu_region", est.nu_region}, {"nu_total", est.nu_total}, {"cycles", est.cycles},
                     {"timeouts", est.timeouts},   {"fraction_in_outer", est.fraction_in_outer}});
      }
      run["cycle"] = j;
    }
    ctx.log(fmt::format("eps = {} done", eps));
    runs.push_back(run);
  }
  report["runs"] = runs;
  ctx.write("measure.csv", [&](std::ostream& os) { io::write_measure_csv(os, rows); });

  json scaling = json::object();
  const std::uint64_t fit_seed = derive_seed(ctx.seed(), "measure.fit");
  for (std::size_t r = 0; r < R; ++r) {
    json entry = json::object();
    if (ms.direct) entry["direct"] = fit_or_null(direct[r], fit_seed, ms.bootstrap);
    if (ms.cycle) entry["cycle"] = fit_or_null(cycle[r], fit_seed, ms.bootstrap);
    scaling[ms.regions[r]] = entry;
  }
  report["scaling"] = scaling;

  if (const auto& kr = ms.kramers) {
    const State from = kr->from.resolve(m, sets);
    const Region target = ctx.config().region(kr->target).resolve(m, sets);
    std::vector<ArrheniusInput> points;
    std::ostringstream csv;
    csv << "eps,replica,seed,time\n";
    json per_eps = json::array();
    for (std::size_t k = 0; k < kr->eps_grid.size(); ++k) {
      const double eps = kr->eps_grid[k];
      const ModelParams mk = m.with_temperature(eps, m.eta);
      std::vector<HittingRecord> records;
      ctx.timed(fmt::format("kramers eps={}", eps), [&] {
        records = hitting_times(mk, from, target, kr->h, derive_seed(ctx.seed(), "kramers", k), kr->horizon,
                                kr->replicas, Exec::parallel, kr->scheme);
      });
      for (const auto& rec : records) {
        csv << io::format_number(eps) << ',' << rec.replica << ',' << rec.seed << ','
            << (rec.time ? io::format_number(*rec.time) : "") << '\n';
      }
      const HittingSummary sum = summarize_hitting(records);
      points.push_back({eps, sum.mean, sum.stderr});
      per_eps.push_back({{"eps", eps}, {"mean", sum.mean}, {"stderr", sum.stderr}, {"hits", sum.hits},
                         {"timeouts", sum.timeouts}});
    }
    ctx.write("kramers.csv", [&](std::ostream& os) { os << csv.str(); });
    json kj;
    kj["target"] = kr->target;
    kj["points"] = per_eps;
    try {
      const ArrheniusFit fit = fit_arrhenius(points, derive_seed(ctx.seed(), "kramers.fit"), ms.bootstrap);
      kj["slope"] = fit.slope;
      kj["slope_stderr"] = fit.stderr;
      kj["intercept"] = fit.intercept;
      kj["prefactor_slope"] = fit.prefactor_slope;
    } catch (const std::invalid_argument& e) {
      kj["error"] = e.what();
    }
    report["kramers"] = kj;
  }
  ctx.write("measure.json", [&](std::ostream& os) { write_json(os, report); });
  return kExitOk;
}

int cmd_verify(RunContext& ctx) {
  const ModelParams& m = ctx.model();
  const VerifySection& v = ctx.config().verify;
  const auto& sets = ctx.critical_sets();
  const std::vector<State> targets = resolve_targets(ctx.config(), sets);
  const std::vector<double> etas = v.etas.empty() ? std::vector<double>{m.eta} : v.etas;
  const std::vector<int>& segments = ctx.options().sweep ? v.sweep_segments : v.segments;

  json checks = json::array();
  bool all_passed = true;
  auto record = [&](json check) {
    all_passed = all_passed && check.value("passed", true);
    ctx.log(fmt::format("{:<22} eta={:<5} {}", check["name"].get<std::string>(), check["eta"].get<double>(),
                        check.value("passed", true) ? (check.value("skipped", false) ? "SKIP" : "PASS") : "FAIL"));
    checks.push_back(std::move(check));
  };
  std::ostringstream refinement;
  refinement << "eta,control,N,h,residual,action\n";

  for (std::size_t e = 0; e < etas.size(); ++e) {
    const double eta = etas[e];
    const ModelParams me = m.with_temperature(m.eps, eta);

    // Reversal identity under grid refinement.
    std::vector<std::vector<ReversalReport>> reports(static_cast<std::size_t>(v.controls));
    ctx.timed(fmt::format("reversal eta={}", eta), [&] {
      for_each_index(v.controls, Exec::parallel, [&](long c) {
        const auto seed = derive_seed(ctx.seed(), "verify.control", static_cast<std::uint64_t>(c));
        const SmoothControl ctrl = random_smooth_control(me, v.control_T, seed, v.control_modes, v.control_amplitude);
        const State x0 = random_state(me, derive_seed(ctx.seed(), "verify.start", static_cast<std::uint64_t>(c)),
                                      v.start_box);
        reports[static_cast<std::size_t>(c)] = reversal_refinement(me, x0, ctrl, segments);
      });
    });
    // The order test uses the RMS residual over the control family. A single control's signed
    // error can cross zero between two grids, which makes its own |residual| non-monotone.
    const std::size_t levels = segments.size();
    std::vector<double> rms(levels, 0.0);
    bool finite = true;
    int crossings = 0;
    for (int c = 0; c < v.controls; ++c) {
      const auto& reps = reports[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < levels; ++k) {
        refinement << io::format_number(eta) << ',' << c << ',' << segments[k] << ','
                   << io::format_number(v.control_T / segments[k]) << ',' << io::format_number(reps[k].residual)
                   << ',' << io::format_number(reps[k].action_forward) << '\n';
        finite = finite && std::isfinite(reps[k].residual);
        rms[k] += reps[k].residual * reps[k].residual / v.controls;
        if (k > 0 && reps[k].residual > reps[k - 1].residual) ++crossings;
      }
    }
    json orders = json::array();
    bool rev_ok = finite;
    for (std::size_t k = 0; k < levels; ++k) rms[k] = std::sqrt(rms[k]);
    for (std::size_t k = 1; k < levels; ++k) {
      const double ratio = static_cast<double>(segments[k]) / segments[k - 1];
      const double order = std::log(rms[k - 1] / rms[k]) / std::log(ratio);
      const bool at_floor = rms[k] <= 1e-13;
      orders.push_back(std::isfinite(order) ? json(order) : json(nullptr));
      if (!at_floor && !(order >= v.min_order)) rev_ok = false;
    }
    record({{"name", "reversal_identity"},
            {"eta", eta},
            {"branch", eta == 0.0 ? "equilibrium" : "driven"},
            {"controls", v.controls},
            {"segments", segments},
            {"rms_residual", rms},
            {"observed_order", orders},
            {"min_order", v.min_order},
            {"non_monotone_steps", crossings},
            {"passed", rev_ok}});

    // Quasipotential identities on the target points.
    if (targets.empty()) {
      record({{"name", eta == 0.0 ? "equilibrium_identity" : "sandwich_bound"},
              {"eta", eta},
              {"skipped", true},
              {"reason", "no quasipotential targets configured"}});
    } else {
      QuasipotentialTable table;
      ctx.timed(fmt::format("quasipotential eta={}", eta), [&] {
        table = pairwise_costs(me, sets, targets, ctx.config().mam);
        compute_weights(table);
      });
      const TargetReport rep = target_report(me, table);
      if (eta == 0.0) {
        bool passed = false;
        json check = equilibrium_check(rep, v.equilibrium_tol, passed);
        check["name"] = "equilibrium_identity";
        check["eta"] = eta;
        record(check);
      } else {
        const BoundsReport b = verify_bounds(eta, rep.samples, v.sandwich_slack);
        json check = io::to_json(b);
        check["name"] = "sandwich_bound";
        check["eta"] = eta;
        check["passed"] = b.ok();
        record(check);
      }
      if (eta == 0.0 && table.L > 1) {
        const BalanceReport bal = detailed_balance_check(table, table.g_values);
        json check = io::to_json(bal);
        check["name"] = "detailed_balance";
        check["eta"] = eta;
        check["tolerance"] = v.balance_tol;
        check["passed"] = bal.relative() <= v.balance_tol;
        record(check);
      }
    }

    // Sign of the mean entropy production.
    if (v.entropy && m.eps > 0.0) {
      SamplingOptions o = v.entropy_sampling;
      o.seed = derive_seed(ctx.seed(), "verify.entropy", e);
      EntropyEstimate est;
      ctx.timed(fmt::format("entropy eta={}", eta),
                [&] { est = mean_entropy_production(me, sets.front().point, o); });
      const bool passed = eta == 0.0 ? std::abs(est.sigma_hat) <= 3.0 * est.stderr : est.sigma_hat > 3.0 * est.stderr;
      record({{"name", "entropy_production"},
              {"eta", eta},
              {"sigma_hat", est.sigma_hat},
              {"stderr", est.stderr},
              {"rule", eta == 0.0 ? "|sigma| <= 3 stderr" : "sigma > 3 stderr"},
              {"passed", passed}});
    } else {
      record({{"name", "entropy_production"}, {"eta", eta}, {"skipped", true}, {"reason", "eps = 0 or disabled"}});
    }
  }
  ctx.write("reversal_refinement.csv", [&](std::ostream& os) { os << refinement.str(); });
  ctx.write("verify.json", [&](std::ostream& os) {
    write_json(os, {{"checks", checks}, {"passed", all_passed}});
  });
  return all_passed ? kExitOk : kExitCheckFailed;
}

int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& opts,
                std::ostream& err) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    err << fmt::format("unknown command '{}'\n", command);
    return kExitConfig;
  }
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::optional<RunContext> ctx;
  try {
    ctx.emplace(cfg, opts, command);
  } catch (const std::exception& e) {
    err << "cannot create output directory: " << e.what() << '\n';
    return kExitConfig;
  }
  int code = kExitOk;
  std::string error;
  try {
    if (command == "critical") code = cmd_critical(*ctx);
    if (command == "simulate") code = cmd_simulate(*ctx);
    if (command == "action") code = cmd_action(*ctx);
    if (command == "quasipotential") code = cmd_quasipotential(*ctx);
    if (command == "measure") code = cmd_measure(*ctx);
    if (command == "verify") code = cmd_verify(*ctx);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const ModelError& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const std::exception& e) {
    code = kExitNumerical;
    error = e.what();
  }
  if (!error.empty()) err << "error: " << error << '\n';
  ctx->finish(code, error);
  return code;
}

}  // namespace heatchain
