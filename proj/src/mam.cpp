#include "heatchain/mam.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include <ceres/ceres.h>
#include <fmt/core.h>

#include "transcription.hpp"

namespace heatchain {

ActionObjective::ActionObjective(const ModelParams& m, State x, State y, double T, int N, double penalty)
    : m_(&m), x_(std::move(x)), y_(std::move(y)), T_(T), N_(N), penalty_(penalty) {
  check_dims(m, x_);
  check_dims(m, y_);
  if (!(T > 0.0) || N < 1) throw std::invalid_argument("ActionObjective needs T > 0 and N >= 1");
}

double ActionObjective::evaluate(const Vec& u, Vec* grad) const {
  if (u.size() != num_parameters()) throw DimensionError("control vector has the wrong length");
  if (grad) grad->resize(num_parameters());
  return evaluate(u.data(), grad ? grad->data() : nullptr);
}

double ActionObjective::evaluate(const double* u, double* grad) const {
  const ModelParams& m = *m_;
  const int dim = m.dim();
  const int nr = 2 * m.d;
  const int off = m.r_offset();
  const double h = T_ / N_;
  const Vec scale = noise_diagonal(m);
  using CMap = Eigen::Map<const Vec>;

  // Forward sweep, keeping the RK4 stage points for the adjoint.
  Mat xs(dim, N_ + 1), y2(dim, N_), y3(dim, N_), y4(dim, N_);
  Vec k1(dim), k2(dim), k3(dim), k4(dim), y(dim), um(nr);
  xs.col(0) = x_.vec();
  auto controlled = [&](const Eigen::Ref<const Vec>& at, const Eigen::Ref<const Vec>& ctrl, Vec& out) {
    kernel::drift(m, at, out);
    out.segment(off, nr) += scale.cwiseProduct(ctrl);
  };
  for (int k = 0; k < N_; ++k) {
    const CMap ua(u + k * nr, nr);
    const CMap ub(u + (k + 1) * nr, nr);
    um = 0.5 * (ua + ub);
    const auto xk = xs.col(k);
    controlled(xk, ua, k1);
    y2.col(k) = xk + (0.5 * h) * k1;
    controlled(y2.col(k), um, k2);
    y3.col(k) = xk + (0.5 * h) * k2;
    controlled(y3.col(k), um, k3);
    y4.col(k) = xk + h * k3;
    controlled(y4.col(k), ub, k4);
    xs.col(k + 1) = xk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  double energy = 0.0;
  for (int k = 0; k <= N_; ++k) {
    const double w = (k == 0 || k == N_) ? 0.5 * h : h;
    energy += 0.5 * w * CMap(u + k * nr, nr).squaredNorm();
  }
  const Vec gap = xs.col(N_) - y_.vec();
  const double J = energy + penalty_ * gap.squaredNorm();
  if (!std::isfinite(J) || !grad) return J;

  Eigen::Map<Vec> g(grad, num_parameters());
  g.setZero();
  Vec lam = 2.0 * penalty_ * gap;
  Vec g1(dim), g2(dim), g3(dim), g4(dim), a(dim), lx(dim), gm(nr);
  for (int k = N_ - 1; k >= 0; --k) {
    g1 = (h / 6.0) * lam;
    g2 = (h / 3.0) * lam;
    g3 = (h / 3.0) * lam;
    g4 = (h / 6.0) * lam;
    lx = lam;

    kernel::drift_vjp(m, y4.col(k), g4, a);
    g.segment((k + 1) * nr, nr) += scale.cwiseProduct(g4.segment(off, nr));
    g3 += h * a;
    lx += a;

    kernel::drift_vjp(m, y3.col(k), g3, a);
    gm = scale.cwiseProduct(g3.segment(off, nr));
    g2 += (0.5 * h) * a;
    lx += a;

    kernel::drift_vjp(m, y2.col(k), g2, a);
    gm += scale.cwiseProduct(g2.segment(off, nr));
    g1 += (0.5 * h) * a;
    lx += a;

    kernel::drift_vjp(m, xs.col(k), g1, a);
    g.segment(k * nr, nr) += scale.cwiseProduct(g1.segment(off, nr)) + 0.5 * gm;
    g.segment((k + 1) * nr, nr) += 0.5 * gm;
    lx += a;
    lam.swap(lx);
  }
  for (int k = 0; k <= N_; ++k) {
    const double w = (k == 0 || k == N_) ? 0.5 * h : h;
    g.segment(k * nr, nr) += w * CMap(u + k * nr, nr);
  }
  return J;
}

Mat flatten_control(const Mat& u) {
  Mat flat(u.rows() * u.cols(), 1);
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) flat(k * u.cols() + j, 0) = u(k, j);
  }
  return flat;
}

Mat unflatten_control(const double* data, int rows, int cols) {
  Mat u(rows, cols);
  for (int k = 0; k < rows; ++k) {
    for (int j = 0; j < cols; ++j) u(k, j) = data[k * cols + j];
  }
  return u;
}

Mat linear_r_control(const ModelParams& m, const State& x, const State& y, double T, int N) {
  const int nr = 2 * m.d;
  const int off = m.r_offset();
  const Vec inv_scale = noise_diagonal(m).cwiseInverse();
  const Vec rdot = (y.r() - x.r()) / T;
  Mat u(N + 1, nr);
  Vec g(m.dim());
  for (int k = 0; k <= N; ++k) {
    const double s = static_cast<double>(k) / N;
    const Vec xs = (1.0 - s) * x.vec() + s * y.vec();
    kernel::grad_G(m, xs, g);
    u.row(k) = inv_scale.cwiseProduct(rdot + m.gamma * m.lambda2 * g.segment(off, nr)).transpose();
  }
  return u;
}

Mat resample_control(const Mat& u, double T_old, double T_new, int N) {
  const Eigen::Index old_segs = u.rows() - 1;
  Mat out = Mat::Zero(N + 1, u.cols());
  const double shift = T_new - T_old;
  for (int k = 0; k <= N; ++k) {
    const double t_old = T_new * k / N - shift;
    if (t_old < 0.0 || t_old > T_old) continue;
    const double pos = t_old / T_old * old_segs;
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), old_segs - 1);
    const double frac = pos - static_cast<double>(i);
    out.row(k) = (1.0 - frac) * u.row(i) + frac * u.row(i + 1);
  }
  return out;
}

namespace {

class CeresAdapter final : public ceres::FirstOrderFunction {
 public:
  explicit CeresAdapter(const ActionObjective* obj) : obj_(obj) {}
  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    *cost = obj_->evaluate(parameters, gradient);
    if (!std::isfinite(*cost)) return false;
    if (gradient) {
      for (int i = 0; i < obj_->num_parameters(); ++i) {
        if (!std::isfinite(gradient[i])) return false;
      }
    }
    return true;
  }
  int NumParameters() const override { return obj_->num_parameters(); }

 private:
  const ActionObjective* obj_;
};

double endpoint_gap(const ControlPath& cp, const State& y) {
  return (cp.states.row(cp.states.rows() - 1).transpose() - y.vec()).norm();
}

}  // namespace

std::string_view to_string(MamInit init) {
  switch (init) {
    case MamInit::zero_control: return "zero-control";
    case MamInit::linear_r_interpolation: return "linear-r-interpolation";
    case MamInit::warm_start: return "warm-start";
    case MamInit::reversed_flow: return "reversed-flow";
    case MamInit::forward_flow: return "forward-flow";
  }
  return "unknown";
}

MamInit parse_mam_init(std::string_view name) {
  for (MamInit i : {MamInit::zero_control, MamInit::linear_r_interpolation, MamInit::warm_start,
                    MamInit::reversed_flow, MamInit::forward_flow}) {
    if (to_string(i) == name) return i;
  }
  throw std::invalid_argument(fmt::format("unknown MAM initialisation '{}'", name));
}

namespace {

Vec nudge_direction(const Vec& from, const Vec& to) {
  Vec dir = to - from;
  const double nrm = dir.norm();
  return nrm > 0.0 ? Vec(dir / nrm) : Vec::Zero(from.size());
}

// Zero-temperature flow on the MAM grid, then bent linearly so that its ends are a and b.
Mat flow_states(const ModelParams& m, const Vec& start, double T, int N) {
  const FlowPath flow = integrate_zero_T(m, State(m.n, m.d, start), T, T / N);
  Mat out(N + 1, m.dim());
  for (int k = 0; k <= N; ++k) out.row(k) = flow.states[static_cast<std::size_t>(k)].vec().transpose();
  return out;
}

void bend(Mat& states, const Vec& a, const Vec& b) {
  const Eigen::Index N = states.rows() - 1;
  const Vec da = a - states.row(0).transpose();
  const Vec db = b - states.row(N).transpose();
  for (Eigen::Index k = 0; k <= N; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(N);
    states.row(k) += ((1.0 - s) * da + s * db).transpose();
  }
}

}  // namespace

InitialGuess initial_guess(const ModelParams& m, const MamProblem& prob) {
  const int nr = 2 * m.d;
  const int np = m.n * m.d;
  InitialGuess g;
  switch (prob.init) {
    case MamInit::zero_control: g.control = Mat::Zero(prob.N + 1, nr); return g;
    case MamInit::linear_r_interpolation: g.control = linear_r_control(m, prob.x, prob.y, prob.T, prob.N); return g;
    case MamInit::warm_start:
      if (prob.warm_start.rows() < 2 || prob.warm_start.cols() != nr) {
        throw DimensionError("warm-start control has the wrong shape");
      }
      g.control = prob.warm_start.rows() == prob.N + 1 ? prob.warm_start
                                                         : resample_control(prob.warm_start, prob.T, prob.T, prob.N);
      return g;
    case MamInit::reversed_flow: {
      Vec start = reverse_momenta(prob.y).vec() +
                  prob.guide_offset * reverse_momenta(State(m.n, m.d, nudge_direction(prob.y.vec(), prob.x.vec()))).vec();
      const Mat flow = flow_states(m, start, prob.T, prob.N);
      g.states.resize(prob.N + 1, m.dim());
      for (int k = 0; k <= prob.N; ++k) {
        g.states.row(k) = flow.row(prob.N - k);
        g.states.row(k).head(np) *= -1.0;
      }
      break;
    }
    case MamInit::forward_flow: {
      const Vec start = prob.x.vec() + prob.guide_offset * nudge_direction(prob.x.vec(), prob.y.vec());
      g.states = flow_states(m, start, prob.T, prob.N);
      break;
    }
  }
  bend(g.states, prob.x.vec(), prob.y.vec());
  const PathRecord path{m.n, m.d, Vec::LinSpaced(prob.N + 1, 0.0, prob.T), g.states};
  g.control = path_controls(m, path);
  return g;
}

namespace {

MamResult run_shooting(const ModelParams& m, const MamProblem& prob, const Mat& u0, const MamOptions& opts,
                       const std::vector<double>& schedule) {
  const int nr = 2 * m.d;
  Mat flat = flatten_control(u0);
  ActionObjective objective(m, prob.x, prob.y, prob.T, prob.N, schedule.front());
  if (!std::isfinite(objective.evaluate(flat.data(), nullptr))) {
    throw MamError("action objective is non-finite at the initial control", u0);
  }

  ceres::GradientProblemSolver::Options copts;
  copts.line_search_direction_type = ceres::LBFGS;
  copts.max_lbfgs_rank = opts.lbfgs_rank;
  copts.max_num_iterations = opts.max_iterations;
  copts.function_tolerance = opts.function_tol;
  copts.gradient_tolerance = opts.gradient_tol;
  copts.parameter_tolerance = 1e-16;
  copts.logging_type = ceres::SILENT;
  copts.minimizer_progress_to_stdout = false;

  MamResult res;
  for (double penalty : schedule) {
    objective.set_penalty(penalty);
    ceres::GradientProblem problem(new CeresAdapter(&objective));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(copts, problem, flat.data(), &summary);
    res.iterations += static_cast<int>(summary.iterations.size());
    res.message = summary.message;
    res.penalty = penalty;
    const Mat u = unflatten_control(flat.data(), prob.N + 1, nr);
    if (!u.allFinite()) throw MamError("action minimisation produced a non-finite control", u);
    res.control = integrate_controlled(m, prob.x, u, prob.T);
    res.endpoint_gap = endpoint_gap(res.control, prob.y);
    if (res.endpoint_gap <= opts.gap_tol) {
      res.converged = true;
      break;
    }
  }
  res.value = res.control.action;
  return res;
}

}  // namespace

MamResult minimize_action_T(const ModelParams& m, const MamProblem& prob, const MamOptions& opts) {
  check_dims(m, prob.x);
  check_dims(m, prob.y);
  if (!(prob.T > 0.0)) throw std::invalid_argument("MAM horizon T must be positive");
  if (prob.N < 8) throw std::invalid_argument("MAM needs N >= 8 segments");
  if (opts.penalty_schedule.empty()) throw std::invalid_argument("MAM penalty schedule is empty");

  const InitialGuess guess = initial_guess(m, prob);
  if (!guess.control.allFinite()) throw MamError("initial control is non-finite", guess.control);
  if (opts.method == MamMethod::shooting) return run_shooting(m, prob, guess.control, opts, opts.penalty_schedule);

  if (opts.defect_weights.empty() || opts.polish_penalties.empty()) {
    throw std::invalid_argument("transcription needs defect weights and polish penalties");
  }
  TranscriptionOutcome tr = transcribe(m, prob.x, prob.y, prob.T, guess.control, guess.states, opts);
  MamResult res;
  res.control = integrate_controlled(m, prob.x, tr.control, prob.T);
  res.endpoint_gap = endpoint_gap(res.control, prob.y);
  res.converged = res.endpoint_gap <= opts.gap_tol;
  res.value = res.control.action;
  res.iterations = tr.iterations;
  res.message = tr.message;
  res.penalty = opts.defect_weights.back();

  MamResult polished = run_shooting(m, prob, tr.control, opts, opts.polish_penalties);
  polished.iterations += res.iterations;
  if (polished.converged && (!res.converged || polished.value < res.value)) return polished;
  return res;
}

int segments_for(double T, const PairOptions& opts) {
  const int by_dt = opts.max_dt > 0.0 ? static_cast<int>(std::ceil(T / opts.max_dt - 1e-9)) : 0;
  return std::max({opts.N, by_dt, 8});
}

namespace {

bool better(const MamResult& a, const MamResult& b) {
  if (a.converged != b.converged) return a.converged;
  return a.value < b.value;
}

}  // namespace

PairResult quasipotential_pair(const ModelParams& m, const State& x, const State& y, const PairOptions& opts) {
  if (opts.T_grid.empty()) throw std::invalid_argument("quasipotential_pair needs a nonempty T grid");
  std::vector<double> grid = opts.T_grid;
  std::sort(grid.begin(), grid.end());

  PairResult out;
  bool have_best = false;
  auto consider = [&](double T, MamResult&& r) {
    out.curve.push_back({T, r.control.segments(), r.value, r.endpoint_gap, r.converged});
    if (!have_best || better(r, out.best)) {
      out.best = std::move(r);
      out.T_star = T;
      have_best = true;
    }
  };
  auto solve_at = [&](double T, const Mat* warm, double warm_T) {
    MamProblem prob{x, y, T, segments_for(T, opts), MamInit::linear_r_interpolation, {}};
    std::optional<MamResult> warm_res;
    if (warm) {
      MamProblem wp = prob;
      wp.init = MamInit::warm_start;
      wp.warm_start = resample_control(*warm, warm_T, T, prob.N);
      warm_res = minimize_action_T(m, wp, opts.mam);
      if (!opts.check_warm_start) return std::move(*warm_res);
    }
    std::optional<MamResult> cold;
    for (MamInit init : opts.cold_inits) {
      prob.init = init;
      MamResult r = minimize_action_T(m, prob, opts.mam);
      if (!cold || better(r, *cold)) cold = std::move(r);
    }
    if (!cold) {
      if (!warm_res) throw std::invalid_argument("quasipotential_pair needs at least one cold initialisation");
      return std::move(*warm_res);
    }
    if (!warm_res) return std::move(*cold);
    if (warm_res->converged && cold->converged && warm_res->value > cold->value + 1e-9) ++out.warm_start_flags;
    return better(*warm_res, *cold) ? std::move(*warm_res) : std::move(*cold);
  };

  Mat prev;
  double prev_T = 0.0;
  for (double T : grid) {
    MamResult r = solve_at(T, prev.size() ? &prev : nullptr, prev_T);
    prev = r.control.u;
    prev_T = T;
    consider(T, std::move(r));
  }

  if (opts.refine && grid.size() > 1) {
    const auto it = std::find(grid.begin(), grid.end(), out.T_star);
    const auto i = static_cast<std::size_t>(it - grid.begin());
    std::vector<double> extra;
    if (i > 0) extra.push_back(std::sqrt(grid[i - 1] * grid[i]));
    if (i + 1 < grid.size()) extra.push_back(std::sqrt(grid[i] * grid[i + 1]));
    const Mat anchor = out.best.control.u;
    const double anchor_T = out.T_star;
    for (double T : extra) consider(T, solve_at(T, &anchor, anchor_T));
  }

  out.converged = out.best.converged;
  out.value = out.best.value;
  return out;
}

void close_under_concatenation(QuasipotentialTable& table) {
  const int L = table.L;
  auto pair_entry = [&](int i, int j) -> CostEntry* {
    for (auto& e : table.pair_entries) {
      if (e.from == i && e.to == j) return &e;
    }
    return nullptr;
  };
  for (int k = 0; k < L; ++k) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        if (i == j || i == k || j == k) continue;
        const double via = table.V(i, k) + table.V(k, j);
        if (via < table.V(i, j)) {
          table.V(i, j) = via;
          if (auto* e = pair_entry(i, j)) {
            e->value = via;
            e->via = k;
            e->converged = true;
          }
        }
      }
    }
  }
  for (auto& e : table.target_entries) {
    for (int k = 0; k < L; ++k) {
      if (k == e.from) continue;
      const double via = table.V(e.from, k) + table.V_to_target(k, e.to);
      if (via < table.V_to_target(e.from, e.to)) {
        table.V_to_target(e.from, e.to) = via;
        e.value = via;
        e.via = k;
        e.converged = true;
      }
    }
  }
}

const CostEntry* CostCache::find(int from, int to, bool is_target) const {
  for (const auto& e : is_target ? targets : pairs) {
    if (e.from == from && e.to == to && e.converged) return &e;
  }
  return nullptr;
}

QuasipotentialTable pairwise_costs(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                   const std::vector<State>& targets, const PairOptions& opts, Exec exec) {
  CostCache cache;
  return pairwise_costs(m, sets, targets, opts, exec, cache);
}

QuasipotentialTable pairwise_costs(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                   const std::vector<State>& targets, const PairOptions& opts, Exec exec,
                                   CostCache& cache) {
  if (sets.empty()) throw std::invalid_argument("pairwise_costs needs at least one critical set");
  const int L = static_cast<int>(sets.size());
  const int Z = static_cast<int>(targets.size());

  QuasipotentialTable table;
  table.L = L;
  table.eta = m.eta;
  table.V = Mat::Zero(L, L);
  table.V_to_target = Mat::Constant(L, Z, kInfiniteAction);
  table.targets = targets;
  for (const auto& s : sets) table.g_values.push_back(s.g_value);

  struct Job {
    int from;
    int to;
    bool is_target;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      if (i != j) jobs.push_back({i, j, false});
    }
  }
  for (int i = 0; i < L; ++i) {
    for (int z = 0; z < Z; ++z) jobs.push_back({i, z, true});
  }

  std::vector<CostEntry> results(jobs.size());
  for_each_index(static_cast<long>(jobs.size()), exec, [&](long k) {
    const Job& job = jobs[k];
    if (const CostEntry* hit = cache.find(job.from, job.to, job.is_target)) {
      results[k] = *hit;
      results[k].via = -1;
      return;
    }
    const State& target = job.is_target ? targets[job.to] : sets[job.to].point;
    const PairResult r = quasipotential_pair(m, sets[job.from].point, target, opts);
    results[k] = {job.from, job.to, r.value, r.T_star, r.converged, r.best.endpoint_gap};
  });

  cache = CostCache{};
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& e = results[k];
    (jobs[k].is_target ? cache.targets : cache.pairs).push_back(e);
    const double v = e.converged ? e.value : kInfiniteAction;
    if (jobs[k].is_target) {
      table.V_to_target(e.from, e.to) = v;
      table.target_entries.push_back(e);
    } else {
      table.V(e.from, e.to) = v;
      table.pair_entries.push_back(e);
    }
  }
  if (opts.triangle_closure) close_under_concatenation(table);
  return table;
}

}  // namespace heatchain
