#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "heatchain/action.hpp"
#include "heatchain/dynamics.hpp"
#include "heatchain/errors.hpp"
#include "heatchain/execution.hpp"
#include "heatchain/model.hpp"
#include "heatchain/qtable.hpp"

namespace heatchain {

/// Initial control for the optimiser.
/// reversed_flow: time reversal of the zero-temperature relaxation from J(y), nudged towards x;
///   exact for uphill paths at eta = 0 up to the endpoint mismatch.
/// forward_flow: relaxation from x nudged towards y (a downhill guide).
/// Flow guides also seed the transcription states; both are bent linearly to hit x and y.
enum class MamInit { zero_control, linear_r_interpolation, warm_start, reversed_flow, forward_flow };

std::string_view to_string(MamInit init);
MamInit parse_mam_init(std::string_view name);

/// shooting: L-BFGS on the control grid with the adjoint gradient.
/// transcription: states and controls as unknowns with RK4 defects as penalised residuals,
/// solved by Levenberg-Marquardt, then polished by shooting. Needed on long horizons of
/// weakly damped chains, where single shooting stalls.
enum class MamMethod { shooting, transcription };

/// Minimise the action of paths from x to y in time T over a control grid with N segments.
struct MamProblem {
  State x;
  State y;
  double T = 1.0;
  int N = 64;
  MamInit init = MamInit::linear_r_interpolation;
  /// Control used when init == warm_start; resampled to the N + 1 grid (end-aligned in time).
  Mat warm_start;
  /// Size of the nudge applied to the start of flow guides.
  double guide_offset = 1e-3;
};

/// Initial control (N + 1 rows) and, for flow guides, the guide states (N + 1 rows).
struct InitialGuess {
  Mat control;
  Mat states;
};

InitialGuess initial_guess(const ModelParams& m, const MamProblem& prob);

struct MamOptions {
  /// Endpoint penalty weights tried in order until the endpoint gap is within gap_tol.
  std::vector<double> penalty_schedule{1e2, 1e3, 1e4, 1e5};
  double gap_tol = 1e-4;
  /// L-BFGS iteration cap per penalty stage.
  int max_iterations = 2000;
  double gradient_tol = 1e-9;
  double function_tol = 1e-15;
  int lbfgs_rank = 20;

  MamMethod method = MamMethod::shooting;
  /// Defect weights of the transcription stages (residual scale sqrt(weight)).
  std::vector<double> defect_weights{1e4, 1e6, 1e8};
  int lm_iterations = 200;
  /// Penalty schedule of the shooting polish after transcription.
  std::vector<double> polish_penalties{1e4, 1e5};
};

struct MamResult {
  ControlPath control;
  /// Action (1/2) int |u|^2 of the returned control, without the penalty.
  double value = 0.0;
  /// |phi(T) - y|; the endpoint is never projected onto y.
  double endpoint_gap = 0.0;
  bool converged = false;
  int iterations = 0;
  double penalty = 0.0;
  std::string message;
};

/// Thrown when the objective turns non-finite; carries the offending control.
class MamError : public NumericalError {
 public:
  MamError(const std::string& what, Mat control) : NumericalError(what), control_(std::move(control)) {}
  const Mat& control() const { return control_; }

 private:
  Mat control_;
};

/// J(u) = (1/2) trapezoid |u|^2 + penalty |phi_u(T) - y|^2 with its exact discrete adjoint gradient.
/// Parameters are the control grid flattened row-major ((N + 1) x 2d).
class ActionObjective {
 public:
  ActionObjective(const ModelParams& m, State x, State y, double T, int N, double penalty);

  int num_parameters() const { return (N_ + 1) * 2 * m_->d; }
  double evaluate(const double* u, double* grad) const;
  double evaluate(const Vec& u, Vec* grad) const;
  double penalty() const { return penalty_; }
  void set_penalty(double p) { penalty_ = p; }

 private:
  const ModelParams* m_;
  State x_;
  State y_;
  double T_;
  int N_;
  double penalty_;
};

Mat flatten_control(const Mat& u);
Mat unflatten_control(const double* data, int rows, int cols);

/// Control for the initial guess that moves r linearly from x to y (p, q interpolated only
/// to evaluate the bath force).
Mat linear_r_control(const ModelParams& m, const State& x, const State& y, double T, int N);

/// Resamples a control from horizon T_old to T_new on N + 1 nodes, aligning the end times
/// (extra time at the start gets zero control).
Mat resample_control(const Mat& u, double T_old, double T_new, int N);

MamResult minimize_action_T(const ModelParams& m, const MamProblem& prob, const MamOptions& opts = {});

struct PairOptions {
  std::vector<double> T_grid{1, 2, 4, 8, 16, 32, 64};
  /// Minimum number of segments; raised so that T / N <= max_dt.
  int N = 64;
  double max_dt = 0.1;
  bool refine = true;
  /// Also solve from a cold start at every T and keep the lower value; a warm start that
  /// loses by more than 1e-9 is counted in PairResult::warm_start_flags.
  bool check_warm_start = true;
  /// Cold starts tried at every T; the best result is kept.
  std::vector<MamInit> cold_inits{MamInit::linear_r_interpolation};
  MamOptions mam;
  /// Replace V(i, j) by min_k V(i, k) + V(k, j) (paths can be concatenated, so the cost obeys
  /// the triangle inequality). Recovers well-to-well costs that no single solve reaches.
  bool triangle_closure = true;
};

struct PairSolve {
  double T = 0.0;
  int N = 0;
  double value = 0.0;
  double endpoint_gap = 0.0;
  bool converged = false;
};

struct PairResult {
  double value = kInfiniteAction;
  double T_star = 0.0;
  bool converged = false;
  MamResult best;
  /// Value against T, in the order solved (grid first, then refinement points).
  std::vector<PairSolve> curve;
  int warm_start_flags = 0;
};

int segments_for(double T, const PairOptions& opts);

/// V(x, y) = inf over T of V_T(x, y), approximated on a geometric T grid with warm starts.
PairResult quasipotential_pair(const ModelParams& m, const State& x, const State& y, const PairOptions& opts = {});

/// Floyd-Warshall closure of the pair costs, then of the target costs through every set.
void close_under_concatenation(QuasipotentialTable& table);

/// V between all ordered pairs of critical sets and from every set to each target point.
/// Non-converged solves are stored as missing (+infinity) with their diagnostics.
QuasipotentialTable pairwise_costs(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                   const std::vector<State>& targets, const PairOptions& opts = {},
                                   Exec exec = Exec::parallel);

/// Raw solver results before closure, keyed by (from, to, kind). Used to resume a run.
struct CostCache {
  std::vector<CostEntry> pairs;
  std::vector<CostEntry> targets;
  /// Converged entry for the job, or nullptr.
  const CostEntry* find(int from, int to, bool is_target) const;
};

/// As above, but converged entries found in `cache` are reused instead of solved. On return
/// `cache` holds the raw result of every job.
QuasipotentialTable pairwise_costs(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                   const std::vector<State>& targets, const PairOptions& opts, Exec exec,
                                   CostCache& cache);

}  // namespace heatchain
