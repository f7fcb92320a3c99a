#pragma once

#include <cstdint>

#include <limits>
#include <optional>

#include "heatchain/model.hpp"

namespace heatchain {

/// Value used for the action of paths that violate the Hamiltonian constraints.
inline constexpr double kInfiniteAction = std::numeric_limits<double>::infinity();

/// Uniform-grid control u(t) in R^{2d} with the trajectory it induces.
/// Row k of `u` and `states` belongs to times[k].
struct ControlPath {
  int n = 0;
  int d = 0;
  Vec times;
  Mat u;
  Mat states;
  /// (1/2) * trapezoid(|u|^2)
  double action = 0.0;

  int segments() const { return static_cast<int>(times.size()) - 1; }
  double horizon() const { return times[times.size() - 1] - times[0]; }
};

/// A candidate path given only by its states; row k of `states` belongs to times[k].
/// (n, d) is the State layout of each row.
struct PathRecord {
  int n = 0;
  int d = 0;
  Vec times;
  Mat states;
};

PathRecord to_path_record(const ControlPath& cp);
State state_at(const ModelParams& m, const PathRecord& path, Eigen::Index k);

/// (1/2) trapezoid(|u|^2) on a uniform grid with spacing h.
double control_energy(const Mat& u, double h);

/// Integrates q' = grad_p G, p' = -grad_q G, r' = -gamma lambda2 grad_r G + sqrt(2 gamma lambda2 D) u
/// with RK4 on the uniform grid of `u` (u.rows() - 1 segments over [0, T]); controls are
/// interpolated linearly inside a step.
ControlPath integrate_controlled(const ModelParams& m, const State& x0, const Mat& u, double T);

/// Default per-node tolerance for the Hamiltonian constraints: 10 h (1 + |grad G(x_k)|).
struct ConstraintTolerance {
  std::optional<double> absolute;
  double factor = 10.0;
};

/// Rate functional of a path: (1 / 4 gamma lambda2) int (r' + gamma lambda2 grad_r G) D^{-1} (...) dt,
/// or kInfiniteAction when q' = p, p' = -grad_q G fail beyond tolerance. Derivatives are
/// second-order finite differences on the (possibly non-uniform) grid; trapezoidal quadrature.
double eval_action_path(const ModelParams& m, const PathRecord& path, const ConstraintTolerance& tol = {});

/// Controls that reproduce the r-component of a path: u = sqrt(2 gamma lambda2 D)^{-1} (r' + gamma lambda2 grad_r G),
/// one row per node, with the same finite differences as eval_action_path.
Mat path_controls(const ModelParams& m, const PathRecord& path);

/// Largest per-node violation of the Hamiltonian constraints, in the inf-norm.
double constraint_residual(const ModelParams& m, const PathRecord& path);

/// t -> J path(T - t) with J(p, q, r) = (-p, q, r).
PathRecord time_reverse(const PathRecord& path);
PathRecord time_reverse(const ControlPath& path);

struct EntropyFlows {
  double f1 = 0.0;     // p_1 . (r_1 - lambda2 q_1)
  double fn = 0.0;     // p_n . (r_n - lambda2 q_n)
  double theta = 0.0;  // -F1/(1+eta) - Fn/(1-eta)
};

EntropyFlows entropy_flows(const ModelParams& m, const State& x);

/// Normalisation of the boundary term: R(x) = c * sum_i D_i^{-1} |r_i / lambda - lambda q_i|^2.
/// c = 1/2 is the value for which the reversal identity closes under grid refinement
/// (see tests/test_action.cpp, which rules out 1 and 1/4).
inline constexpr double kBoundaryRFactor = 0.5;

double boundary_R(const ModelParams& m, const State& x, double factor = kBoundaryRFactor);

/// Terms of the path-reversal identity
///   I(phi) = I(reversed phi) + R(y) - R(x) - int Theta dt    (eta != 0)
///   I(phi) = I(reversed phi) + G(y) - G(x)                    (eta == 0)
struct ReversalReport {
  bool equilibrium_branch = false;
  double action_forward = 0.0;
  double action_reversed = 0.0;
  /// R(y) - R(x) or G(y) - G(x)
  double boundary_term = 0.0;
  /// int Theta dt (zero on the equilibrium branch)
  double theta_integral = 0.0;
  double residual = 0.0;
};

ReversalReport check_reversal_identity(const ModelParams& m, const ControlPath& cp,
                                       double r_factor = kBoundaryRFactor);

/// u_j(t) = sum_k amp(j, k) sin(k pi t / T + phase(j, k)), k = 1..modes. A fixed function of t,
/// so the same control can be sampled on grids of any resolution.
struct SmoothControl {
  double T = 1.0;
  Mat amp;
  Mat phase;
};

/// Gaussian amplitudes with standard deviation amplitude / k and uniform phases, drawn from seed.
SmoothControl random_smooth_control(const ModelParams& m, double T, std::uint64_t seed, int modes = 3,
                                    double amplitude = 1.0);
/// Values on N + 1 uniform nodes of [0, T].
Mat sample_control(const SmoothControl& c, int N);

/// Reversal report for the path driven by c from x0, once per grid size in `segments`.
std::vector<ReversalReport> reversal_refinement(const ModelParams& m, const State& x0, const SmoothControl& c,
                                                const std::vector<int>& segments,
                                                double r_factor = kBoundaryRFactor);

}  // namespace heatchain
