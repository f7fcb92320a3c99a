#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "heatchain/execution.hpp"
#include "heatchain/model.hpp"

namespace heatchain {

enum class Stability { stable, saddle, unstable };
std::string_view to_string(Stability s);

/// An isolated critical point of G standing in for a critical set K_i.
struct CriticalSet {
  int id = 0;
  State point;
  double g_value = 0.0;
  Stability stability = Stability::stable;
  /// Ascending eigenvalues of the effective-potential Hessian at the point.
  std::vector<double> hessian_spectrum;
  int newton_steps = 0;
};

/// Zero-temperature trajectory on a uniform grid.
struct FlowPath {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> g_values;
};

/// One classical RK4 step of x' = drift(x). `work` must hold 5 vectors of size m.dim().
void rk4_step(const ModelParams& m, const Vec& x, double h, Vec& out, std::vector<Vec>& work);

/// Integrates the zero-temperature flow on [0, T]. The step is adjusted to T / round(T / h).
/// Throws NumericalError on a non-finite state.
FlowPath integrate_zero_T(const ModelParams& m, const State& x0, double T, double h);

struct CriticalOptions {
  double newton_tol = 1e-10;
  double dedup_radius = 1e-5;
  int max_newton_steps = 200;
  /// Hessian eigenvalues below this magnitude mark a degenerate (non-isolated) critical set.
  double degenerate_tol = 1e-6;
};

/// Lattice of seeds in q-space over [-box, box]^{dn} with p = 0, r = lambda2 q on the boundary.
std::vector<State> default_seeds(const ModelParams& m, double box, int per_axis);

/// Damped Newton on grad G = 0 from every seed, deduplicated and sorted by G.
/// Seeds that fail to converge are skipped. Throws NumericalError when nothing converges
/// and ModelError when a critical point is degenerate.
std::vector<CriticalSet> find_critical_points(const ModelParams& m, const std::vector<State>& seeds,
                                              const CriticalOptions& opts = {}, Exec exec = Exec::parallel);

struct OmegaLimitOptions {
  double horizon = 2000.0;
  double h = 0.02;
  double capture_radius = 1e-3;
};

struct OmegaLimitResult {
  std::optional<int> id;
  /// Time at which the trajectory entered the capture ball (or the horizon).
  double time = 0.0;
  /// Largest one-step increase of G seen along the way (should be <= 0 up to rounding).
  double max_g_increase = 0.0;
  double g_start = 0.0;
};

/// Follows the zero-temperature flow from x0 until it is within capture_radius of a critical set.
OmegaLimitResult omega_limit(const ModelParams& m, const std::vector<CriticalSet>& sets, const State& x0,
                             const OmegaLimitOptions& opts = {});

std::vector<OmegaLimitResult> omega_limit_batch(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                                const std::vector<State>& starts, const OmegaLimitOptions& opts,
                                                Exec exec = Exec::parallel);

}  // namespace heatchain
