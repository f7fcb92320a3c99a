#pragma once

#include <cstdint>
#include <vector>

#include "heatchain/dynamics.hpp"
#include "heatchain/execution.hpp"
#include "heatchain/model.hpp"
#include "heatchain/region.hpp"
#include "heatchain/sde.hpp"

namespace heatchain {

/// Settings shared by the stationary-trajectory estimators.
struct SamplingOptions {
  double T_burn = 50.0;
  double T_sample = 1000.0;
  double h = 0.01;
  int replicas = 8;
  std::uint64_t seed = 0;
  SdeScheme scheme = SdeScheme::semi_implicit;
  double blowup_bound = 1e6;
  /// Time over which successive samples are treated as correlated when a region is never
  /// visited (only used for the zero-hit upper bound).
  double decorrelation_time = 1.0;
};

struct MuEstimate {
  double mu_hat = 0.0;
  double stderr = 0.0;
  /// Grid points inside the region, summed over replicas.
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  /// Set when hits == 0: a 95% upper bound (rule of three over decorrelated samples).
  double upper_bound = 0.0;
  /// Per-replica occupation fractions.
  std::vector<double> per_replica;
};

/// Occupation fractions of each region after burn-in, averaged over replicas started at x0.
/// The standard error is the replica spread divided by sqrt(replicas).
std::vector<MuEstimate> estimate_mu(const ModelParams& m, const State& x0, const std::vector<Region>& regions,
                                    const SamplingOptions& opts, Exec exec = Exec::parallel);
MuEstimate estimate_mu(const ModelParams& m, const State& x0, const Region& region, const SamplingOptions& opts,
                       Exec exec = Exec::parallel);

/// 10 x the zero-temperature time for x0 to be captured by a critical set (at least `floor`).
double default_burn_in(const ModelParams& m, const std::vector<CriticalSet>& sets, const State& x0,
                       double floor = 1.0);

struct CycleOptions {
  double rho = 0.1;
  double rho_prime = 0.3;
  double h = 0.01;
  /// Completed cycles to collect, split evenly across replicas.
  int cycles = 1000;
  int replicas = 8;
  std::uint64_t seed = 0;
  /// Longest admissible cycle; longer cycles are discarded and counted as timeouts.
  double cycle_horizon = 1e4;
  /// Fatal when timeouts exceed this fraction of attempted cycles.
  double max_timeout_fraction = 0.05;
  SdeScheme scheme = SdeScheme::semi_implicit;
  double blowup_bound = 1e6;
};

struct CycleEstimate {
  /// Ratio estimator of mu(D): sum of time in D over sum of cycle lengths.
  double mu_hat = 0.0;
  double stderr = 0.0;
  /// Mean time in D per cycle (nu(D)) and mean cycle length (nu(X)).
  double nu_region = 0.0;
  double nu_total = 0.0;
  int cycles = 0;
  int timeouts = 0;
  /// Fraction of the cycle time spent inside B(rho_prime).
  double fraction_in_outer = 0.0;
};

/// Cycle representation of the invariant measure. A cycle starts on entry to B(rho), the
/// union of rho-balls around the critical sets; it continues until the path has left
/// B(rho_prime) and re-entered B(rho). The first, incomplete cycle of each replica is
/// discarded. The standard error uses the delta method over cycles.
CycleEstimate estimate_nu_cycle(const ModelParams& m, const std::vector<CriticalSet>& sets, const Region& region,
                                const CycleOptions& opts, Exec exec = Exec::parallel);

/// Affine fit of eps log mu_hat against eps; the intercept estimates
/// lim eps log mu(D) = -inf_D W.
struct ScalingFit {
  std::vector<double> eps_grid;
  std::vector<double> log_mu;  // eps log mu_hat
  std::vector<double> log_mu_stderr;
  double extrapolated_limit = 0.0;
  double slope = 0.0;
  /// Parametric bootstrap standard error of the intercept.
  double stderr = 0.0;
  /// Grid points dropped because mu_hat == 0.
  std::vector<double> excluded_eps;
};

struct ScalingInput {
  double eps = 0.0;
  double mu_hat = 0.0;
  double stderr = 0.0;
};

/// Needs eps strictly decreasing and at least 3 points with mu_hat > 0.
ScalingFit fit_scaling(const std::vector<ScalingInput>& points, std::uint64_t seed = 0, int bootstrap = 2000);

struct HittingSummary {
  double mean = 0.0;
  double stderr = 0.0;
  int hits = 0;
  int timeouts = 0;
};

/// Mean and standard error of the finite hitting times; timeouts are counted, not averaged.
HittingSummary summarize_hitting(const std::vector<HittingRecord>& records);

struct ArrheniusInput {
  double eps = 0.0;
  double mean_time = 0.0;
  double stderr = 0.0;
};

/// OLS of log(mean time) against 1/eps. The slope estimates the barrier when
/// mean time ~ C exp(barrier / eps). `prefactor_slope` fits log(mean time / eps) instead,
/// the form of weakly damped (energy-diffusion limited) escape.
struct ArrheniusFit {
  std::vector<double> inv_eps;
  std::vector<double> log_time;
  std::vector<double> log_time_stderr;
  double slope = 0.0;
  double intercept = 0.0;
  /// Parametric bootstrap standard error of the slope.
  double stderr = 0.0;
  double prefactor_slope = 0.0;
};

/// Needs at least 2 points with positive mean times.
ArrheniusFit fit_arrhenius(const std::vector<ArrheniusInput>& points, std::uint64_t seed = 0, int bootstrap = 2000);

struct EntropyEstimate {
  double sigma_hat = 0.0;
  double stderr = 0.0;
  std::vector<double> per_replica;
};

/// Time average of the entropy production Sigma = Theta / eps along stationary trajectories.
EntropyEstimate mean_entropy_production(const ModelParams& m, const State& x0, const SamplingOptions& opts,
                                        Exec exec = Exec::parallel);

}  // namespace heatchain
