#include "heatchain/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "heatchain/errors.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return out;
}

void check_sampling(const ModelParams& m, const SamplingOptions& opts) {
  if (!(m.eps > 0.0)) throw ModelError("stationary sampling needs eps > 0");
  if (!(opts.h > 0.0) || !(opts.T_sample > 0.0) || opts.T_burn < 0.0) {
    throw std::invalid_argument("sampling needs h > 0, T_sample > 0 and T_burn >= 0");
  }
  if (opts.replicas < 1) throw std::invalid_argument("sampling needs at least one replica");
}

std::uint64_t steps_for(double T, double h) { return static_cast<std::uint64_t>(std::llround(T / h)); }

}  // namespace

std::vector<MuEstimate> estimate_mu(const ModelParams& m, const State& x0, const std::vector<Region>& regions,
                                    const SamplingOptions& opts, Exec exec) {
  check_sampling(m, opts);
  check_dims(m, x0);
  const std::size_t R = static_cast<std::size_t>(opts.replicas);
  const std::size_t Z = regions.size();
  const std::uint64_t burn = steps_for(opts.T_burn, opts.h);
  const std::uint64_t sample = std::max<std::uint64_t>(1, steps_for(opts.T_sample, opts.h));

  // counts[rep][region]
  std::vector<std::vector<std::uint64_t>> counts(R, std::vector<std::uint64_t>(Z, 0));
  for_each_index(static_cast<long>(R), exec, [&](long rep) {
    SdeIntegrator integ(m, x0, opts.h, NormalStream(opts.seed, static_cast<std::uint32_t>(rep)), opts.scheme,
                        opts.blowup_bound);
    for (std::uint64_t k = 0; k < burn; ++k) integ.advance();
    auto& c = counts[static_cast<std::size_t>(rep)];
    for (std::uint64_t k = 0; k < sample; ++k) {
      integ.advance();
      for (std::size_t z = 0; z < Z; ++z) c[z] += regions[z].contains(integ.state()) ? 1 : 0;
    }
  });

  std::vector<MuEstimate> out(Z);
  const double decorrelated =
      std::max(1.0, static_cast<double>(R) * opts.T_sample / std::max(opts.decorrelation_time, opts.h));
  for (std::size_t z = 0; z < Z; ++z) {
    auto& e = out[z];
    e.per_replica.resize(R);
    for (std::size_t rep = 0; rep < R; ++rep) {
      e.hits += counts[rep][z];
      e.per_replica[rep] = static_cast<double>(counts[rep][z]) / static_cast<double>(sample);
    }
    e.samples = sample * R;
    const auto ms = mean_and_se(e.per_replica);
    e.mu_hat = ms.mean;
    e.stderr = ms.se;
    if (e.hits == 0) e.upper_bound = std::min(1.0, 3.0 / decorrelated);
  }
  return out;
}

MuEstimate estimate_mu(const ModelParams& m, const State& x0, const Region& region, const SamplingOptions& opts,
                       Exec exec) {
  return estimate_mu(m, x0, std::vector<Region>{region}, opts, exec).front();
}

double default_burn_in(const ModelParams& m, const std::vector<CriticalSet>& sets, const State& x0, double floor) {
  OmegaLimitOptions o;
  o.capture_radius = 1e-2;
  const auto res = omega_limit(m, sets, x0, o);
  const double t = res.id ? res.time : o.horizon;
  return std::max(floor, 10.0 * t);
}

namespace {

struct ReplicaCycles {
  std::vector<double> in_region;
  std::vector<double> length;
  double in_outer = 0.0;
  int timeouts = 0;
};

}  // namespace

CycleEstimate estimate_nu_cycle(const ModelParams& m, const std::vector<CriticalSet>& sets, const Region& region,
                                const CycleOptions& opts, Exec exec) {
  if (!(m.eps > 0.0)) throw ModelError("cycle estimator needs eps > 0");
  if (sets.empty()) throw std::invalid_argument("cycle estimator needs at least one critical set");
  if (!(opts.rho > 0.0 && opts.rho < opts.rho_prime)) throw std::invalid_argument("cycle estimator needs 0 < rho < rho'");
  if (!(opts.h > 0.0) || opts.cycles < 2 || opts.replicas < 1) {
    throw std::invalid_argument("cycle estimator needs h > 0, cycles >= 2, replicas >= 1");
  }
  const CriticalNeighbourhood inner(sets, opts.rho);
  const CriticalNeighbourhood outer(sets, opts.rho_prime);
  const auto start_it = std::min_element(sets.begin(), sets.end(), [](const CriticalSet& a, const CriticalSet& b) {
    return a.g_value < b.g_value;
  });
  const State x0 = start_it->point;
  const int per_replica = (opts.cycles + opts.replicas - 1) / opts.replicas;
  const auto horizon_steps = static_cast<std::uint64_t>(std::ceil(opts.cycle_horizon / opts.h));

  std::vector<ReplicaCycles> results(static_cast<std::size_t>(opts.replicas));
  for_each_index(opts.replicas, exec, [&](long rep) {
    auto& out = results[static_cast<std::size_t>(rep)];
    SdeIntegrator integ(m, x0, opts.h, NormalStream(opts.seed, static_cast<std::uint32_t>(rep)), opts.scheme,
                        opts.blowup_bound);
    // The cycle in progress starts on entry to B(rho); `left` marks that B(rho') has been exited.
    bool started = inner.contains(integ.state());
    bool left = false;
    bool discard = true;  // the first cycle does not start from the embedded stationary law
    double a = 0.0;
    double b = 0.0;
    double outer_time = 0.0;
    std::uint64_t cycle_steps = 0;
    while (static_cast<int>(out.length.size()) < per_replica) {
      const bool in_d = region.contains(integ.state());
      const bool in_outer = outer.contains(integ.state());
      integ.advance();
      if (started) {
        a += in_d ? opts.h : 0.0;
        b += opts.h;
        outer_time += in_outer ? opts.h : 0.0;
        ++cycle_steps;
      }
      const Vec& x = integ.state();
      if (started && !left && !outer.contains(x)) left = true;
      const bool enters_inner = inner.contains(x);
      if (started && left && enters_inner) {
        if (!discard) {
          out.in_region.push_back(a);
          out.length.push_back(b);
          out.in_outer += outer_time;
        }
        discard = false;
        a = b = outer_time = 0.0;
        cycle_steps = 0;
        left = false;
      } else if (!started && enters_inner) {
        started = true;
      } else if (started && cycle_steps >= horizon_steps) {
        ++out.timeouts;
        started = enters_inner;
        left = false;
        discard = true;
        a = b = outer_time = 0.0;
        cycle_steps = 0;
        const int attempted = static_cast<int>(out.length.size()) + out.timeouts;
        if (out.timeouts > 2 && out.timeouts > opts.max_timeout_fraction * attempted) {
          throw NumericalError(fmt::format("cycle estimator: {} of {} cycles timed out after {} (replica {})",
                                           out.timeouts, attempted, opts.cycle_horizon, rep));
        }
      }
    }
  });

  std::vector<double> as;
  std::vector<double> bs;
  double outer_total = 0.0;
  CycleEstimate e;
  for (const auto& r : results) {
    as.insert(as.end(), r.in_region.begin(), r.in_region.end());
    bs.insert(bs.end(), r.length.begin(), r.length.end());
    outer_total += r.in_outer;
    e.timeouts += r.timeouts;
  }
  const double N = static_cast<double>(as.size());
  const double A = std::accumulate(as.begin(), as.end(), 0.0);
  const double B = std::accumulate(bs.begin(), bs.end(), 0.0);
  e.cycles = static_cast<int>(as.size());
  e.nu_region = A / N;
  e.nu_total = B / N;
  e.mu_hat = A / B;
  e.fraction_in_outer = outer_total / B;
  double ss = 0.0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double z = as[i] - e.mu_hat * bs[i];
    ss += z * z;
  }
  e.stderr = std::sqrt(ss / (N - 1.0) / N) / e.nu_total;
  return e;
}

namespace {

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Line l;
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  return l;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<ScalingInput>& points, std::uint64_t seed, int bootstrap) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].eps < points[i - 1].eps)) throw std::invalid_argument("eps grid must be strictly decreasing");
  }
  ScalingFit fit;
  std::vector<double> log_mu;
  std::vector<double> rel_se;
  for (const auto& p : points) {
    if (!(p.eps > 0.0)) throw std::invalid_argument("eps grid must be positive");
    if (!(p.mu_hat > 0.0)) {
      fmt::print(stderr, "warning: mu_hat = 0 at eps = {}; excluded from the scaling fit\n", p.eps);
      fit.excluded_eps.push_back(p.eps);
      continue;
    }
    fit.eps_grid.push_back(p.eps);
    fit.log_mu.push_back(p.eps * std::log(p.mu_hat));
    fit.log_mu_stderr.push_back(p.eps * p.stderr / p.mu_hat);
    log_mu.push_back(std::log(p.mu_hat));
    rel_se.push_back(p.stderr / p.mu_hat);
  }
  if (fit.eps_grid.size() < 3) throw std::invalid_argument("scaling fit needs at least 3 points with mu_hat > 0");
  const Line l = ols(fit.eps_grid, fit.log_mu);
  fit.extrapolated_limit = l.intercept;
  fit.slope = l.slope;

  if (bootstrap > 1) {
    const NormalStream noise(derive_seed(seed, "fit_scaling"), 0);
    std::vector<double> z(fit.eps_grid.size());
    std::vector<double> y(fit.eps_grid.size());
    std::vector<double> icpt(static_cast<std::size_t>(bootstrap));
    for (int b = 0; b < bootstrap; ++b) {
      noise.normals(static_cast<std::uint64_t>(b), z);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = fit.eps_grid[i] * (log_mu[i] + rel_se[i] * z[i]);
      icpt[static_cast<std::size_t>(b)] = ols(fit.eps_grid, y).intercept;
    }
    const auto ms = mean_and_se(icpt);
    fit.stderr = ms.se * std::sqrt(static_cast<double>(bootstrap));
  }
  return fit;
}

HittingSummary summarize_hitting(const std::vector<HittingRecord>& records) {
  HittingSummary out;
  std::vector<double> times;
  for (const auto& r : records) {
    if (r.time) {
      times.push_back(*r.time);
    } else {
      ++out.timeouts;
    }
  }
  out.hits = static_cast<int>(times.size());
  if (!times.empty()) {
    const auto ms = mean_and_se(times);
    out.mean = ms.mean;
    out.stderr = ms.se;
  }
  return out;
}

ArrheniusFit fit_arrhenius(const std::vector<ArrheniusInput>& points, std::uint64_t seed, int bootstrap) {
  ArrheniusFit fit;
  std::vector<double> rel_se;
  std::vector<double> corrected;
  for (const auto& p : points) {
    if (!(p.eps > 0.0)) throw std::invalid_argument("temperatures must be positive");
    if (!(p.mean_time > 0.0)) continue;
    fit.inv_eps.push_back(1.0 / p.eps);
    fit.log_time.push_back(std::log(p.mean_time));
    fit.log_time_stderr.push_back(p.stderr / p.mean_time);
    corrected.push_back(std::log(p.mean_time / p.eps));
  }
  if (fit.inv_eps.size() < 2) throw std::invalid_argument("Arrhenius fit needs at least 2 positive mean times");
  const Line l = ols(fit.inv_eps, fit.log_time);
  fit.slope = l.slope;
  fit.intercept = l.intercept;
  fit.prefactor_slope = ols(fit.inv_eps, corrected).slope;
  if (bootstrap > 1) {
    const NormalStream noise(derive_seed(seed, "fit_arrhenius"), 0);
    std::vector<double> z(fit.inv_eps.size());
    std::vector<double> y(fit.inv_eps.size());
    std::vector<double> slopes(static_cast<std::size_t>(bootstrap));
    for (int b = 0; b < bootstrap; ++b) {
      noise.normals(static_cast<std::uint64_t>(b), z);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = fit.log_time[i] + fit.log_time_stderr[i] * z[i];
      slopes[static_cast<std::size_t>(b)] = ols(fit.inv_eps, y).slope;
    }
    fit.stderr = mean_and_se(slopes).se * std::sqrt(static_cast<double>(bootstrap));
  }
  return fit;
}

EntropyEstimate mean_entropy_production(const ModelParams& m, const State& x0, const SamplingOptions& opts,
                                        Exec exec) {
  check_sampling(m, opts);
  check_dims(m, x0);
  if (!(std::abs(m.eta) < 1.0)) throw ModelError("entropy production needs |eta| < 1");
  const std::uint64_t burn = steps_for(opts.T_burn, opts.h);
  const std::uint64_t sample = std::max<std::uint64_t>(1, steps_for(opts.T_sample, opts.h));
  const int d = m.d;
  const int last = (m.n - 1) * d;
  const int qo = m.n * d;
  const int ro = m.r_offset();
  const double c1 = 1.0 / (m.eps * (1.0 + m.eta));
  const double cn = 1.0 / (m.eps * (1.0 - m.eta));

  EntropyEstimate e;
  e.per_replica.resize(static_cast<std::size_t>(opts.replicas));
  for_each_index(opts.replicas, exec, [&](long rep) {
    SdeIntegrator integ(m, x0, opts.h, NormalStream(opts.seed, static_cast<std::uint32_t>(rep)), opts.scheme,
                        opts.blowup_bound);
    for (std::uint64_t k = 0; k < burn; ++k) integ.advance();
    // Time-centred flux: p after the step against (q, r) averaged over the step. Evaluating
    // everything at the step end leaves an O(h) bias that is visible at eta = 0.
    double acc = 0.0;
    Vec prev = integ.state();
    for (std::uint64_t k = 0; k < sample; ++k) {
      integ.advance();
      const Vec& x = integ.state();
      double f1 = 0.0;
      double fn = 0.0;
      for (int j = 0; j < d; ++j) {
        const double b1 = 0.5 * (x[ro + j] + prev[ro + j]) - 0.5 * m.lambda2 * (x[qo + j] + prev[qo + j]);
        const double bn = 0.5 * (x[ro + d + j] + prev[ro + d + j]) -
                          0.5 * m.lambda2 * (x[qo + last + j] + prev[qo + last + j]);
        f1 += x[j] * b1;
        fn += x[last + j] * bn;
      }
      acc += -c1 * f1 - cn * fn;
      prev = x;
    }
    e.per_replica[static_cast<std::size_t>(rep)] = acc / static_cast<double>(sample);
  });
  const auto ms = mean_and_se(e.per_replica);
  e.sigma_hat = ms.mean;
  e.stderr = ms.se;
  return e;
}

}  // namespace heatchain
