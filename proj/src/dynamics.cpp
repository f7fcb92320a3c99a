#include "heatchain/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
  }
  return "unknown";
}

void rk4_step(const ModelParams& m, const Vec& x, double h, Vec& out, std::vector<Vec>& work) {
  Vec& k1 = work[0];
  Vec& k2 = work[1];
  Vec& k3 = work[2];
  Vec& k4 = work[3];
  Vec& y = work[4];
  kernel::drift(m, x, k1);
  y = x + (0.5 * h) * k1;
  kernel::drift(m, y, k2);
  y = x + (0.5 * h) * k2;
  kernel::drift(m, y, k3);
  y = x + h * k3;
  kernel::drift(m, y, k4);
  out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

std::vector<Vec> make_work(const ModelParams& m, int count = 5) { return std::vector<Vec>(count, Vec(m.dim())); }

int grid_segments(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0) || h > T * (1.0 + 1e-12)) {
    throw std::invalid_argument(fmt::format("need T > 0 and 0 < h <= T (T={}, h={})", T, h));
  }
  return std::max(1, static_cast<int>(std::lround(T / h)));
}

}  // namespace

FlowPath integrate_zero_T(const ModelParams& m, const State& x0, double T, double h) {
  check_dims(m, x0);
  const int steps = grid_segments(T, h);
  const double dt = T / steps;
  FlowPath path;
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  path.g_values.reserve(steps + 1);

  auto work = make_work(m);
  Vec x = x0.vec();
  Vec next(m.dim());
  path.times.push_back(0.0);
  path.states.push_back(x0);
  path.g_values.push_back(kernel::G(m, x));
  for (int k = 1; k <= steps; ++k) {
    rk4_step(m, x, dt, next, work);
    if (!next.allFinite()) throw NumericalError(fmt::format("zero-temperature flow blew up at t = {}", k * dt));
    x.swap(next);
    path.times.push_back(k == steps ? T : k * dt);
    path.states.emplace_back(m.n, m.d, x);
    path.g_values.push_back(kernel::G(m, x));
  }
  return path;
}

std::vector<State> default_seeds(const ModelParams& m, double box, int per_axis) {
  const int dn = m.d * m.n;
  per_axis = std::max(per_axis, 1);
  std::vector<State> seeds;
  std::vector<int> idx(dn, 0);
  while (true) {
    State s(m.n, m.d);
    for (int k = 0; k < dn; ++k) {
      s.q()[k] = per_axis == 1 ? 0.0 : -box + 2.0 * box * idx[k] / (per_axis - 1);
    }
    s.r().head(m.d) = m.lambda2 * s.q().head(m.d);
    s.r().tail(m.d) = m.lambda2 * s.q().tail(m.d);
    seeds.push_back(std::move(s));
    int k = 0;
    while (k < dn && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dn) break;
  }
  return seeds;
}

namespace {

struct NewtonOutcome {
  Vec x;
  int steps = 0;
};

std::optional<NewtonOutcome> damped_newton(const ModelParams& m, const State& seed, const CriticalOptions& opts) {
  Vec x = seed.vec();
  Vec g(m.dim());
  Vec trial(m.dim());
  Vec g_trial(m.dim());
  kernel::grad_G(m, x, g);
  double gnorm = g.norm();
  for (int step = 0; step <= opts.max_newton_steps; ++step) {
    if (gnorm <= opts.newton_tol) return NewtonOutcome{x, step};
    if (step == opts.max_newton_steps) break;
    const Mat h = hess_G(m, State(m.n, m.d, x));
    const Vec dir = h.fullPivLu().solve(-g);
    if (!dir.allFinite()) return std::nullopt;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-10) {
      trial = x + alpha * dir;
      kernel::grad_G(m, trial, g_trial);
      const double tn = g_trial.norm();
      if (std::isfinite(tn) && tn < (1.0 - 1e-4 * alpha) * gnorm) {
        x.swap(trial);
        g.swap(g_trial);
        gnorm = tn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // A full step may still land inside tolerance when gnorm is at round-off level.
      return gnorm <= opts.newton_tol ? std::optional<NewtonOutcome>(NewtonOutcome{x, step}) : std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<CriticalSet> find_critical_points(const ModelParams& m, const std::vector<State>& seeds,
                                              const CriticalOptions& opts, Exec exec) {
  if (seeds.empty()) throw std::invalid_argument("find_critical_points needs at least one seed");
  for (const auto& s : seeds) check_dims(m, s);

  std::vector<std::optional<NewtonOutcome>> outcomes(seeds.size());
  for_each_index(static_cast<long>(seeds.size()), exec,
                 [&](long i) { outcomes[i] = damped_newton(m, seeds[i], opts); });

  std::vector<CriticalSet> sets;
  for (const auto& outcome : outcomes) {
    if (!outcome) continue;
    Vec x = outcome->x;
    x.head(m.d * m.n).setZero();  // Newton solves the identity p-block exactly
    const bool duplicate = std::any_of(sets.begin(), sets.end(), [&](const CriticalSet& c) {
      return (c.point.vec() - x).norm() < opts.dedup_radius;
    });
    if (duplicate) continue;
    CriticalSet c;
    c.point = State(m.n, m.d, x);
    c.g_value = kernel::G(m, x);
    c.newton_steps = outcome->steps;
    Eigen::SelfAdjointEigenSolver<Mat> eig(effective_hessian(m, c.point.q()));
    const Vec ev = eig.eigenvalues();
    c.hessian_spectrum.assign(ev.data(), ev.data() + ev.size());
    for (double v : c.hessian_spectrum) {
      if (std::abs(v) < opts.degenerate_tol) {
        throw ModelError(fmt::format(
            "degenerate critical point at G = {} (Hessian eigenvalue {}); critical sets must be isolated",
            c.g_value, v));
      }
    }
    const bool all_pos = ev.minCoeff() > 0.0;
    const bool all_neg = ev.maxCoeff() < 0.0;
    c.stability = all_pos ? Stability::stable : (all_neg ? Stability::unstable : Stability::saddle);
    sets.push_back(std::move(c));
  }
  if (sets.empty()) throw NumericalError("no critical point converged from the given seeds");

  std::sort(sets.begin(), sets.end(), [](const CriticalSet& a, const CriticalSet& b) {
    if (std::abs(a.g_value - b.g_value) > 1e-9 * (1.0 + std::abs(a.g_value))) return a.g_value < b.g_value;
    const auto& xa = a.point.vec();
    const auto& xb = b.point.vec();
    return std::lexicographical_compare(xa.data(), xa.data() + xa.size(), xb.data(), xb.data() + xb.size());
  });
  for (std::size_t i = 0; i < sets.size(); ++i) sets[i].id = static_cast<int>(i);
  return sets;
}

namespace {

std::optional<int> captured_by(const std::vector<CriticalSet>& sets, const Vec& x, double radius) {
  for (const auto& c : sets) {
    if ((c.point.vec() - x).norm() <= radius) return c.id;
  }
  return std::nullopt;
}

}  // namespace

OmegaLimitResult omega_limit(const ModelParams& m, const std::vector<CriticalSet>& sets, const State& x0,
                             const OmegaLimitOptions& opts) {
  check_dims(m, x0);
  OmegaLimitResult res;
  Vec x = x0.vec();
  double g = kernel::G(m, x);
  res.g_start = g;
  if ((res.id = captured_by(sets, x, opts.capture_radius))) return res;

  auto work = make_work(m);
  Vec next(m.dim());
  const auto steps = static_cast<long>(std::ceil(opts.horizon / opts.h));
  for (long k = 1; k <= steps; ++k) {
    rk4_step(m, x, opts.h, next, work);
    if (!next.allFinite()) throw NumericalError("zero-temperature flow blew up during omega-limit search");
    x.swap(next);
    const double g_next = kernel::G(m, x);
    res.max_g_increase = std::max(res.max_g_increase, g_next - g);
    g = g_next;
    res.time = k * opts.h;
    if ((res.id = captured_by(sets, x, opts.capture_radius))) return res;
  }
  return res;
}

std::vector<OmegaLimitResult> omega_limit_batch(const ModelParams& m, const std::vector<CriticalSet>& sets,
                                                const std::vector<State>& starts, const OmegaLimitOptions& opts,
                                                Exec exec) {
  std::vector<OmegaLimitResult> out(starts.size());
  for_each_index(static_cast<long>(starts.size()), exec,
                 [&](long i) { out[i] = omega_limit(m, sets, starts[i], opts); });
  return out;
}

}  // namespace heatchain
