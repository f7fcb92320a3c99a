#include "heatchain/sde.hpp"

#include <cmath>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

namespace {

// Shared update so sde_step and SdeIntegrator cannot drift apart.
void step_in_place(const ModelParams& m, Vec& x, Vec& f, double h, const Vec& noise_scale,
                   std::span<const double> gauss, SdeScheme scheme) {
  const int off = m.r_offset();
  const int nr = 2 * m.d;
  kernel::drift(m, x, f);
  if (scheme == SdeScheme::euler_maruyama) {
    x.noalias() += h * f;
    for (int j = 0; j < nr; ++j) x[off + j] += noise_scale[j] * gauss[j];
    return;
  }
  // semi-implicit: symplectic Euler for (p, q) (kick with the old force, drift with the new
  // momentum), then the linear relaxation of r taken implicitly with the new q.
  const int dn = m.n * m.d;
  x.head(dn).noalias() += h * f.head(dn);
  x.segment(dn, dn).noalias() += h * x.head(dn);
  const double gh = h * m.gamma;
  for (int j = 0; j < m.d; ++j) {
    const double q1 = x[dn + j];
    const double qn = x[2 * dn - m.d + j];
    x[off + j] = (x[off + j] + gh * m.lambda2 * q1 + noise_scale[j] * gauss[j]) / (1.0 + gh);
    x[off + m.d + j] = (x[off + m.d + j] + gh * m.lambda2 * qn + noise_scale[m.d + j] * gauss[m.d + j]) / (1.0 + gh);
  }
}

Vec scaled_noise(const ModelParams& m, double h) { return std::sqrt(m.eps * h) * noise_diagonal(m); }

}  // namespace

State sde_step(const ModelParams& m, const State& x, double h, std::span<const double> gauss, SdeScheme scheme) {
  check_dims(m, x);
  if (!(h > 0.0)) throw std::invalid_argument("sde_step needs h > 0");
  if (gauss.size() != static_cast<std::size_t>(2 * m.d)) {
    throw DimensionError(fmt::format("sde_step needs {} gaussian draws, got {}", 2 * m.d, gauss.size()));
  }
  Vec v = x.vec();
  Vec f(m.dim());
  step_in_place(m, v, f, h, scaled_noise(m, h), gauss, scheme);
  if (!v.allFinite()) throw NumericalError("sde_step produced a non-finite state");
  return State(m.n, m.d, std::move(v));
}

SdeIntegrator::SdeIntegrator(const ModelParams& m, const State& x0, double h, NormalStream noise, SdeScheme scheme,
                             double blowup_bound)
    : m_(&m),
      h_(h),
      noise_(noise),
      scheme_(scheme),
      blowup_(blowup_bound),
      x_(x0.vec()),
      f_(m.dim()),
      noise_scale_(scaled_noise(m, h)),
      gauss_(2 * m.d) {
  check_dims(m, x0);
  if (!(h > 0.0)) throw std::invalid_argument("SdeIntegrator needs h > 0");
}

void SdeIntegrator::advance() {
  noise_.normals(step_, gauss_);
  step_in_place(*m_, x_, f_, h_, noise_scale_, gauss_, scheme_);
  ++step_;
  const double amax = x_.cwiseAbs().maxCoeff();
  if (!(amax <= blowup_)) {
    throw NumericalError(fmt::format("trajectory left |x|_inf <= {} at t = {} (seed {}, replica {})", blowup_,
                                     time(), noise_.seed(), noise_.replica()));
  }
}

SdeRun simulate(const ModelParams& m, const State& x0, const SimulateOptions& opts) {
  if (!(opts.T > 0.0)) throw std::invalid_argument("simulate needs T > 0");
  if (opts.thin < 1) throw std::invalid_argument("simulate needs thin >= 1");
  SdeIntegrator integ(m, x0, opts.h, NormalStream(opts.seed, opts.replica), opts.scheme, opts.blowup_bound);
  SdeRun run;
  run.seed = opts.seed;
  run.replica = opts.replica;
  run.h = opts.h;

  std::vector<char> inside(opts.regions.size());
  for (std::size_t i = 0; i < opts.regions.size(); ++i) inside[i] = opts.regions[i].contains(integ.state());
  auto record = [&] {
    run.trajectory.times.push_back(integ.time());
    run.trajectory.states.emplace_back(m.n, m.d, integ.state());
    run.trajectory.g_values.push_back(kernel::G(m, integ.state()));
  };
  if (opts.store_trajectory) record();

  const auto steps = static_cast<std::uint64_t>(std::llround(opts.T / opts.h));
  for (std::uint64_t k = 1; k <= steps; ++k) {
    integ.advance();
    for (std::size_t i = 0; i < opts.regions.size(); ++i) {
      const bool now = opts.regions[i].contains(integ.state());
      if (now && !inside[i]) run.hit_events.push_back({integ.time(), static_cast<int>(i)});
      inside[i] = now;
    }
    if (opts.store_trajectory && k % static_cast<std::uint64_t>(opts.thin) == 0) record();
  }
  return run;
}

std::optional<double> hitting_time(const ModelParams& m, const State& x0, const Region& target, double h,
                                   std::uint64_t seed, double horizon, std::uint32_t replica, SdeScheme scheme) {
  if (target.contains(x0)) return 0.0;
  SdeIntegrator integ(m, x0, h, NormalStream(seed, replica), scheme);
  const auto steps = static_cast<std::uint64_t>(std::ceil(horizon / h));
  for (std::uint64_t k = 1; k <= steps; ++k) {
    integ.advance();
    if (target.contains(integ.state())) return integ.time();
  }
  return std::nullopt;
}

std::vector<HittingRecord> hitting_times(const ModelParams& m, const State& x0, const Region& target, double h,
                                         std::uint64_t seed, double horizon, int count, Exec exec,
                                         SdeScheme scheme) {
  std::vector<HittingRecord> out(static_cast<std::size_t>(std::max(count, 0)));
  for_each_index(static_cast<long>(out.size()), exec, [&](long i) {
    const auto rep = static_cast<std::uint32_t>(i);
    out[i] = {rep, seed, hitting_time(m, x0, target, h, seed, horizon, rep, scheme)};
  });
  return out;
}

}  // namespace heatchain
