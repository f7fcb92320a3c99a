#include "heatchain/model.hpp"

#include <cmath>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

ModelParams ModelParams::make(int n, int d, PotentialSpec u1, PotentialSpec u2, double gamma, double lambda2,
                              double eps, double eta, Options opts) {
  if (n < 2) throw ModelError(fmt::format("n must be >= 2 (got {})", n));
  if (d < 1) throw ModelError(fmt::format("d must be >= 1 (got {})", d));
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ModelError("gamma must be finite and > 0");
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw ModelError("lambda2 must be finite and > 0");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ModelError("eps must be finite and >= 0");
  if (!(std::abs(eta) < 1.0)) throw ModelError(fmt::format("eta must satisfy |eta| < 1 (got {})", eta));

  ModelParams m;
  m.n = n;
  m.d = d;
  m.u1 = Potential(std::move(u1), d);
  m.u2 = Potential(std::move(u2), d);
  if (!m.u2.strictly_convex(opts.convexity_box, opts.convexity_grid)) {
    throw ModelError(fmt::format("pair potential u2 is not strictly convex on [-{0}, {0}]", opts.convexity_box));
  }
  m.gamma = gamma;
  m.lambda2 = lambda2;
  m.eps = eps;
  m.eta = eta;
  return m;
}

ModelParams ModelParams::with_temperature(double new_eps, double new_eta) const {
  if (!(new_eps >= 0.0) || !std::isfinite(new_eps)) throw ModelError("eps must be finite and >= 0");
  if (!(std::abs(new_eta) < 1.0)) throw ModelError(fmt::format("eta must satisfy |eta| < 1 (got {})", new_eta));
  ModelParams m = *this;
  m.eps = new_eps;
  m.eta = new_eta;
  return m;
}

std::pair<double, double> eps_eta_from_temperatures(double t1, double tn) {
  if (!(t1 >= 0.0) || !(tn >= 0.0) || !(t1 + tn > 0.0)) {
    throw ModelError("temperatures must be >= 0 and not both zero");
  }
  return {(t1 + tn) / 2.0, (t1 - tn) / (t1 + tn)};
}

State::State(int n, int d, Vec x) : n_(n), d_(d), x_(std::move(x)) {
  if (x_.size() != 2 * d * n + 2 * d) {
    throw DimensionError(fmt::format("state vector has length {} but n={}, d={} needs {}", x_.size(), n, d,
                                     2 * d * n + 2 * d));
  }
}

State reverse_momenta(const State& x) {
  State out = x;
  out.p() = -x.p();
  return out;
}

void check_dims(const ModelParams& m, const State& x) {
  if (x.n() != m.n || x.d() != m.d || x.size() != m.dim()) {
    throw DimensionError(fmt::format("state has n={}, d={} but model has n={}, d={}", x.n(), x.d(), m.n, m.d));
  }
}

namespace {

double potential_energy(const ModelParams& m, const Eigen::Ref<const Vec>& q) {
  const int d = m.d;
  double v = 0.0;
  for (int i = 0; i < m.n; ++i) v += m.u1.value(q.segment(d * i, d));
  Vec diff(d);
  for (int i = 0; i + 1 < m.n; ++i) {
    diff = q.segment(d * i, d) - q.segment(d * (i + 1), d);
    v += m.u2.value(diff);
  }
  return v;
}

Mat hess_V(const ModelParams& m, const Eigen::Ref<const Vec>& q) {
  const int d = m.d;
  Mat h = Mat::Zero(d * m.n, d * m.n);
  for (int i = 0; i < m.n; ++i) h.block(d * i, d * i, d, d) += m.u1.hessian(q.segment(d * i, d));
  for (int i = 0; i + 1 < m.n; ++i) {
    const Mat h2 = m.u2.hessian(q.segment(d * i, d) - q.segment(d * (i + 1), d));
    h.block(d * i, d * i, d, d) += h2;
    h.block(d * (i + 1), d * (i + 1), d, d) += h2;
    h.block(d * i, d * (i + 1), d, d) -= h2;
    h.block(d * (i + 1), d * i, d, d) -= h2;
  }
  return h;
}

}  // namespace

namespace kernel {

double G(const ModelParams& m, const Eigen::Ref<const Vec>& x) {
  const int d = m.d;
  const int dn = d * m.n;
  const auto p = x.segment(0, dn);
  const auto q = x.segment(dn, dn);
  const auto r1 = x.segment(2 * dn, d);
  const auto rn = x.segment(2 * dn + d, d);
  const double bath = r1.squaredNorm() / (2.0 * m.lambda2) - r1.dot(q.segment(0, d)) +
                      rn.squaredNorm() / (2.0 * m.lambda2) - rn.dot(q.segment(dn - d, d));
  return 0.5 * p.squaredNorm() + potential_energy(m, q) + bath;
}

void grad_V(const ModelParams& m, const Eigen::Ref<const Vec>& q, Eigen::Ref<Vec> out) {
  const int d = m.d;
  out.setZero();
  if (d == 1) {
    for (int i = 0; i < m.n; ++i) out[i] += m.u1.profile_d1(q[i]);
    for (int i = 0; i + 1 < m.n; ++i) {
      const double f = m.u2.profile_d1(q[i] - q[i + 1]);
      out[i] += f;
      out[i + 1] -= f;
    }
    return;
  }
  Vec diff(d);
  for (int i = 0; i < m.n; ++i) m.u1.add_gradient(q.segment(d * i, d), 1.0, out.segment(d * i, d));
  for (int i = 0; i + 1 < m.n; ++i) {
    diff = q.segment(d * i, d) - q.segment(d * (i + 1), d);
    m.u2.add_gradient(diff, 1.0, out.segment(d * i, d));
    m.u2.add_gradient(diff, -1.0, out.segment(d * (i + 1), d));
  }
}

void grad_G(const ModelParams& m, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) {
  const int d = m.d;
  const int dn = d * m.n;
  out.segment(0, dn) = x.segment(0, dn);
  grad_V(m, x.segment(dn, dn), out.segment(dn, dn));
  out.segment(dn, d) -= x.segment(2 * dn, d);
  out.segment(2 * dn - d, d) -= x.segment(2 * dn + d, d);
  out.segment(2 * dn, d) = x.segment(2 * dn, d) / m.lambda2 - x.segment(dn, d);
  out.segment(2 * dn + d, d) = x.segment(2 * dn + d, d) / m.lambda2 - x.segment(2 * dn - d, d);
}

void drift(const ModelParams& m, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) {
  const int d = m.d;
  const int dn = d * m.n;
  // p slot: -grad_q G = -grad V + r on the boundary particles
  grad_V(m, x.segment(dn, dn), out.segment(0, dn));
  out.segment(0, dn) *= -1.0;
  out.segment(0, d) += x.segment(2 * dn, d);
  out.segment(dn - d, d) += x.segment(2 * dn + d, d);
  // q slot: grad_p G = p
  out.segment(dn, dn) = x.segment(0, dn);
  // r slot: -gamma lambda2 grad_r G = -gamma (r - lambda2 q_boundary)
  out.segment(2 * dn, d) = -m.gamma * (x.segment(2 * dn, d) - m.lambda2 * x.segment(dn, d));
  out.segment(2 * dn + d, d) = -m.gamma * (x.segment(2 * dn + d, d) - m.lambda2 * x.segment(2 * dn - d, d));
}

void hess_V_apply(const ModelParams& m, const Eigen::Ref<const Vec>& q, const Eigen::Ref<const Vec>& w,
                  Eigen::Ref<Vec> out) {
  const int d = m.d;
  out.setZero();
  if (d == 1) {
    for (int i = 0; i < m.n; ++i) out[i] += m.u1.profile_d2(q[i]) * w[i];
    for (int i = 0; i + 1 < m.n; ++i) {
      const double f = m.u2.profile_d2(q[i] - q[i + 1]) * (w[i] - w[i + 1]);
      out[i] += f;
      out[i + 1] -= f;
    }
    return;
  }
  for (int i = 0; i < m.n; ++i) out.segment(d * i, d) += m.u1.hessian(q.segment(d * i, d)) * w.segment(d * i, d);
  for (int i = 0; i + 1 < m.n; ++i) {
    const Vec f = m.u2.hessian(q.segment(d * i, d) - q.segment(d * (i + 1), d)) *
                  (w.segment(d * i, d) - w.segment(d * (i + 1), d));
    out.segment(d * i, d) += f;
    out.segment(d * (i + 1), d) -= f;
  }
}

void drift_vjp(const ModelParams& m, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& v,
               Eigen::Ref<Vec> out) {
  const int d = m.d;
  const int dn = d * m.n;
  const double gl = m.gamma * m.lambda2;
  // out_p = v_q
  out.segment(0, dn) = v.segment(dn, dn);
  // out_q = -Hess V v_p + gamma lambda2 E v_r
  hess_V_apply(m, x.segment(dn, dn), v.segment(0, dn), out.segment(dn, dn));
  out.segment(dn, dn) *= -1.0;
  out.segment(dn, d) += gl * v.segment(2 * dn, d);
  out.segment(2 * dn - d, d) += gl * v.segment(2 * dn + d, d);
  // out_r = E^T v_p - gamma v_r
  out.segment(2 * dn, d) = v.segment(0, d) - m.gamma * v.segment(2 * dn, d);
  out.segment(2 * dn + d, d) = v.segment(dn - d, d) - m.gamma * v.segment(2 * dn + d, d);
}

}  // namespace kernel

double eval_H(const ModelParams& m, const State& x) {
  check_dims(m, x);
  return 0.5 * x.p().squaredNorm() + potential_energy(m, x.q());
}

double eval_G(const ModelParams& m, const State& x) {
  check_dims(m, x);
  return kernel::G(m, x.vec());
}

Vec grad_G(const ModelParams& m, const State& x) {
  check_dims(m, x);
  Vec g(m.dim());
  kernel::grad_G(m, x.vec(), g);
  return g;
}

Vec drift(const ModelParams& m, const State& x) {
  check_dims(m, x);
  Vec f(m.dim());
  kernel::drift(m, x.vec(), f);
  return f;
}

Vec noise_diagonal(const ModelParams& m) {
  if (!(std::abs(m.eta) < 1.0)) throw ModelError("noise matrix needs |eta| < 1");
  Vec diag(2 * m.d);
  const double base = 2.0 * m.gamma * m.lambda2;
  diag.head(m.d).setConstant(std::sqrt(base * (1.0 + m.eta)));
  diag.tail(m.d).setConstant(std::sqrt(base * (1.0 - m.eta)));
  return diag;
}

Mat noise_matrix(const ModelParams& m) { return noise_diagonal(m).asDiagonal(); }

double effective_potential(const ModelParams& m, const Eigen::Ref<const Vec>& q) {
  const int dn = m.d * m.n;
  return potential_energy(m, q) -
         0.5 * m.lambda2 * (q.segment(0, m.d).squaredNorm() + q.segment(dn - m.d, m.d).squaredNorm());
}

Mat effective_hessian(const ModelParams& m, const Eigen::Ref<const Vec>& q) {
  const int d = m.d;
  const int dn = d * m.n;
  Mat h = hess_V(m, q);
  h.block(0, 0, d, d) -= m.lambda2 * Mat::Identity(d, d);
  h.block(dn - d, dn - d, d, d) -= m.lambda2 * Mat::Identity(d, d);
  return h;
}

Mat hess_G(const ModelParams& m, const State& x) {
  check_dims(m, x);
  const int d = m.d;
  const int dn = d * m.n;
  Mat h = Mat::Zero(m.dim(), m.dim());
  h.block(0, 0, dn, dn).setIdentity();
  h.block(dn, dn, dn, dn) = hess_V(m, x.q());
  const Mat id = Mat::Identity(d, d);
  // q_1 <-> r_1 and q_n <-> r_n couplings
  h.block(dn, 2 * dn, d, d) = -id;
  h.block(2 * dn, dn, d, d) = -id;
  h.block(2 * dn - d, 2 * dn + d, d, d) = -id;
  h.block(2 * dn + d, 2 * dn - d, d, d) = -id;
  h.block(2 * dn, 2 * dn, 2 * d, 2 * d) = Mat::Identity(2 * d, 2 * d) / m.lambda2;
  return h;
}

}  // namespace heatchain
