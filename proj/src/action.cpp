#include "heatchain/action.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "heatchain/errors.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

PathRecord to_path_record(const ControlPath& cp) { return {cp.n, cp.d, cp.times, cp.states}; }

State state_at(const ModelParams& m, const PathRecord& path, Eigen::Index k) {
  return State(m.n, m.d, path.states.row(k).transpose());
}

double control_energy(const Mat& u, double h) {
  const Eigen::Index last = u.rows() - 1;
  if (last < 1) return 0.0;
  double acc = 0.5 * (u.row(0).squaredNorm() + u.row(last).squaredNorm());
  for (Eigen::Index k = 1; k < last; ++k) acc += u.row(k).squaredNorm();
  return 0.5 * h * acc;
}

ControlPath integrate_controlled(const ModelParams& m, const State& x0, const Mat& u, double T) {
  check_dims(m, x0);
  if (u.cols() != 2 * m.d || u.rows() < 2) {
    throw DimensionError(fmt::format("control grid must be (N+1) x {} with N >= 1", 2 * m.d));
  }
  if (!u.allFinite()) throw NumericalError("control contains non-finite values");
  if (!(T > 0.0)) throw std::invalid_argument("integrate_controlled needs T > 0");

  const int segs = static_cast<int>(u.rows()) - 1;
  const double h = T / segs;
  const int off = m.r_offset();
  const Vec scale = noise_diagonal(m);

  ControlPath cp;
  cp.n = m.n;
  cp.d = m.d;
  cp.times = Vec::LinSpaced(segs + 1, 0.0, T);
  cp.u = u;
  cp.states.resize(segs + 1, m.dim());
  cp.states.row(0) = x0.vec().transpose();

  Vec x = x0.vec();
  Vec k1(m.dim()), k2(m.dim()), k3(m.dim()), k4(m.dim()), y(m.dim());
  auto controlled = [&](const Vec& at, const Eigen::Ref<const Vec>& ctrl, Vec& out) {
    kernel::drift(m, at, out);
    out.segment(off, 2 * m.d) += scale.cwiseProduct(ctrl);
  };
  for (int k = 0; k < segs; ++k) {
    const Vec ua = u.row(k).transpose();
    const Vec ub = u.row(k + 1).transpose();
    const Vec um = 0.5 * (ua + ub);
    controlled(x, ua, k1);
    y = x + (0.5 * h) * k1;
    controlled(y, um, k2);
    y = x + (0.5 * h) * k2;
    controlled(y, um, k3);
    y = x + h * k3;
    controlled(y, ub, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw NumericalError(fmt::format("controlled trajectory blew up at t = {}", (k + 1) * h));
    cp.states.row(k + 1) = x.transpose();
  }
  cp.action = control_energy(u, h);
  return cp;
}

namespace {

void check_grid(const PathRecord& path) {
  const Eigen::Index nodes = path.times.size();
  if (nodes < 2) throw std::invalid_argument("path needs at least 2 grid nodes");
  if (path.states.rows() != nodes) throw DimensionError("path times and states differ in length");
  for (Eigen::Index k = 1; k < nodes; ++k) {
    if (!(path.times[k] > path.times[k - 1])) throw std::invalid_argument("path grid must be strictly increasing");
  }
}

// Second-order time derivative of every state component on a possibly non-uniform grid.
Mat differentiate(const PathRecord& path) {
  const Eigen::Index nodes = path.times.size();
  const auto& t = path.times;
  const auto& x = path.states;
  Mat dx(x.rows(), x.cols());
  if (nodes == 2) {
    const auto slope = (x.row(1) - x.row(0)) / (t[1] - t[0]);
    dx.row(0) = slope;
    dx.row(1) = slope;
    return dx;
  }
  for (Eigen::Index k = 1; k + 1 < nodes; ++k) {
    const double h1 = t[k] - t[k - 1];
    const double h2 = t[k + 1] - t[k];
    dx.row(k) = (-h2 / (h1 * (h1 + h2))) * x.row(k - 1) + ((h2 - h1) / (h1 * h2)) * x.row(k) +
                (h1 / (h2 * (h1 + h2))) * x.row(k + 1);
  }
  {
    const double h1 = t[1] - t[0];
    const double h2 = t[2] - t[1];
    dx.row(0) = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * x.row(0) + ((h1 + h2) / (h1 * h2)) * x.row(1) -
                (h1 / (h2 * (h1 + h2))) * x.row(2);
  }
  {
    const Eigen::Index n = nodes - 1;
    const double h1 = t[n - 1] - t[n - 2];
    const double h2 = t[n] - t[n - 1];
    dx.row(n) = (h2 / (h1 * (h1 + h2))) * x.row(n - 2) - ((h1 + h2) / (h1 * h2)) * x.row(n - 1) +
                ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * x.row(n);
  }
  return dx;
}

double trapezoid(const Vec& t, const Vec& f) {
  double acc = 0.0;
  for (Eigen::Index k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return acc;
}

double local_spacing(const Vec& t, Eigen::Index k) {
  double h = 0.0;
  if (k > 0) h = std::max(h, t[k] - t[k - 1]);
  if (k + 1 < t.size()) h = std::max(h, t[k + 1] - t[k]);
  return h;
}

struct PathDiagnostics {
  bool feasible = true;
  double max_residual = 0.0;
  Vec integrand;
};

PathDiagnostics analyse(const ModelParams& m, const PathRecord& path, const ConstraintTolerance* tol) {
  check_grid(path);
  if (path.states.cols() != m.dim() || path.n != m.n || path.d != m.d) {
    throw DimensionError("path layout does not match the model");
  }
  if (!(std::abs(m.eta) < 1.0)) throw ModelError("rate functional needs |eta| < 1");
  const Mat dx = differentiate(path);
  const int off = m.r_offset();
  const int nr = 2 * m.d;
  const double gl = m.gamma * m.lambda2;
  Vec dinv(nr);
  dinv.head(m.d).setConstant(1.0 / (1.0 + m.eta));
  dinv.tail(m.d).setConstant(1.0 / (1.0 - m.eta));

  PathDiagnostics diag;
  diag.integrand.resize(path.times.size());
  Vec x(m.dim()), f(m.dim()), g(m.dim());
  for (Eigen::Index k = 0; k < path.times.size(); ++k) {
    x = path.states.row(k).transpose();
    kernel::drift(m, x, f);
    kernel::grad_G(m, x, g);
    const double res = (dx.row(k).head(off).transpose() - f.head(off)).cwiseAbs().maxCoeff();
    diag.max_residual = std::max(diag.max_residual, res);
    if (tol) {
      const double allowed =
          tol->absolute ? *tol->absolute : tol->factor * local_spacing(path.times, k) * (1.0 + g.norm());
      if (!(res <= allowed)) diag.feasible = false;
    }
    const Vec w = dx.row(k).segment(off, nr).transpose() + gl * g.segment(off, nr);
    diag.integrand[k] = w.cwiseProduct(w).dot(dinv) / (4.0 * gl);
  }
  return diag;
}

}  // namespace

double eval_action_path(const ModelParams& m, const PathRecord& path, const ConstraintTolerance& tol) {
  const auto diag = analyse(m, path, &tol);
  if (!diag.feasible) return kInfiniteAction;
  return trapezoid(path.times, diag.integrand);
}

Mat path_controls(const ModelParams& m, const PathRecord& path) {
  check_grid(path);
  if (path.states.cols() != m.dim() || path.n != m.n || path.d != m.d) {
    throw DimensionError("path layout does not match the model");
  }
  const Mat dx = differentiate(path);
  const int off = m.r_offset();
  const int nr = 2 * m.d;
  const Vec inv_scale = noise_diagonal(m).cwiseInverse();
  Mat u(path.times.size(), nr);
  Vec g(m.dim());
  for (Eigen::Index k = 0; k < path.times.size(); ++k) {
    kernel::grad_G(m, path.states.row(k).transpose(), g);
    u.row(k) = inv_scale
                   .cwiseProduct(dx.row(k).segment(off, nr).transpose() + m.gamma * m.lambda2 * g.segment(off, nr))
                   .transpose();
  }
  return u;
}

double constraint_residual(const ModelParams& m, const PathRecord& path) {
  return analyse(m, path, nullptr).max_residual;
}

PathRecord time_reverse(const PathRecord& path) {
  const Eigen::Index nodes = path.times.size();
  const int np = path.n * path.d;
  if (path.states.cols() != 2 * np + 2 * path.d) throw DimensionError("path layout (n, d) does not match its states");
  PathRecord out{path.n, path.d, Vec(nodes), Mat(path.states.rows(), path.states.cols())};
  const double t0 = path.times[0];
  const double t1 = path.times[nodes - 1];
  for (Eigen::Index k = 0; k < nodes; ++k) {
    out.times[k] = t0 + (t1 - path.times[nodes - 1 - k]);
    out.states.row(k) = path.states.row(nodes - 1 - k);
    out.states.row(k).head(np) *= -1.0;
  }
  return out;
}

PathRecord time_reverse(const ControlPath& path) { return time_reverse(to_path_record(path)); }

EntropyFlows entropy_flows(const ModelParams& m, const State& x) {
  check_dims(m, x);
  if (!(std::abs(m.eta) < 1.0)) throw ModelError("entropy flows need |eta| < 1");
  EntropyFlows e;
  e.f1 = x.p_of(0).dot(x.r_first() - m.lambda2 * x.q_of(0));
  e.fn = x.p_of(m.n - 1).dot(x.r_last() - m.lambda2 * x.q_of(m.n - 1));
  e.theta = -e.f1 / (1.0 + m.eta) - e.fn / (1.0 - m.eta);
  return e;
}

double boundary_R(const ModelParams& m, const State& x, double factor) {
  check_dims(m, x);
  if (!(std::abs(m.eta) < 1.0)) throw ModelError("boundary term needs |eta| < 1");
  const double lam = std::sqrt(m.lambda2);
  const double a = (x.r_first() / lam - lam * x.q_of(0)).squaredNorm();
  const double b = (x.r_last() / lam - lam * x.q_of(m.n - 1)).squaredNorm();
  return factor * (a / (1.0 + m.eta) + b / (1.0 - m.eta));
}

ReversalReport check_reversal_identity(const ModelParams& m, const ControlPath& cp, double r_factor) {
  const PathRecord fwd = to_path_record(cp);
  ReversalReport rep;
  rep.equilibrium_branch = m.eta == 0.0;
  rep.action_forward = eval_action_path(m, fwd);
  rep.action_reversed = eval_action_path(m, time_reverse(fwd));
  if (!std::isfinite(rep.action_forward) || !std::isfinite(rep.action_reversed)) {
    rep.residual = kInfiniteAction;
    return rep;
  }
  const Eigen::Index last = fwd.times.size() - 1;
  const State x0 = state_at(m, fwd, 0);
  const State xT = state_at(m, fwd, last);
  if (rep.equilibrium_branch) {
    rep.boundary_term = eval_G(m, xT) - eval_G(m, x0);
  } else {
    rep.boundary_term = boundary_R(m, xT, r_factor) - boundary_R(m, x0, r_factor);
    Vec theta(fwd.times.size());
    for (Eigen::Index k = 0; k <= last; ++k) theta[k] = entropy_flows(m, state_at(m, fwd, k)).theta;
    rep.theta_integral = trapezoid(fwd.times, theta);
  }
  rep.residual =
      std::abs(rep.action_forward - rep.action_reversed - rep.boundary_term + rep.theta_integral);
  return rep;
}

SmoothControl random_smooth_control(const ModelParams& m, double T, std::uint64_t seed, int modes,
                                    double amplitude) {
  if (!(T > 0.0) || modes < 1) throw std::invalid_argument("smooth control needs T > 0 and modes >= 1");
  const int nr = 2 * m.d;
  const NormalStream stream(seed, 0);
  std::vector<double> g(static_cast<std::size_t>(nr * modes));
  std::vector<double> v(g.size());
  stream.normals(0, g);
  stream.uniforms(1, v);
  SmoothControl c{T, Mat(nr, modes), Mat(nr, modes)};
  constexpr double kPi = 3.14159265358979323846;
  for (int j = 0; j < nr; ++j) {
    for (int k = 0; k < modes; ++k) {
      const auto i = static_cast<std::size_t>(j * modes + k);
      c.amp(j, k) = amplitude * g[i] / (k + 1);
      c.phase(j, k) = 2.0 * kPi * v[i];
    }
  }
  return c;
}

Mat sample_control(const SmoothControl& c, int N) {
  if (N < 1) throw std::invalid_argument("sample_control needs N >= 1");
  constexpr double kPi = 3.14159265358979323846;
  Mat u = Mat::Zero(N + 1, c.amp.rows());
  for (int node = 0; node <= N; ++node) {
    const double t = c.T * node / N;
    for (Eigen::Index j = 0; j < c.amp.rows(); ++j) {
      for (Eigen::Index k = 0; k < c.amp.cols(); ++k) {
        u(node, j) += c.amp(j, k) * std::sin(static_cast<double>(k + 1) * kPi * t / c.T + c.phase(j, k));
      }
    }
  }
  return u;
}

std::vector<ReversalReport> reversal_refinement(const ModelParams& m, const State& x0, const SmoothControl& c,
                                                const std::vector<int>& segments, double r_factor) {
  std::vector<ReversalReport> out;
  for (int N : segments) {
    const ControlPath cp = integrate_controlled(m, x0, sample_control(c, N), c.T);
    out.push_back(check_reversal_identity(m, cp, r_factor));
  }
  return out;
}

}  // namespace heatchain
