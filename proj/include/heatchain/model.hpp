#pragma once

#include <Eigen/Dense>

#include <utility>

#include "heatchain/potential.hpp"

namespace heatchain {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Chain of n particles in R^d coupled at both ends to heat baths.
///
/// eps is the mean bath temperature (T1 + Tn)/2 and eta the relative difference
/// (T1 - Tn)/(T1 + Tn). Construct through make(), which validates everything,
/// including strict convexity of the pair potential.
struct ModelParams {
  int n = 2;
  int d = 1;
  Potential u1;
  Potential u2;
  double gamma = 1.0;
  double lambda2 = 0.5;
  double eps = 0.0;
  double eta = 0.0;

  struct Options {
    double convexity_box = 5.0;
    int convexity_grid = 10000;
  };

  static ModelParams make(int n, int d, PotentialSpec u1, PotentialSpec u2, double gamma, double lambda2,
                          double eps, double eta, Options opts);
  static ModelParams make(int n, int d, PotentialSpec u1, PotentialSpec u2, double gamma, double lambda2,
                          double eps, double eta) {
    return make(n, d, std::move(u1), std::move(u2), gamma, lambda2, eps, eta, Options{});
  }

  /// Same chain at another (eps, eta); validated like make().
  ModelParams with_temperature(double eps, double eta) const;

  /// Bath temperatures (T1, Tn) = (eps (1 + eta), eps (1 - eta)).
  std::pair<double, double> temperatures() const { return {eps * (1.0 + eta), eps * (1.0 - eta)}; }

  int dim() const { return 2 * d * n + 2 * d; }
  int r_offset() const { return 2 * d * n; }
};

/// (eps, eta) from the two bath temperatures.
std::pair<double, double> eps_eta_from_temperatures(double t1, double tn);

/// Point x = (p, q, r) of the extended phase space, stored flat as [p | q | r].
/// p and q hold d*n reals (particle-major), r holds r_1 then r_n (d reals each).
class State {
 public:
  State() = default;
  State(int n, int d) : n_(n), d_(d), x_(Vec::Zero(2 * d * n + 2 * d)) {}
  State(int n, int d, Vec x);
  static State zeros_like(const ModelParams& m) { return State(m.n, m.d); }

  int n() const { return n_; }
  int d() const { return d_; }
  Eigen::Index size() const { return x_.size(); }

  auto p() { return x_.segment(0, d_ * n_); }
  auto p() const { return x_.segment(0, d_ * n_); }
  auto q() { return x_.segment(d_ * n_, d_ * n_); }
  auto q() const { return x_.segment(d_ * n_, d_ * n_); }
  auto r() { return x_.segment(2 * d_ * n_, 2 * d_); }
  auto r() const { return x_.segment(2 * d_ * n_, 2 * d_); }

  auto p_of(int i) const { return x_.segment(d_ * i, d_); }
  auto q_of(int i) const { return x_.segment(d_ * n_ + d_ * i, d_); }
  auto r_first() const { return x_.segment(2 * d_ * n_, d_); }
  auto r_last() const { return x_.segment(2 * d_ * n_ + d_, d_); }

  const Vec& vec() const { return x_; }
  Vec& vec() { return x_; }

  friend bool operator==(const State& a, const State& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.x_ == b.x_;
  }

 private:
  int n_ = 0;
  int d_ = 0;
  Vec x_;
};

/// Time reversal J(p, q, r) = (-p, q, r).
State reverse_momenta(const State& x);

void check_dims(const ModelParams& m, const State& x);

double eval_H(const ModelParams& m, const State& x);
double eval_G(const ModelParams& m, const State& x);
Vec grad_G(const ModelParams& m, const State& x);
/// Zero-temperature drift in [p | q | r] slots: (-grad_q G, grad_p G, -gamma lambda2 grad_r G).
Vec drift(const ModelParams& m, const State& x);
/// sqrt(2 gamma lambda2 D) with D = diag((1+eta) I_d, (1-eta) I_d); acts on the r block.
Mat noise_matrix(const ModelParams& m);
/// Diagonal of noise_matrix().
Vec noise_diagonal(const ModelParams& m);

/// Effective potential of the q block with p = 0 and r eliminated at r = lambda2 q:
/// V(q) - lambda2 (|q_1|^2 + |q_n|^2) / 2.
double effective_potential(const ModelParams& m, const Eigen::Ref<const Vec>& q);
Mat effective_hessian(const ModelParams& m, const Eigen::Ref<const Vec>& q);

/// Full Hessian of G on the extended space.
Mat hess_G(const ModelParams& m, const State& x);

namespace kernel {

// Unchecked flat-vector kernels used in inner loops. x and outputs have size m.dim().

double G(const ModelParams& m, const Eigen::Ref<const Vec>& x);
void grad_V(const ModelParams& m, const Eigen::Ref<const Vec>& q, Eigen::Ref<Vec> out);
void grad_G(const ModelParams& m, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out);
void drift(const ModelParams& m, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out);
/// out = Hess V(q) w
void hess_V_apply(const ModelParams& m, const Eigen::Ref<const Vec>& q, const Eigen::Ref<const Vec>& w,
                  Eigen::Ref<Vec> out);
/// out = (d drift / dx)(x)^T v
void drift_vjp(const ModelParams& m, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& v,
               Eigen::Ref<Vec> out);

}  // namespace kernel

}  // namespace heatchain
