#pragma once

// Reference computations written independently of the library: closed-form Gaussian
// probabilities, constrained quadratic minima, brute-force graph enumeration and finite
// differences. Tests compare library results against these.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Hessian of G for the harmonic chain with pinning k0 q_i^2 / 2 and nearest-neighbour
/// springs k1 (q_{i+1} - q_i)^2 / 2, in the [p | q | r] layout with d = 1.
inline Mat harmonic_chain_hessian(int n, double k0, double k1, double lambda2) {
  const int dim = 2 * n + 2;
  Mat H = Mat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) H(i, i) = 1.0;
  for (int i = 0; i < n; ++i) H(n + i, n + i) += k0;
  for (int i = 0; i + 1 < n; ++i) {
    const int a = n + i;
    const int b = n + i + 1;
    H(a, a) += k1;
    H(b, b) += k1;
    H(a, b) -= k1;
    H(b, a) -= k1;
  }
  const int r1 = 2 * n;
  const int rn = 2 * n + 1;
  H(r1, r1) = H(rn, rn) = 1.0 / lambda2;
  H(n, r1) = H(r1, n) = -1.0;
  H(2 * n - 1, rn) = H(rn, 2 * n - 1) = -1.0;
  return H;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// P(a1 <= X1 <= b1, a2 <= X2 <= b2) for a centred bivariate normal with covariance S:
/// quadrature over X1 of its density times the conditional normal probability of X2.
/// Infinite limits of X1 are truncated at 12 standard deviations.
inline double bivariate_box_probability(const Eigen::Matrix2d& S, double a1, double b1, double a2, double b2) {
  const double s1 = std::sqrt(S(0, 0));
  const double lo = std::max(a1, -12.0 * s1);
  const double hi = std::min(b1, 12.0 * s1);
  if (!(lo < hi)) return 0.0;
  const double beta = S(0, 1) / S(0, 0);
  const double sc = std::sqrt(S(1, 1) - S(0, 1) * S(0, 1) / S(0, 0));
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(200, x, w);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = 0.5 * (hi - lo) * x[i] + 0.5 * (hi + lo);
    const double dens = std::exp(-0.5 * t * t / S(0, 0)) / (s1 * std::sqrt(2.0 * std::numbers::pi));
    const double m = beta * t;
    const double pa = std::isinf(a2) ? 0.0 : normal_cdf((a2 - m) / sc);
    const double pb = std::isinf(b2) ? 1.0 : normal_cdf((b2 - m) / sc);
    total += w[i] * dens * (pb - pa);
  }
  return 0.5 * (hi - lo) * total;
}

/// min (1/2) x^T H x subject to a^T x >= b > 0: b^2 / (2 a^T H^{-1} a).
inline double halfspace_minimum(const Mat& H, const Vec& a, double b) {
  const Vec Hia = H.ldlt().solve(a);
  return b * b / (2.0 * a.dot(Hia));
}

/// min (1/2) x^T H x subject to x_S^T M x_S >= 1. Eliminating the free coordinates leaves
/// (1/2) y^T C_S^{-1} y with C = H^{-1}; the minimum is 1 / (2 lambda_max(C_S^{1/2} M C_S^{1/2})).
inline double ellipsoid_complement_minimum(const Mat& H, const std::vector<int>& S, const Mat& M) {
  const Mat C = H.inverse();
  const auto k = static_cast<Eigen::Index>(S.size());
  Mat CS(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) CS(i, j) = C(S[i], S[j]);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(CS);
  const Mat root = es.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Mat> es2(root * M * root);
  return 1.0 / (2.0 * es2.eigenvalues().maxCoeff());
}

/// Every map j -> t[j] (t[j] != j for j != root, t[root] = -1) whose arrows all lead to root.
inline std::vector<std::vector<int>> brute_force_igraphs(int L, int root) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(L, 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == L) {
      for (int s = 0; s < L; ++s) {
        int cur = s;
        int steps = 0;
        while (cur != root && steps <= L) {
          cur = t[cur];
          ++steps;
        }
        if (cur != root) return;
      }
      out.push_back(t);
      return;
    }
    if (j == root) {
      t[j] = -1;
      rec(j + 1);
      return;
    }
    for (int k = 0; k < L; ++k) {
      if (k == j) continue;
      t[j] = k;
      rec(j + 1);
    }
  };
  rec(0);
  return out;
}

inline double brute_force_weight(const Mat& V, int root) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : brute_force_igraphs(static_cast<int>(V.rows()), root)) {
    double s = 0.0;
    for (int j = 0; j < static_cast<int>(t.size()); ++j) {
      if (j != root) s += V(j, t[j]);
    }
    best = std::min(best, s);
  }
  return best;
}

/// Central differences of f at x with step h * (1 + |x_i|).
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::abs(x[i]));
    Vec xp = x;
    Vec xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

}  // namespace oracle
