#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace heatchain {

enum class PotentialKind { polynomial_even, quadratic, quartic_double_well };

std::string_view to_string(PotentialKind kind);
PotentialKind parse_potential_kind(std::string_view name);

/// Polynomial potential description. coeffs[k] multiplies q^k.
///
/// For d = 1 the polynomial acts on the scalar coordinate directly. For d > 1 it acts
/// radially, U(q) = sum_k coeffs[k] |q|^k, which only makes sense for even k, so odd
/// coefficients are rejected there. Odd terms are allowed for d = 1 in the
/// quartic-double-well family (a tilt).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::quadratic;
  std::vector<double> coeffs;
};

/// A validated potential bound to a per-particle dimension.
class Potential {
 public:
  Potential() = default;
  /// Throws ModelError if the spec is not a confining polynomial of its declared kind.
  Potential(PotentialSpec spec, int dim);

  const PotentialSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  int degree() const { return static_cast<int>(spec_.coeffs.size()) - 1; }

  double value(const Eigen::Ref<const Eigen::VectorXd>& q) const;
  /// out += scale * grad U(q)
  void add_gradient(const Eigen::Ref<const Eigen::VectorXd>& q, double scale,
                    Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  // Scalar profile u(s) with U(q) = u(|q|) for d > 1 and U(q) = u(q) for d = 1.
  double profile(double s) const;
  double profile_d1(double s) const;
  double profile_d2(double s) const;

  /// Strict convexity of U on [-box, box]^d. Analytic for degree <= 2, otherwise
  /// sampled on `grid_points` radii (both radial and tangential curvature for d > 1).
  bool strictly_convex(double box, int grid_points = 10000) const;

 private:
  PotentialSpec spec_;
  int dim_ = 1;
  // Coefficients of |q|^(2j) for the radial form: radial_[j] = coeffs[2j].
  std::vector<double> radial_;
};

}  // namespace heatchain
