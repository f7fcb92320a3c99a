#include "heatchain/potential.hpp"

#include <cmath>
#include <string>

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::polynomial_even: return "polynomial-even";
    case PotentialKind::quadratic: return "quadratic";
    case PotentialKind::quartic_double_well: return "quartic-double-well";
  }
  return "unknown";
}

PotentialKind parse_potential_kind(std::string_view name) {
  if (name == "polynomial-even") return PotentialKind::polynomial_even;
  if (name == "quadratic") return PotentialKind::quadratic;
  if (name == "quartic-double-well") return PotentialKind::quartic_double_well;
  throw ModelError(fmt::format("unknown potential kind '{}'", name));
}

Potential::Potential(PotentialSpec spec, int dim) : spec_(std::move(spec)), dim_(dim) {
  auto& c = spec_.coeffs;
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  const auto kind = to_string(spec_.kind);
  if (dim_ < 1) throw ModelError("potential dimension must be >= 1");
  if (c.empty()) throw ModelError(fmt::format("{} potential has no coefficients", kind));
  for (double v : c) {
    if (!std::isfinite(v)) throw ModelError(fmt::format("{} potential has a non-finite coefficient", kind));
  }
  const int deg = degree();
  if (deg < 2 || deg % 2 != 0 || c.back() <= 0.0) {
    throw ModelError(fmt::format(
        "{} potential is not confining: leading degree {} must be even and >= 2 with a positive coefficient",
        kind, deg));
  }
  bool has_odd = false;
  for (int k = 1; k <= deg; k += 2) has_odd = has_odd || c[k] != 0.0;

  switch (spec_.kind) {
    case PotentialKind::quadratic:
      if (deg != 2) throw ModelError("quadratic potential must have degree 2");
      break;
    case PotentialKind::quartic_double_well:
      if (deg != 4 || c[2] >= 0.0) {
        throw ModelError("quartic-double-well potential needs degree 4 and a negative q^2 coefficient");
      }
      break;
    case PotentialKind::polynomial_even:
      if (has_odd) throw ModelError("polynomial-even potential has odd coefficients");
      break;
  }
  if (dim_ > 1 && has_odd) {
    throw ModelError(fmt::format("{} potential with odd terms cannot act radially for d = {}", kind, dim_));
  }
  for (int k = 0; k <= deg; k += 2) radial_.push_back(c[k]);
}

double Potential::profile(double s) const {
  double acc = 0.0;
  for (auto it = spec_.coeffs.rbegin(); it != spec_.coeffs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Potential::profile_d1(double s) const {
  double acc = 0.0;
  for (int k = degree(); k >= 1; --k) acc = acc * s + k * spec_.coeffs[k];
  return acc;
}

double Potential::profile_d2(double s) const {
  double acc = 0.0;
  for (int k = degree(); k >= 2; --k) acc = acc * s + k * (k - 1) * spec_.coeffs[k];
  return acc;
}

double Potential::value(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (dim_ == 1) return profile(q[0]);
  const double s2 = q.squaredNorm();
  double acc = 0.0;
  for (auto it = radial_.rbegin(); it != radial_.rend(); ++it) acc = acc * s2 + *it;
  return acc;
}

void Potential::add_gradient(const Eigen::Ref<const Eigen::VectorXd>& q, double scale,
                             Eigen::Ref<Eigen::VectorXd> out) const {
  if (dim_ == 1) {
    out[0] += scale * profile_d1(q[0]);
    return;
  }
  // d/dq sum_j a_j |q|^{2j} = sum_j 2 j a_j |q|^{2j-2} q
  const double s2 = q.squaredNorm();
  double acc = 0.0;
  for (int j = static_cast<int>(radial_.size()) - 1; j >= 1; --j) acc = acc * s2 + 2.0 * j * radial_[j];
  out += (scale * acc) * q;
}

Eigen::MatrixXd Potential::hessian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (dim_ == 1) return Eigen::MatrixXd::Constant(1, 1, profile_d2(q[0]));
  const double s2 = q.squaredNorm();
  double iso = 0.0;    // coefficient of I
  double outer = 0.0;  // coefficient of q q^T
  for (int j = static_cast<int>(radial_.size()) - 1; j >= 1; --j) iso = iso * s2 + 2.0 * j * radial_[j];
  for (int j = static_cast<int>(radial_.size()) - 1; j >= 2; --j) outer = outer * s2 + 4.0 * j * (j - 1) * radial_[j];
  Eigen::MatrixXd h = iso * Eigen::MatrixXd::Identity(dim_, dim_);
  h.noalias() += outer * q * q.transpose();
  return h;
}

bool Potential::strictly_convex(double box, int grid_points) const {
  if (degree() <= 2) return spec_.coeffs[2] > 0.0;
  if (grid_points < 2) grid_points = 2;
  if (dim_ == 1) {
    for (int i = 0; i < grid_points; ++i) {
      const double s = -box + 2.0 * box * i / (grid_points - 1);
      if (!(profile_d2(s) > 0.0)) return false;
    }
    return true;
  }
  // Radial form: curvature along q is u''(s), across q is u'(s)/s (-> u''(0) at s = 0).
  for (int i = 0; i < grid_points; ++i) {
    const double s = box * i / (grid_points - 1);
    const double tangential = s > 0.0 ? profile_d1(s) / s : profile_d2(0.0);
    if (!(profile_d2(s) > 0.0) || !(tangential > 0.0)) return false;
  }
  return true;
}

}  // namespace heatchain
