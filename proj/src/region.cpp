#include "heatchain/region.hpp"

#include <fmt/core.h>

#include "heatchain/errors.hpp"

namespace heatchain {

Region Region::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw std::invalid_argument("box bounds differ in length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument(fmt::format("box has empty extent in coordinate {}", i));
    }
  }
  Region r(Kind::box);
  r.a_ = std::move(lower);
  r.b_ = std::move(upper);
  return r;
}

Region Region::ball(Vec center, double radius, std::vector<int> coords) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  for (int c : coords) {
    if (c < 0 || c >= center.size()) throw std::invalid_argument(fmt::format("ball coordinate {} out of range", c));
  }
  Region r(Kind::ball);
  r.a_ = std::move(center);
  r.radius_ = radius;
  r.coords_ = std::move(coords);
  return r;
}

Region Region::ellipsoid(Vec center, Mat shape, std::vector<int> coords) {
  const auto k = static_cast<Eigen::Index>(coords.size());
  if (k == 0) throw std::invalid_argument("ellipsoid needs at least one coordinate");
  if (shape.rows() != k || shape.cols() != k) {
    throw std::invalid_argument(fmt::format("ellipsoid shape must be {0}x{0}", k));
  }
  if (!shape.isApprox(shape.transpose(), 1e-12)) throw std::invalid_argument("ellipsoid shape must be symmetric");
  Eigen::LLT<Mat> llt(shape);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("ellipsoid shape must be positive definite");
  for (int c : coords) {
    if (c < 0 || c >= center.size()) throw std::invalid_argument(fmt::format("ellipsoid coordinate {} out of range", c));
  }
  Region r(Kind::ellipsoid);
  r.a_ = std::move(center);
  r.shape_ = std::move(shape);
  r.coords_ = std::move(coords);
  return r;
}

bool Region::contains(const Eigen::Ref<const Vec>& x) const {
  bool inside = true;
  switch (kind_) {
    case Kind::everything:
      inside = true;
      break;
    case Kind::box:
      if (x.size() != a_.size()) throw DimensionError("box region and state differ in dimension");
      inside = ((x - a_).array() >= 0.0).all() && ((b_ - x).array() >= 0.0).all();
      break;
    case Kind::ellipsoid: {
      if (x.size() != a_.size()) throw DimensionError("ellipsoid region and state differ in dimension");
      const auto k = static_cast<Eigen::Index>(coords_.size());
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double di = x[coords_[i]] - a_[coords_[i]];
        for (Eigen::Index j = 0; j < k; ++j) s += di * shape_(i, j) * (x[coords_[j]] - a_[coords_[j]]);
      }
      inside = s <= 1.0;
      break;
    }
    case Kind::ball:
      if (x.size() != a_.size()) throw DimensionError("ball region and state differ in dimension");
      if (coords_.empty()) {
        inside = (x - a_).squaredNorm() <= radius_ * radius_;
      } else {
        double s = 0.0;
        for (int c : coords_) s += (x[c] - a_[c]) * (x[c] - a_[c]);
        inside = s <= radius_ * radius_;
      }
      break;
  }
  return inside != complement_;
}

CriticalNeighbourhood::CriticalNeighbourhood(const std::vector<CriticalSet>& sets, double rho) : rho_(rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("neighbourhood radius must be positive");
  for (const auto& s : sets) centers_.push_back(s.point.vec());
}

int CriticalNeighbourhood::which(const Eigen::Ref<const Vec>& x) const {
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if ((x - centers_[i]).squaredNorm() <= rho_ * rho_) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace heatchain
