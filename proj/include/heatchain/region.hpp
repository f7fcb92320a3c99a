#pragma once

#include <vector>

#include "heatchain/dynamics.hpp"
#include "heatchain/model.hpp"

namespace heatchain {

/// Subset of the extended phase space used for occupation and hitting-time statistics.
///
/// box: lower <= x <= upper componentwise (infinite bounds allowed).
/// ball: |x - center| <= radius, optionally measured on a subset of coordinates.
/// ellipsoid: (x_S - c_S)^T M (x_S - c_S) <= 1 on the coordinates S, M symmetric positive definite.
/// everything: the whole space.
/// Any region can be complemented.
class Region {
 public:
  enum class Kind { box, ball, ellipsoid, everything };

  static Region box(Vec lower, Vec upper);
  static Region ball(Vec center, double radius, std::vector<int> coords = {});
  static Region ellipsoid(Vec center, Mat shape, std::vector<int> coords);
  static Region ball_around(const CriticalSet& set, double radius) { return ball(set.point.vec(), radius); }
  static Region everything() { return Region(Kind::everything); }

  Region complement() const {
    Region r = *this;
    r.complement_ = !complement_;
    return r;
  }

  bool contains(const Eigen::Ref<const Vec>& x) const;
  bool contains(const State& x) const { return contains(x.vec()); }

  Kind kind() const { return kind_; }
  bool is_complement() const { return complement_; }
  const Vec& lower() const { return a_; }
  const Vec& upper() const { return b_; }
  const Vec& center() const { return a_; }
  double radius() const { return radius_; }
  const std::vector<int>& coords() const { return coords_; }
  const Mat& shape() const { return shape_; }

 private:
  explicit Region(Kind k) : kind_(k) {}

  Kind kind_;
  bool complement_ = false;
  Vec a_;
  Vec b_;
  double radius_ = 0.0;
  Mat shape_;
  std::vector<int> coords_;
};

/// Union of rho-balls around every critical set (the neighbourhood B(rho) of the critical set).
class CriticalNeighbourhood {
 public:
  CriticalNeighbourhood(const std::vector<CriticalSet>& sets, double rho);
  /// Index of the set whose ball contains x, or -1.
  int which(const Eigen::Ref<const Vec>& x) const;
  bool contains(const Eigen::Ref<const Vec>& x) const { return which(x) >= 0; }
  double rho() const { return rho_; }

 private:
  std::vector<Vec> centers_;
  double rho_;
};

}  // namespace heatchain
