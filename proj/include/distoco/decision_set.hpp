#pragma once

#include <utility>

#include "distoco/core.hpp"

namespace distoco {

/// Closed convex decision set: an axis-aligned box or a Euclidean ball.
///
/// Stores the radii of the largest origin-centered ball contained in the set
/// (inner radius) and the smallest origin-centered ball containing it (outer
/// radius). The inner radius is zero when the origin is not interior.
class DecisionSet {
 public:
  enum class Kind { kBox, kBall };

  static DecisionSet box(Vector lower, Vector upper);
  /// The box [-half_width, half_width]^dim.
  static DecisionSet symmetric_box(Index dim, double half_width);
  static DecisionSet ball(Vector center, double radius);

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double inner_radius() const { return inner_radius_; }
  double outer_radius() const { return outer_radius_; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  bool origin_symmetric() const;

  /// Membership up to an absolute slack.
  bool contains(const Eigen::Ref<const Vector>& x, double slack = 0.0) const;

  /// Range [min, max] of the linear map x -> h.x over the set.
  std::pair<double, double> linear_range(
      const Eigen::Ref<const Vector>& h) const;

 private:
  DecisionSet() = default;
  void compute_radii();

  Kind kind_ = Kind::kBox;
  Index dim_ = 0;
  Vector lower_, upper_;
  Vector center_;
  double radius_ = 0.0;
  double inner_radius_ = 0.0;
  double outer_radius_ = 0.0;
};

/// Euclidean projection onto the set. Coordinatewise clamping for boxes,
/// radial scaling toward the center for balls.
template <typename Derived>
Vector project(const DecisionSet& set, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != set.dim()) {
    throw ArgumentError("project: dimension mismatch");
  }
  if (set.kind() == DecisionSet::Kind::kBox) {
    return x.derived().cwiseMax(set.lower()).cwiseMin(set.upper());
  }
  Vector offset = x - set.center();
  const double norm = offset.norm();
  if (norm <= set.radius()) return x;
  return set.center() + offset * (set.radius() / norm);
}

/// The scaled set (1 - xi) X. Only origin-symmetric sets are supported.
DecisionSet shrink_set(const DecisionSet& set, double xi);

}  // namespace distoco
