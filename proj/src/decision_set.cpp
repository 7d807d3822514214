#include "distoco/decision_set.hpp"

#include <algorithm>
#include <cmath>

namespace distoco {

DecisionSet DecisionSet::box(Vector lower, Vector upper) {
  require(lower.size() == upper.size() && lower.size() > 0,
          "DecisionSet::box: bounds must be nonempty and of equal size");
  require((lower.array() <= upper.array()).all(),
          "DecisionSet::box: lower bound exceeds upper bound");
  require(lower.allFinite() && upper.allFinite(),
          "DecisionSet::box: bounds must be finite");
  DecisionSet set;
  set.kind_ = Kind::kBox;
  set.dim_ = lower.size();
  set.lower_ = std::move(lower);
  set.upper_ = std::move(upper);
  set.compute_radii();
  return set;
}

DecisionSet DecisionSet::symmetric_box(Index dim, double half_width) {
  require(dim > 0, "DecisionSet::symmetric_box: dimension must be positive");
  require(half_width >= 0.0,
          "DecisionSet::symmetric_box: half width must be nonnegative");
  return box(Vector::Constant(dim, -half_width),
             Vector::Constant(dim, half_width));
}

DecisionSet DecisionSet::ball(Vector center, double radius) {
  require(center.size() > 0, "DecisionSet::ball: empty center");
  require(radius >= 0.0 && std::isfinite(radius),
          "DecisionSet::ball: radius must be finite and nonnegative");
  DecisionSet set;
  set.kind_ = Kind::kBall;
  set.dim_ = center.size();
  set.center_ = std::move(center);
  set.radius_ = radius;
  set.compute_radii();
  return set;
}

void DecisionSet::compute_radii() {
  if (kind_ == Kind::kBox) {
    // Largest centered ball inside: distance from the origin to the nearest
    // face, provided the origin lies inside.
    const bool origin_inside =
        (lower_.array() <= 0.0).all() && (upper_.array() >= 0.0).all();
    inner_radius_ =
        origin_inside
            ? std::min((-lower_).minCoeff(), upper_.minCoeff())
            : 0.0;
    outer_radius_ = lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()).norm();
  } else {
    const double offset = center_.norm();
    inner_radius_ = std::max(0.0, radius_ - offset);
    outer_radius_ = offset + radius_;
  }
}

bool DecisionSet::origin_symmetric() const {
  if (kind_ == Kind::kBox) return lower_ == -upper_;
  return center_.isZero(0.0);
}

bool DecisionSet::contains(const Eigen::Ref<const Vector>& x,
                           double slack) const {
  if (x.size() != dim_) return false;
  if (kind_ == Kind::kBox) {
    return ((x.array() >= lower_.array() - slack) &&
            (x.array() <= upper_.array() + slack))
        .all();
  }
  return (x - center_).norm() <= radius_ + slack;
}

std::pair<double, double> DecisionSet::linear_range(
    const Eigen::Ref<const Vector>& h) const {
  require(h.size() == dim_, "DecisionSet::linear_range: dimension mismatch");
  if (kind_ == Kind::kBox) {
    const Vector mid = 0.5 * (lower_ + upper_);
    const Vector half = 0.5 * (upper_ - lower_);
    const double c = h.dot(mid);
    const double spread = h.cwiseAbs().dot(half);
    return {c - spread, c + spread};
  }
  const double c = h.dot(center_);
  const double spread = radius_ * h.norm();
  return {c - spread, c + spread};
}

DecisionSet shrink_set(const DecisionSet& set, double xi) {
  require(xi > 0.0 && xi < 1.0, "shrink_set: xi must lie in (0, 1)");
  if (!set.origin_symmetric()) {
    throw UnsupportedSetError(
        "shrink_set: only origin-symmetric sets can be shrunk");
  }
  const double scale = 1.0 - xi;
  if (set.kind() == DecisionSet::Kind::kBox) {
    return DecisionSet::box(scale * set.lower(), scale * set.upper());
  }
  return DecisionSet::ball(set.center(), scale * set.radius());
}

}  // namespace distoco
