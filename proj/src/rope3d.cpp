#include "hasm/rope3d.hpp"

#include <cmath>

#include "hasm/error.hpp"

namespace hasm {

Eigen::Matrix3d skew(const Vec3& n) {
  Eigen::Matrix3d k;
  k << 0.0, -n.z(), n.y(),
       n.z(), 0.0, -n.x(),
       -n.y(), n.x(), 0.0;
  return k;
}

Eigen::Matrix3d rodrigues(const Vec3& axis, double angle) {
  const Eigen::Matrix3d k = skew(axis);
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

double rope_frequency(std::size_t block, std::size_t dimension) {
  return std::pow(10.0, -static_cast<double>(block) / static_cast<double>(dimension));
}

void RotationSpec::validate() const {
  if (dimension < 3 || dimension % 3 != 0) {
    fail(ErrorKind::dimension, "rope3d: dimension must be a positive multiple of 3");
  }
  if (std::abs(axis.norm() - 1.0) > 1e-9) fail(ErrorKind::invalid_argument, "rope3d: rotation axis must be a unit vector");
}

Eigen::VectorXd rope3d(const Eigen::VectorXd& vec, const RotationSpec& spec) {
  spec.validate();
  if (static_cast<std::size_t>(vec.size()) != spec.dimension) {
    fail(ErrorKind::dimension, "rope3d: vector length does not match rotation dimension");
  }
  Eigen::VectorXd out(vec.size());
  const std::size_t blocks = spec.dimension / 3;
  for (std::size_t i = 0; i < blocks; ++i) {
    const auto idx = static_cast<Eigen::Index>(3 * i);
    const Eigen::Matrix3d r = rodrigues(spec.axis, rope_frequency(i + 1, spec.dimension) * spec.theta);
    out.segment<3>(idx) = r * vec.segment<3>(idx);
  }
  return out;
}

bool Rope3dRotator::matches(const RotationSpec& spec) const {
  return valid_ && cached_.dimension == spec.dimension && cached_.theta == spec.theta && cached_.axis == spec.axis;
}

Eigen::VectorXd Rope3dRotator::apply(const Eigen::VectorXd& vec, const RotationSpec& spec) {
  if (!matches(spec)) {
    spec.validate();
    const std::size_t blocks = spec.dimension / 3;
    blocks_.resize(blocks);
    for (std::size_t i = 0; i < blocks; ++i) {
      blocks_[i] = rodrigues(spec.axis, rope_frequency(i + 1, spec.dimension) * spec.theta);
    }
    cached_ = spec;
    valid_ = true;
  }
  if (static_cast<std::size_t>(vec.size()) != spec.dimension) {
    fail(ErrorKind::dimension, "rope3d: vector length does not match rotation dimension");
  }
  Eigen::VectorXd out(vec.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(3 * i);
    out.segment<3>(idx) = blocks_[i] * vec.segment<3>(idx);
  }
  return out;
}

}  // namespace hasm
