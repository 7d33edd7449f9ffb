#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace hasm {

using Vec3 = Eigen::Vector3d;

// Cross-product matrix: skew(n) * v == n.cross(v).
Eigen::Matrix3d skew(const Vec3& axis);

// I + sin(a) K + (1 - cos(a)) K^2 with K = skew(axis).
Eigen::Matrix3d rodrigues(const Vec3& axis, double angle);

// 10^(-i/d) for block i in 1..d/3.
double rope_frequency(std::size_t block, std::size_t dimension);

struct RotationSpec {
  Vec3 axis = Vec3::UnitZ();
  double theta = 0.0;
  std::size_t dimension = 3;

  // Throws ErrorKind::dimension / config on a non-unit axis or d % 3 != 0.
  void validate() const;
};

// Block-diagonal rotation of consecutive triples; block i is rotated about
// spec.axis by rope_frequency(i, d) * spec.theta.
Eigen::VectorXd rope3d(const Eigen::VectorXd& vec, const RotationSpec& spec);

// Holds the d/3 block matrices for the last (axis, theta, d) it was asked
// for. Not synchronized; keep one per thread.
class Rope3dRotator {
 public:
  Eigen::VectorXd apply(const Eigen::VectorXd& vec, const RotationSpec& spec);

 private:
  bool matches(const RotationSpec& spec) const;

  bool valid_ = false;
  RotationSpec cached_;
  std::vector<Eigen::Matrix3d> blocks_;
};

}  // namespace hasm
