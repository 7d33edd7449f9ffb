#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hasm/placecode.hpp"
#include "hasm/rope3d.hpp"
#include "hasm/tactile.hpp"

namespace hasm {

struct JointSpec {
  std::string name;
  JointLimits limits;
  double max_velocity = 2.0;  // rad/s
};

struct PatchSpec {
  std::string id;
  Vec3 axis = Vec3::UnitZ();
  int theta_sign = 1;
  std::string attached_joint;
  std::size_t cells = 3;
};

struct PlaceCodeConfig {
  std::size_t neurons_per_joint = 10;
  unsigned bits = 4;
  double sigma_spacing_ratio = 1.5;
};

// Everything needed to rebuild a query vector: stored inside bank files and
// compared on load.
struct EncoderConfig {
  std::vector<JointLimits> joint_limits;
  PlaceCodeConfig place;
  TactileConfig tactile;

  std::size_t dimension() const { return place.bits * place.neurons_per_joint * joint_limits.size(); }
  void validate() const;
};

bool operator==(const PlaceCodeConfig& a, const PlaceCodeConfig& b);
bool operator==(const TactileConfig& a, const TactileConfig& b);
bool operator==(const EncoderConfig& a, const EncoderConfig& b);

class Encoder {
 public:
  explicit Encoder(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }
  const PlaceEncoder& place() const { return place_; }
  std::size_t dimension() const { return place_.dimension(); }

  // bind(place code of state, tactile embedding of (rho, patch)).
  Eigen::VectorXd query(const JointAngles& state, double rho, const PatchSpec& patch) const;
  Eigen::VectorXd query(const JointAngles& state, double rho, const PatchSpec& patch, Rope3dRotator& cache) const;

 private:
  static PlaceEncoder make_place(const EncoderConfig& config);

  EncoderConfig config_;
  PlaceEncoder place_;
};

}  // namespace hasm
