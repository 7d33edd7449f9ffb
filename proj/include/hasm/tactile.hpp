#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hasm/placecode.hpp"
#include "hasm/rope3d.hpp"

namespace hasm {

struct CellForces {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
};

struct PatchFrame {
  double timestamp = 0.0;
  std::string patch_id;
  std::vector<CellForces> cells;
  Vec3 axis = Vec3::UnitZ();
  int theta_sign = 1;
};

// Defaults are the regular-spiking variant used for skin patches.
struct IzhikevichParams {
  double a = 0.02;
  double b = 0.20;
  double c = -50.0;
  double d_reset = 0.50;
  double v_th = 30.0;

  void validate() const;
};

struct IzhikevichState {
  double v = 0.0;
  double u = 0.0;

  // Stable fixed point of the I = 0 dynamics (lower root of
  // 0.04 v^2 + (5 - b) v + 140 = 0, u = b v). Falls back to (c, b c) when
  // the parameters admit no real root.
  static IzhikevichState resting(const IzhikevichParams& params);
};

struct IzhikevichStep {
  IzhikevichState state;
  bool spiked = false;
  bool diverged = false;  // state was non-finite and got reset to (c, b c)
};

struct ForceSample {
  double timestamp = 0.0;
  double magnitude = 0.0;
};

double l1_magnitude(const CellForces& cell);
double soft_threshold(double magnitude, double tau);

// Sum of magnitudes with timestamp in [t0 - delta_t, t0]; `samples` sorted.
double accumulate_window(std::span<const ForceSample> samples, double t0, double delta_t);

// One forward-Euler step of `dt_ms` model milliseconds, both derivatives
// evaluated at the pre-step state, then the threshold reset.
IzhikevichStep izhikevich_step(IzhikevichState state, double current, const IzhikevichParams& params, double dt_ms);

double drive_current(double f_total, double gain);

// Spikes in (now - window, now] divided by window; times in seconds.
double spike_rate(std::span<const double> spike_times, double now, double window);

// clamp(rate / max_rate, 0, 1)
double density(double rate, double max_rate);

// Bipolar force vector F with the round(rho * M) most salient neurons set
// to +1 (salience = place.rates, ties to the lowest index), each entry
// repeated place.bits_per_neuron times. Not yet rotated.
Eigen::VectorXd expanded_force_vector(double rho, const PlaceCode& place);

// Rotation angle fed to RoPE3D for a patch: theta_sign * rho * pi / 2.
double embedding_angle(double rho, int theta_sign);

Eigen::VectorXd build_embedding(double rho, const PlaceCode& place, const Vec3& axis, int theta_sign);
Eigen::VectorXd build_embedding(double rho, const PlaceCode& place, const Vec3& axis, int theta_sign,
                                Rope3dRotator& cache);

struct TactileConfig {
  double soft_threshold = 0.3;        // N per cell
  double accumulation_window = 0.05;  // s
  double gain = 1.2;                  // current per accumulated N
  double max_rate = 700.0;            // spikes/s
  double rate_window = 0.25;          // s
  double step_ms = 0.5;               // Euler step in model ms
  IzhikevichParams neuron;

  void validate() const;
};

struct TactileSample {
  double timestamp = 0.0;
  double f_total = 0.0;
  double current = 0.0;
  double rate = 0.0;
  double rho = 0.0;
  int spikes = 0;  // emitted during the interval ending at timestamp
  bool diverged = false;
};

// Per-patch stateful pipeline: L1 + soft threshold per cell, summed over
// cells and over the accumulation window, drives one Izhikevich neuron
// integrated across the interval since the previous frame.
class PatchEncoder {
 public:
  PatchEncoder(TactileConfig config, double nominal_interval);

  TactileSample step(const PatchFrame& frame);
  void reset();

  const IzhikevichState& neuron() const { return state_; }
  const TactileConfig& config() const { return config_; }

 private:
  TactileConfig config_;
  double nominal_interval_;
  IzhikevichState state_;
  std::deque<ForceSample> history_;
  std::deque<double> spikes_;
  std::optional<double> last_timestamp_;
};

}  // namespace hasm
