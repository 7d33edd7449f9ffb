#include "hasm/tactile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hasm/error.hpp"
#include "hasm/log.hpp"

namespace hasm {
namespace {

// Window membership tolerance; timestamps are multiples of the tick period
// and may carry rounding error at the boundary.
constexpr double kTimeEps = 1e-9;

}  // namespace

void IzhikevichParams::validate() const {
  if (!(a > 0.0)) fail(ErrorKind::config, "izhikevich: a must be positive");
  if (!(v_th > c)) fail(ErrorKind::config, "izhikevich: v_th must exceed the reset value c");
}

IzhikevichState IzhikevichState::resting(const IzhikevichParams& p) {
  const double qa = 0.04;
  const double qb = 5.0 - p.b;
  const double qc = 140.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return {p.c, p.b * p.c};
  const double v = (-qb - std::sqrt(disc)) / (2.0 * qa);
  return {v, p.b * v};
}

double l1_magnitude(const CellForces& cell) { return std::abs(cell.f1) + std::abs(cell.f2) + std::abs(cell.f3); }

double soft_threshold(double magnitude, double tau) { return std::max(0.0, magnitude - tau); }

double accumulate_window(std::span<const ForceSample> samples, double t0, double delta_t) {
  double total = 0.0;
  for (const auto& s : samples) {
    if (s.timestamp + kTimeEps < t0 - delta_t) continue;
    if (s.timestamp > t0 + kTimeEps) break;
    total += s.magnitude;
  }
  return total;
}

IzhikevichStep izhikevich_step(IzhikevichState s, double current, const IzhikevichParams& p, double dt_ms) {
  if (!(dt_ms > 0.0 && dt_ms <= 1.0)) fail(ErrorKind::invalid_argument, "izhikevich_step: dt must be in (0, 1] ms");
  const double dv = (0.04 * s.v * s.v + 5.0 * s.v + 140.0 - s.u + current) * dt_ms;
  const double du = p.a * (p.b * s.v - s.u) * dt_ms;
  IzhikevichStep out;
  out.state = {s.v + dv, s.u + du};
  if (!std::isfinite(out.state.v) || !std::isfinite(out.state.u)) {
    log_warning("izhikevich neuron diverged; state reset");
    out.state = {p.c, p.b * p.c};
    out.diverged = true;
    return out;
  }
  if (out.state.v >= p.v_th) {
    out.state.v = p.c;
    out.state.u += p.d_reset;
    out.spiked = true;
  }
  return out;
}

double drive_current(double f_total, double gain) { return gain * f_total; }

double spike_rate(std::span<const double> spike_times, double now, double window) {
  if (!(window > 0.0)) fail(ErrorKind::invalid_argument, "spike_rate: window must be positive");
  const auto count = std::count_if(spike_times.begin(), spike_times.end(),
                                   [&](double t) { return t > now - window && t <= now + kTimeEps; });
  return static_cast<double>(count) / window;
}

double density(double rate, double max_rate) {
  if (!(max_rate > 0.0)) fail(ErrorKind::invalid_argument, "density: max rate must be positive");
  return std::clamp(rate / max_rate, 0.0, 1.0);
}

Eigen::VectorXd expanded_force_vector(double rho, const PlaceCode& place) {
  const auto neurons = static_cast<std::size_t>(place.rates.size());
  const unsigned n = place.bits_per_neuron;
  if (static_cast<std::size_t>(place.bits.size()) != neurons * n) {
    fail(ErrorKind::dimension, "build_embedding: place code length does not match its rate vector");
  }
  rho = std::clamp(rho, 0.0, 1.0);
  const auto flips = static_cast<std::size_t>(std::lround(rho * static_cast<double>(neurons)));

  std::vector<std::size_t> order(neurons);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flips), order.end(),
                    [&](std::size_t lhs, std::size_t rhs) {
                      const double a = place.rates[static_cast<Eigen::Index>(lhs)];
                      const double b = place.rates[static_cast<Eigen::Index>(rhs)];
                      return a != b ? a > b : lhs < rhs;
                    });

  Eigen::VectorXd expanded = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(neurons * n), -1.0);
  for (std::size_t k = 0; k < flips; ++k) {
    expanded.segment(static_cast<Eigen::Index>(order[k] * n), n).setConstant(1.0);
  }
  return expanded;
}

double embedding_angle(double rho, int theta_sign) {
  return static_cast<double>(theta_sign) * std::clamp(rho, 0.0, 1.0) * std::numbers::pi / 2.0;
}

Eigen::VectorXd build_embedding(double rho, const PlaceCode& place, const Vec3& axis, int theta_sign) {
  Eigen::VectorXd f = expanded_force_vector(rho, place);
  RotationSpec spec{axis, embedding_angle(rho, theta_sign), static_cast<std::size_t>(f.size())};
  return rope3d(f, spec);
}

Eigen::VectorXd build_embedding(double rho, const PlaceCode& place, const Vec3& axis, int theta_sign,
                                Rope3dRotator& cache) {
  Eigen::VectorXd f = expanded_force_vector(rho, place);
  RotationSpec spec{axis, embedding_angle(rho, theta_sign), static_cast<std::size_t>(f.size())};
  return cache.apply(f, spec);
}

void TactileConfig::validate() const {
  if (!(soft_threshold >= 0.0)) fail(ErrorKind::config, "tactile: soft threshold must be >= 0");
  if (!(accumulation_window > 0.0)) fail(ErrorKind::config, "tactile: accumulation window must be positive");
  if (!(gain > 0.0)) fail(ErrorKind::config, "tactile: drive gain must be positive");
  if (!(max_rate > 0.0)) fail(ErrorKind::config, "tactile: max rate must be positive");
  if (!(rate_window > 0.0)) fail(ErrorKind::config, "tactile: spike-rate window must be positive");
  if (!(step_ms > 0.0 && step_ms <= 1.0)) fail(ErrorKind::config, "tactile: Euler step must be in (0, 1] ms");
  neuron.validate();
}

PatchEncoder::PatchEncoder(TactileConfig config, double nominal_interval)
    : config_(config), nominal_interval_(nominal_interval) {
  config_.validate();
  if (!(nominal_interval_ > 0.0)) fail(ErrorKind::config, "tactile: nominal frame interval must be positive");
  reset();
}

void PatchEncoder::reset() {
  state_ = IzhikevichState::resting(config_.neuron);
  history_.clear();
  spikes_.clear();
  last_timestamp_.reset();
}

TactileSample PatchEncoder::step(const PatchFrame& frame) {
  const double t = frame.timestamp;
  if (last_timestamp_ && t <= *last_timestamp_) {
    fail(ErrorKind::data, "tactile: frame timestamps must be strictly increasing");
  }

  double magnitude = 0.0;
  for (const auto& cell : frame.cells) magnitude += soft_threshold(l1_magnitude(cell), config_.soft_threshold);
  history_.push_back({t, magnitude});
  while (!history_.empty() && history_.front().timestamp + kTimeEps < t - config_.accumulation_window) {
    history_.pop_front();
  }

  TactileSample out;
  out.timestamp = t;
  out.f_total = accumulate_window(std::vector<ForceSample>(history_.begin(), history_.end()), t,
                                  config_.accumulation_window);
  out.current = drive_current(out.f_total, config_.gain);

  const double interval = last_timestamp_ ? t - *last_timestamp_ : nominal_interval_;
  const double start = t - interval;
  const auto substeps = static_cast<long>(std::lround(interval * 1000.0 / config_.step_ms));
  for (long k = 0; k < substeps; ++k) {
    const IzhikevichStep r = izhikevich_step(state_, out.current, config_.neuron, config_.step_ms);
    state_ = r.state;
    out.diverged = out.diverged || r.diverged;
    if (r.spiked) {
      ++out.spikes;
      spikes_.push_back(start + static_cast<double>(k + 1) * config_.step_ms / 1000.0);
    }
  }
  while (!spikes_.empty() && spikes_.front() <= t - config_.rate_window) spikes_.pop_front();

  out.rate = spike_rate(std::vector<double>(spikes_.begin(), spikes_.end()), t, config_.rate_window);
  out.rho = density(out.rate, config_.max_rate);
  last_timestamp_ = t;
  return out;
}

}  // namespace hasm
