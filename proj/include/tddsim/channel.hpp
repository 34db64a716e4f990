#pragma once

#include <Eigen/Core>
#include <span>

#include "tddsim/geometry.hpp"
#include "tddsim/rng.hpp"

namespace tddsim {

/// Linear-domain link parameters. Powers are converted from dBm once at
/// config load; alpha must exceed 2 so distant interference stays summable.
struct ChannelParams {
  double alpha = 3.8;
  double p_sap_w = 0.0;
  double p_ue_w = 0.0;
};

/// One transmitter that is on the air this slot, with its per-link Rayleigh
/// power gain toward the receiver under evaluation.
struct ActiveTransmitter {
  Eigen::Vector2d position;
  double power_w = 0.0;
  double fade = 0.0;
};

/// Received SIR. interference_w == 0 marks the no-interference case; the
/// value is then +infinity and decoding succeeds for any finite threshold.
struct SirSample {
  double value = 0.0;
  double desired_w = 0.0;
  double interference_w = 0.0;

  bool no_interference() const { return interference_w == 0.0; }
};

/// d^-alpha. Throws DegenerateGeometryError at d <= 0 (co-located nodes).
double path_gain(double d_m, double alpha);

/// Unit-mean exponential power gain (Rayleigh amplitude fading), drawn fresh
/// per link per slot.
double draw_fade(RandomStream& rng);

/// SIR at `receiver` for the `desired` link against the given co-slot
/// interferers, torus distances throughout. Interference is accumulated in
/// list order. Throws DegenerateGeometryError if the receiver coincides with
/// any transmitter.
SirSample compute_sir(const Eigen::Vector2d& receiver,
                      const ActiveTransmitter& desired,
                      std::span<const ActiveTransmitter> interferers,
                      const ChannelParams& params, const Region& region);

}  // namespace tddsim
