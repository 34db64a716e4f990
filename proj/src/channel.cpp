#include "tddsim/channel.hpp"

#include <cmath>
#include <limits>

#include "tddsim/errors.hpp"

namespace tddsim {

double path_gain(double d_m, double alpha) {
  if (!(d_m > 0.0)) {
    throw DegenerateGeometryError("path_gain: non-positive distance");
  }
  return std::pow(d_m, -alpha);
}

double draw_fade(RandomStream& rng) { return rng.exponential(); }

SirSample compute_sir(const Eigen::Vector2d& receiver,
                      const ActiveTransmitter& desired,
                      std::span<const ActiveTransmitter> interferers,
                      const ChannelParams& params, const Region& region) {
  const double d0 = torus_distance(receiver, desired.position, region);
  const double desired_w =
      desired.power_w * desired.fade * path_gain(d0, params.alpha);

  double interference_w = 0.0;
  for (const ActiveTransmitter& tx : interferers) {
    const double d = torus_distance(receiver, tx.position, region);
    interference_w += tx.power_w * tx.fade * path_gain(d, params.alpha);
  }

  SirSample s;
  s.desired_w = desired_w;
  s.interference_w = interference_w;
  s.value = interference_w > 0.0
                ? desired_w / interference_w
                : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace tddsim
