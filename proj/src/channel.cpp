#include "apcal/channel.hpp"

#include "apcal/constants.hpp"

namespace apcal {

double ChannelTruth::los_delay_s() const {
  return propagation_delay_s(pos_a, pos_b);
}

double ChannelTruth::reflected_delay_s() const {
  return reflection_delay_s(pos_a, pos_reflector, pos_b);
}

double ChannelTruth::los_gain(double carrier_freq_hz) const {
  return path_gain(distance_m(pos_a, pos_b), carrier_freq_hz);
}

double ChannelTruth::reflected_gain(double carrier_freq_hz) const {
  const double length_m =
      distance_m(pos_a, pos_reflector) + distance_m(pos_reflector, pos_b);
  return path_gain(length_m, carrier_freq_hz);
}

double carrier_phase_rad(double carrier_freq_hz, double pseudo_delay_s,
                         double additive_offset_rad) {
  return -kTwoPi * carrier_freq_hz * pseudo_delay_s - additive_offset_rad;
}

}  // namespace apcal
