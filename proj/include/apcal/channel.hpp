// Ground-truth channel description linking two access points, optionally via
// one dominant reflector, together with their clock and phase misalignment.
#pragma once

#include "apcal/geometry.hpp"

namespace apcal {

/// Synchronization mismatch of node B relative to node A.
///
/// On the A -> B link the receiver timestamps run early by clock_offset_s and
/// the downconverter contributes phase_offset_rad; on the reverse link both
/// enter with opposite signs. Reciprocity of the propagation medium itself is
/// assumed throughout.
struct OffsetTruth {
  double clock_offset_s = 0.0;    ///< delta_t as seen on the A -> B link
  double phase_offset_rad = 0.0;  ///< delta_phi as seen on the A -> B link
};

/// Complete ground truth for one deployment: geometry, offsets, and the
/// phase picked up on the reflected bounce.
struct ChannelTruth {
  Position2D pos_a;
  Position2D pos_b;
  Position2D pos_reflector;
  OffsetTruth offsets;
  /// Extra phase of the reflected path (scattering coefficient argument).
  /// Direction-independent: both link directions see the same value.
  double reflection_phase_rad = 0.0;
  /// False: single line-of-sight path. True: line-of-sight plus one bounce.
  bool two_path = true;

  /// Direct-path delay between the access points [s].
  double los_delay_s() const;
  /// Bounce-path delay via the reflector [s]; equal in both directions.
  double reflected_delay_s() const;
  /// Free-space amplitude gain of the direct path at f_c.
  double los_gain(double carrier_freq_hz) const;
  /// Free-space amplitude gain of the bounce path at f_c.
  double reflected_gain(double carrier_freq_hz) const;
};

/// Total carrier-referenced phase of one received path:
/// -2*pi*f_c*pseudo_delay - additive_offset. The pseudo delay already folds
/// the clock offset into the propagation delay; additive_offset collects the
/// downconversion and reflection phases applicable to that path/direction.
double carrier_phase_rad(double carrier_freq_hz, double pseudo_delay_s,
                         double additive_offset_rad);

}  // namespace apcal
