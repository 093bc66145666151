#pragma once

namespace terragan {

/// Instance-noise intensity schedules for discriminator hindering.
enum class NoiseSchedule {
  kNone = 0,
  /// Linear ramp from 0 to 0.5 across the full run.
  kSchedule1 = 1,
  /// Ramp to 0.5 at the halfway point, then descend at half the ramp's
  /// amplitude (the noise drops to half right after the midpoint).
  kSchedule2 = 2,
  /// Ramp to 0.5 at the halfway point, then descend at the same rate back
  /// to 0; symmetric about the midpoint.
  kSchedule3 = 3,
  /// Deprecated: the naive form of schedule 2 whose second branch cancels
  /// to a constant 0. Kept selectable for comparison runs only.
  kSchedule2Literal = 4,
};

/// Noise intensity for the given epoch. epoch may range over [0, epochs];
/// epochs must be >= 2. Throws DataError outside those bounds.
double noise_factor(NoiseSchedule schedule, int epoch, int epochs);

}  // namespace terragan
