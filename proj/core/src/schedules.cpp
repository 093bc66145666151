#include "terragan/schedules.hpp"

#include "terragan/errors.hpp"

namespace terragan {

double noise_factor(NoiseSchedule schedule, int epoch, int epochs) {
  if (epochs < 2) throw DataError("noise_factor: epochs must be >= 2");
  if (epoch < 0 || epoch > epochs)
    throw DataError("noise_factor: epoch out of range");
  const double e = epoch;
  const double half = epochs / 2.0;
  switch (schedule) {
    case NoiseSchedule::kNone:
      return 0.0;
    case NoiseSchedule::kSchedule1:
      return e * 0.5 / epochs;
    case NoiseSchedule::kSchedule2:
      if (e <= half) return e * 0.5 / half;
      return (0.5 - (e - half) * 0.5 / half) / 2.0;
    case NoiseSchedule::kSchedule3:
      if (e <= half) return e * 0.5 / half;
      return 0.5 - (e - half) * 0.5 / half;
    case NoiseSchedule::kSchedule2Literal:
      if (e <= half) return e * 0.5 / half;
      return 0.5 - e * 0.5 / e;
  }
  throw DataError("noise_factor: unknown schedule");
}

}  // namespace terragan
