#pragma once

#include "ledits/predictor.hpp"
#include "ledits/schedule.hpp"

namespace fixtures {

using ledits::GaussianMixture;

// The two-component task: overlapping unit-variance modes at (-1, 0) and (1, 0).
inline GaussianMixture two_component() {
  return GaussianMixture({{0.5, {-1.0, 0.0}, {1.0, 1.0}}, {0.5, {1.0, 0.0}, {1.0, 1.0}}});
}

inline GaussianMixture three_component() {
  return GaussianMixture({{0.2, {-1.5, 0.5}, {0.3, 0.6}},
                          {0.5, {1.0, 1.0}, {0.5, 0.2}},
                          {0.3, {0.2, -1.2}, {0.8, 0.4}}});
}

inline ledits::NoiseSchedule default_schedule(double eta = 1.0) {
  return ledits::build_schedule(ledits::ScheduleParams::defaults(100, eta));
}

}  // namespace fixtures
