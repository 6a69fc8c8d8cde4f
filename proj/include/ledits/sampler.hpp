#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ledits/predictor.hpp"
#include "ledits/rng.hpp"
#include "ledits/schedule.hpp"
#include "ledits/vec.hpp"

namespace ledits {

// Mean of the reverse step:
//   sqrt(abar_{t-1}) (x_t - sqrt(1 - abar_t) eps) / sqrt(abar_t) + sqrt(1 - abar_{t-1} - sigma_t^2) eps
// Throws ScheduleError if the second radicand is negative.
Vec mu_hat(std::span<const double> x_t, std::span<const double> eps, int t,
           const NoiseSchedule& schedule);

struct ReverseStepInput {
  Vec x_t;
  Vec eps;
  int t = 1;
  std::optional<Vec> z;  // absent: fresh N(0, I) from the rng, or nothing when sigma_t == 0
};

// x_{t-1} = mu_hat + sigma_t z. rng is only touched when z is absent and sigma_t > 0.
Vec reverse_step(const ReverseStepInput& in, const NoiseSchedule& schedule, Rng* rng = nullptr);

struct Generation {
  Vec x0;
  std::vector<Vec> trajectory;  // trajectory[t] = x_t, t = 0..T
};

// Ancestral sampling from t = T down to 1. The rng seeded with `seed` draws x_T
// (unless supplied) and then z_T, ..., z_2 as needed.
Generation generate(const NoisePredictor& predictor, const Condition& condition,
                    const NoiseSchedule& schedule, std::uint64_t seed,
                    std::optional<Vec> x_T = std::nullopt);

}  // namespace ledits
