#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ledits/predictor.hpp"
#include "ledits/schedule.hpp"
#include "ledits/vec.hpp"

namespace ledits {

// Edit-friendly DDPM inversion of one source point.
//
// xs[t-1] = x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) aux_noise[t-1], with aux_noise
// drawn independently per t. zs[t-1] = z_t = (x_{t-1} - mu_hat_t(x_t)) / sigma_t for
// t >= 2. sigma_1 = 0, so z_1 is stored as zero and the last step's residual
// x_0 - mu_hat_1(x_1) is kept in final_residual instead.
struct InversionResult {
  Vec source;                   // x_0
  std::vector<Vec> xs;          // x_1..x_T
  std::vector<Vec> zs;          // z_1..z_T
  std::vector<Vec> aux_noise;   // the independent corruptions behind xs
  Vec final_residual;
  Condition condition = Condition::unconditional();
  std::uint64_t schedule_fingerprint = 0;

  int steps() const { return static_cast<int>(xs.size()); }
  const Vec& x_T() const { return xs.back(); }
  // x_t for 0 <= t <= T; x(0) is the source.
  const Vec& x(int t) const { return t == 0 ? source : xs.at(t - 1); }
  const Vec& z(int t) const { return zs.at(t - 1); }
};

// Throws InversionError when eta == 0 (sigma_t = 0 for t >= 2) or x_0 is not finite.
InversionResult invert(std::span<const double> x0, const NoisePredictor& predictor,
                       const Condition& condition, const NoiseSchedule& schedule,
                       std::uint64_t seed);

// Runs the reverse loop from x_T with the stored noise maps and the given
// condition, returning x_0. Reproduces `source` when the condition matches.
Vec replay(const InversionResult& inv, const NoisePredictor& predictor,
           const Condition& condition, const NoiseSchedule& schedule);

// Throws CompatibilityError if `inv` was computed under a different schedule.
void check_compatible(const InversionResult& inv, const NoiseSchedule& schedule);

void save_inversions(const std::filesystem::path& path, const std::vector<InversionResult>& results);
std::vector<InversionResult> load_inversions(const std::filesystem::path& path);

}  // namespace ledits

namespace ledits {

// Across-run statistics of one noise-map coordinate at one timestep.
struct NoiseMapStat {
  int t = 0;
  int coord = 0;
  int runs = 0;
  double variance = 0.0;   // unbiased; NaN for a single run
  double lag1_corr = 0.0;  // corr(z_t, z_{t+1}) across runs; NaN at t = T or < 2 runs
  double z_score = 0.0;    // Fisher atanh(r) sqrt(runs - 3); NaN below 4 runs
};

// Rows for t = 2..T (z_1 is identically zero), coordinates in order.
std::vector<NoiseMapStat> noise_map_statistics(const std::vector<InversionResult>& runs);

}  // namespace ledits
