#pragma once

#include <cstdint>
#include <vector>

#include "ledits/guidance.hpp"
#include "ledits/image.hpp"
#include "ledits/inversion.hpp"
#include "ledits/schedule.hpp"
#include "ledits/toy_model.hpp"

namespace ledits {

// One LEDITS run. Defaults follow the reference hyper-parameters: T = 100,
// eta = 1, skip 36, target guidance 15 (concepts default to scale 7, warm-up 1,
// threshold 0.95).
struct EditParams {
  ScheduleParams schedule = ScheduleParams::defaults(100, 1.0);
  int skip = 36;
  std::uint64_t seed = 0;
  Condition target = Condition::unconditional();
  GuidanceConfig guidance;
  // Conditioning used to compute the inversion's noise maps.
  Condition inversion_condition = Condition::unconditional();

  // Throws ParameterError unless 0 <= skip < T and the guidance config is valid;
  // InversionError when eta == 0.
  void validate() const;
};

struct EditResult {
  Vec edited;
  // trajectory[k] is the state after k executed steps; trajectory.front() is the
  // inverted start state x_{T-skip}, trajectory.back() the output.
  std::vector<Vec> trajectory;
};

// Guided reverse loop from x_{T-skip} of an existing inversion, driven by its noise maps.
EditResult edit_from_inversion(const InversionResult& inv, const NoisePredictor& predictor,
                               const NoiseSchedule& schedule, const EditParams& params);

// Inversion followed by the guided reverse loop.
EditResult ledits_edit(std::span<const double> x0, const NoisePredictor& predictor,
                       const EditParams& params);

// ledits_edit on an image (pixels in [0, 1]) through a trained denoiser; the
// result is unclamped until written.
GrayImage edit_image(const GrayImage& image, const MlpPredictor& predictor,
                     const EditParams& params);

}  // namespace ledits
