#include "ledits/pipeline.hpp"

#include <iostream>

#include "ledits/sampler.hpp"

namespace ledits {

void EditParams::validate() const {
  if (skip < 0 || skip >= schedule.T) {
    throw ParameterError("edit: skip must lie in [0, T), got " + std::to_string(skip));
  }
  if (schedule.eta <= 0.0) {
    throw InversionError("edit: inversion requires eta > 0 (sigma_t = 0 makes z_t undefined)");
  }
  ledits::validate(guidance);
}

EditResult edit_from_inversion(const InversionResult& inv, const NoisePredictor& predictor,
                               const NoiseSchedule& schedule, const EditParams& params) {
  params.validate();
  check_compatible(inv, schedule);
  if (predictor.schedule_fingerprint() != schedule.beta_fingerprint()) {
    throw CompatibilityError("edit: predictor was built for a different noise schedule");
  }
  predictor.check_condition(params.target);
  for (const auto& e : params.guidance.concepts) predictor.check_condition(e.condition);
  if (inv.condition != params.inversion_condition) {
    std::cerr << "warning: inversion was computed with condition " << inv.condition.to_string()
              << ", edit expects " << params.inversion_condition.to_string() << "\n";
  }

  const int start = schedule.steps() - params.skip;
  EditResult r;
  r.trajectory.reserve(start + 1);
  r.trajectory.push_back(inv.x(start));
  int step_index = 0;
  for (int t = start; t >= 1; --t, ++step_index) {
    const Vec& x = r.trajectory.back();
    const Vec eps = guided_eps(x, t, step_index, predictor, params.target, params.guidance);
    Vec next = mu_hat(x, eps, t, schedule);
    // sigma_1 = 0; the last step carries the stored x_0 residual instead of a noise map.
    const Vec& extra = t >= 2 ? inv.z(t) : inv.final_residual;
    const double coef = t >= 2 ? schedule.sigma(t) : 1.0;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += coef * extra[i];
    r.trajectory.push_back(std::move(next));
  }
  r.edited = r.trajectory.back();
  return r;
}

EditResult ledits_edit(std::span<const double> x0, const NoisePredictor& predictor,
                       const EditParams& params) {
  params.validate();
  const NoiseSchedule schedule = build_schedule(params.schedule);
  const InversionResult inv =
      invert(x0, predictor, params.inversion_condition, schedule, params.seed);
  return edit_from_inversion(inv, predictor, schedule, params);
}

GrayImage edit_image(const GrayImage& image, const MlpPredictor& predictor,
                     const EditParams& params) {
  require_same_size(image.pixels.size(), predictor.dimension(), "edit_image");
  const EditResult r = ledits_edit(to_model_space(image.pixels), predictor, params);
  GrayImage out = image;
  out.pixels = to_pixel_space(r.edited);
  return out;
}

}  // namespace ledits
