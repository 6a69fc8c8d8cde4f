#include "ledits/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ledits {

void validate(const GuidanceConfig& config) {
  if (!std::isfinite(config.target_scale) || config.target_scale < 0.0) {
    throw ParameterError("guidance: target scale must be finite and >= 0");
  }
  for (const auto& e : config.concepts) {
    if (!std::isfinite(e.scale) || e.scale < 0.0) {
      throw ParameterError("guidance: concept scale must be finite and >= 0");
    }
    if (e.warmup < 0) throw ParameterError("guidance: warmup must be >= 0");
    if (!(e.threshold >= 0.0 && e.threshold < 1.0)) {
      throw ParameterError("guidance: threshold must lie in [0, 1)");
    }
  }
}

Vec cfg_combine(std::span<const double> eps_uncond, std::span<const double> eps_target,
                double target_scale) {
  return axpby(1.0 - target_scale, eps_uncond, target_scale, eps_target);
}

std::size_t retained_count(std::size_t n, double threshold) {
  if (n == 0) return 0;
  // (1 - 0.95) * 100 evaluates to 5.000000000000004; absorb that before ceil.
  const double raw = (1.0 - threshold) * static_cast<double>(n);
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<std::size_t> top_magnitude_indices(std::span<const double> d, double threshold) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = retained_count(d.size(), threshold);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(d[a]);
                      const double mb = std::abs(d[b]);
                      return ma != mb ? ma > mb : a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Vec concept_term(std::span<const double> eps_uncond, std::span<const double> eps_concept,
                 const ConceptEdit& edit, int step_index) {
  require_same_size(eps_uncond.size(), eps_concept.size(), "concept_term");
  Vec term(eps_uncond.size(), 0.0);
  if (step_index < edit.warmup) return term;
  const Vec diff = axpby(1.0, eps_concept, -1.0, eps_uncond);
  const double sign = edit.direction == EditDirection::add ? 1.0 : -1.0;
  for (std::size_t i : top_magnitude_indices(diff, edit.threshold)) {
    term[i] = sign * edit.scale * diff[i];
  }
  return term;
}

Vec guided_eps(std::span<const double> x_t, int t, int step_index, const NoisePredictor& predictor,
               const Condition& target, const GuidanceConfig& config) {
  const Vec eps_u = predictor.predict(x_t, t, Condition::unconditional());
  const Vec eps_target = target.is_unconditional() ? eps_u : predictor.predict(x_t, t, target);
  Vec eps = cfg_combine(eps_u, eps_target, config.target_scale);
  const Vec& baseline = config.baseline == ConceptBaseline::unconditional ? eps_u : eps_target;
  for (const auto& edit : config.concepts) {
    if (step_index < edit.warmup) continue;
    const Vec eps_e = predictor.predict(x_t, t, edit.condition);
    const Vec term = concept_term(baseline, eps_e, edit, step_index);
    for (std::size_t i = 0; i < eps.size(); ++i) eps[i] += term[i];
  }
  return eps;
}

}  // namespace ledits
