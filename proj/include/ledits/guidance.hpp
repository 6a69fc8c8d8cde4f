#pragma once

#include <vector>

#include "ledits/predictor.hpp"
#include "ledits/vec.hpp"

namespace ledits {

enum class EditDirection { add, remove };

// Which estimate the concept differences are taken against.
enum class ConceptBaseline { unconditional, target };

struct ConceptEdit {
  Condition condition = Condition::unconditional();
  EditDirection direction = EditDirection::add;
  double scale = 7.0;
  int warmup = 1;          // executed steps before the term switches on
  double threshold = 0.95; // quantile of |difference| masked out, in [0, 1)
};

struct GuidanceConfig {
  double target_scale = 15.0;
  std::vector<ConceptEdit> concepts;
  ConceptBaseline baseline = ConceptBaseline::unconditional;
};

// Throws ParameterError on negative/non-finite scales, negative warmup or threshold outside [0, 1).
void validate(const GuidanceConfig& config);

// Classifier-free combination (1 - s) eps_u + s eps_c; exact at s = 0 and s = 1.
Vec cfg_combine(std::span<const double> eps_uncond, std::span<const double> eps_target,
                double target_scale);

// Number of coordinates a threshold keeps out of n: ceil((1 - threshold) n), at least 1.
std::size_t retained_count(std::size_t n, double threshold);

// Indices of the retained_count largest |d|, ties broken toward the lower index.
// Returned in ascending index order.
std::vector<std::size_t> top_magnitude_indices(std::span<const double> d, double threshold);

// +/- scale * (mask .* (eps_concept - eps_uncond)), or zero while step_index < warmup.
Vec concept_term(std::span<const double> eps_uncond, std::span<const double> eps_concept,
                 const ConceptEdit& edit, int step_index);

// cfg_combine(eps_u, eps_target, s) + sum_i concept_term(baseline, eps_{e_i}, edit_i, step_index)
Vec guided_eps(std::span<const double> x_t, int t, int step_index, const NoisePredictor& predictor,
               const Condition& target, const GuidanceConfig& config);

}  // namespace ledits
