#pragma once

#include <cstdint>

#include "ledits/predictor.hpp"
#include "ledits/toy_model.hpp"

namespace ledits {

inline constexpr int kImageSide = 16;
inline constexpr int kImageClasses = 2;  // 0: rectangles, 1: discs

// n points from the mixture, labelled by component.
LabeledDataset sample_mixture_dataset(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed);

// One 16x16 image (flattened row-major, values in [-1, 1]) of the given class:
// a bright axis-aligned rectangle (0) or disc (1) on a dark background.
Vec render_shape(int shape_class, Rng& rng);

// n images with alternating class labels.
LabeledDataset shape_dataset(std::size_t n, std::uint64_t seed);

// Labelled reference density for posterior measurements: each mixture component
// belongs to one class.
struct ReferenceDensity {
  GaussianMixture mixture;
  std::vector<int> component_class;
  int classes = 1;

  // Class responsibilities of x under the reference diffused to step t.
  Vec class_posterior(std::span<const double> x, int t, const NoiseSchedule& schedule) const;
};

// Components are the classes.
ReferenceDensity mixture_reference(const GaussianMixture& gmm);

// Kernel density: one isotropic Gaussian of variance `bandwidth` per point, equal weights.
ReferenceDensity kernel_reference(const LabeledDataset& data, double bandwidth);

}  // namespace ledits
