#include "ledits/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace ledits {

LabeledDataset sample_mixture_dataset(const GaussianMixture& gmm, std::size_t n,
                                      std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset d;
  d.conditions = static_cast<int>(gmm.size());
  d.points.reserve(n);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int label = 0;
    d.points.push_back(gmm.sample(rng, &label));
    d.labels.push_back(label);
  }
  return d;
}

Vec render_shape(int shape_class, Rng& rng) {
  if (shape_class < 0 || shape_class >= kImageClasses) {
    throw ParameterError("render_shape: unknown class " + std::to_string(shape_class));
  }
  Vec img(kImageSide * kImageSide, -1.0);
  const double level = 2.0 * (0.7 + 0.3 * rng.uniform()) - 1.0;
  if (shape_class == 0) {
    const int w = rng.uniform_int(4, 10);
    const int h = rng.uniform_int(4, 10);
    const int x0 = rng.uniform_int(1, kImageSide - 1 - w);
    const int y0 = rng.uniform_int(1, kImageSide - 1 - h);
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) img[y * kImageSide + x] = level;
    }
  } else {
    const double r = 2.5 + 2.5 * rng.uniform();
    const double cx = r + 1.0 + (kImageSide - 2.0 * r - 2.0) * rng.uniform();
    const double cy = r + 1.0 + (kImageSide - 2.0 * r - 2.0) * rng.uniform();
    for (int y = 0; y < kImageSide; ++y) {
      for (int x = 0; x < kImageSide; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) img[y * kImageSide + x] = level;
      }
    }
  }
  return img;
}

LabeledDataset shape_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset d;
  d.conditions = kImageClasses;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % kImageClasses);
    d.points.push_back(render_shape(label, rng));
    d.labels.push_back(label);
  }
  return d;
}

Vec ReferenceDensity::class_posterior(std::span<const double> x, int t,
                                      const NoiseSchedule& schedule) const {
  const Vec r = component_posterior(x, t, mixture, schedule);
  Vec out(classes, 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) out[component_class[k]] += r[k];
  return out;
}

ReferenceDensity mixture_reference(const GaussianMixture& gmm) {
  ReferenceDensity ref{gmm, {}, static_cast<int>(gmm.size())};
  for (std::size_t k = 0; k < gmm.size(); ++k) ref.component_class.push_back(static_cast<int>(k));
  return ref;
}

ReferenceDensity kernel_reference(const LabeledDataset& data, double bandwidth) {
  if (data.points.empty()) throw ParameterError("kernel_reference: empty dataset");
  if (!(bandwidth > 0.0)) throw ParameterError("kernel_reference: bandwidth must be positive");
  const double n = static_cast<double>(data.points.size());
  std::vector<MixtureComponent> comps;
  for (const auto& p : data.points) comps.push_back({1.0 / n, p, Vec(p.size(), bandwidth)});
  // Make the weights sum to exactly 1 in floating point.
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < comps.size(); ++k) acc += comps[k].weight;
  comps.back().weight = 1.0 - acc;
  return {GaussianMixture(std::move(comps)), data.labels, data.conditions};
}

}  // namespace ledits
