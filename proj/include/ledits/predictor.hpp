#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ledits/rng.hpp"
#include "ledits/schedule.hpp"
#include "ledits/vec.hpp"

namespace ledits {

// Conditioning stand-in for prompts and edit concepts: either the full
// distribution or a subset of mixture components (class ids for learned models).
class Condition {
 public:
  enum class Kind { unconditional, subset };

  static Condition unconditional() { return Condition(); }
  // Indices are sorted and deduplicated. Throws ParameterError on an empty or negative set.
  static Condition subset(std::vector<int> indices);

  Kind kind() const { return kind_; }
  bool is_unconditional() const { return kind_ == Kind::unconditional; }
  const std::vector<int>& indices() const { return indices_; }
  std::string to_string() const;

  bool operator==(const Condition&) const = default;

 private:
  Condition() = default;
  Kind kind_ = Kind::unconditional;
  std::vector<int> indices_;
};

struct MixtureComponent {
  double weight = 1.0;
  Vec mean;
  Vec diag_cov;
};

class GaussianMixture {
 public:
  // Validates: nonempty, consistent dimensions, positive weights summing to 1
  // within 1e-12, positive variances.
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  std::size_t size() const { return components_.size(); }
  std::size_t dimension() const { return dim_; }
  const MixtureComponent& component(std::size_t k) const { return components_.at(k); }
  const std::vector<MixtureComponent>& components() const { return components_; }

  // Sub-mixture over c.indices() with renormalized weights; identity for unconditional.
  GaussianMixture restrict(const Condition& c) const;
  void check_condition(const Condition& c) const;

  Vec sample_component(std::size_t k, Rng& rng) const;
  // Draws a component by weight, then a point from it.
  Vec sample(Rng& rng, int* label = nullptr) const;

 private:
  std::vector<MixtureComponent> components_;
  std::size_t dim_ = 0;
};

// epsilon-hat(x, t, condition). Implementations are immutable and deterministic.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Vec predict(std::span<const double> x, int t, const Condition& c) const = 0;
  virtual std::size_t dimension() const = 0;
  // Throws ParameterError when the predictor cannot evaluate c.
  virtual void check_condition(const Condition& c) const = 0;
  // NoiseSchedule::beta_fingerprint() of the forward process the predictor assumes.
  virtual std::uint64_t schedule_fingerprint() const = 0;
};

// Exact MMSE noise estimate for mixture data under the time-t marginal
// sum_k w_k N(sqrt(abar_t) mu_k, abar_t Sigma_k + (1 - abar_t) I):
// eps-hat = -sqrt(1 - abar_t) * grad log p_t(x).
Vec gmm_eps(std::span<const double> x, int t, const GaussianMixture& gmm,
            const NoiseSchedule& schedule);

Vec conditional_eps(std::span<const double> x, int t, const GaussianMixture& gmm,
                    const Condition& c, const NoiseSchedule& schedule);

// Responsibilities of each component under the time-t marginal.
Vec component_posterior(std::span<const double> x, int t, const GaussianMixture& gmm,
                        const NoiseSchedule& schedule);

class GmmPredictor final : public NoisePredictor {
 public:
  GmmPredictor(GaussianMixture gmm, NoiseSchedule schedule)
      : gmm_(std::move(gmm)), schedule_(std::move(schedule)) {}

  Vec predict(std::span<const double> x, int t, const Condition& c) const override {
    return conditional_eps(x, t, gmm_, c, schedule_);
  }
  std::size_t dimension() const override { return gmm_.dimension(); }
  void check_condition(const Condition& c) const override { gmm_.check_condition(c); }
  std::uint64_t schedule_fingerprint() const override { return schedule_.beta_fingerprint(); }

  const GaussianMixture& mixture() const { return gmm_; }

 private:
  GaussianMixture gmm_;
  NoiseSchedule schedule_;
};

}  // namespace ledits
