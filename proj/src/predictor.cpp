#include "ledits/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ledits {

Condition Condition::subset(std::vector<int> indices) {
  if (indices.empty()) throw ParameterError("condition: subset must be nonempty");
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (indices.front() < 0) throw ParameterError("condition: negative component index");
  Condition c;
  c.kind_ = Kind::subset;
  c.indices_ = std::move(indices);
  return c;
}

std::string Condition::to_string() const {
  if (is_unconditional()) return "unconditional";
  std::string s = "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(indices_[i]);
  }
  return s + "}";
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ParameterError("mixture: no components");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) throw ParameterError("mixture: dimension must be >= 1");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.diag_cov.size() != dim_) {
      throw ParameterError("mixture: inconsistent component dimensions");
    }
    if (!(c.weight > 0.0)) throw ParameterError("mixture: weights must be positive");
    for (double v : c.diag_cov) {
      if (!(v > 0.0)) throw ParameterError("mixture: covariance entries must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("mixture: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

void GaussianMixture::check_condition(const Condition& c) const {
  for (int k : c.indices()) {
    if (static_cast<std::size_t>(k) >= components_.size()) {
      throw ParameterError("condition " + c.to_string() + " references component " +
                           std::to_string(k) + " of a " + std::to_string(size()) +
                           "-component mixture");
    }
  }
}

GaussianMixture GaussianMixture::restrict(const Condition& c) const {
  if (c.is_unconditional()) return *this;
  check_condition(c);
  std::vector<MixtureComponent> sub;
  double total = 0.0;
  for (int k : c.indices()) {
    sub.push_back(components_[k]);
    total += components_[k].weight;
  }
  for (auto& comp : sub) comp.weight /= total;
  // Renormalized weights can miss 1 by an ulp or two; fold the remainder into the last one.
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sub.size(); ++i) acc += sub[i].weight;
  sub.back().weight = 1.0 - acc;
  return GaussianMixture(std::move(sub));
}

Vec GaussianMixture::sample_component(std::size_t k, Rng& rng) const {
  const auto& c = components_.at(k);
  Vec x(dim_);
  for (std::size_t j = 0; j < dim_; ++j) x[j] = c.mean[j] + std::sqrt(c.diag_cov[j]) * rng.normal();
  return x;
}

Vec GaussianMixture::sample(Rng& rng, int* label) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t k = components_.size() - 1;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    acc += components_[i].weight;
    if (u < acc) {
      k = i;
      break;
    }
  }
  if (label) *label = static_cast<int>(k);
  return sample_component(k, rng);
}

namespace {

struct MarginalTerms {
  std::vector<double> log_joint;  // log w_k + log N_k(x)
  std::vector<Vec> scaled_resid;  // (x - sqrt(abar) mu_k) / v_k
};

MarginalTerms marginal_terms(std::span<const double> x, int t, const GaussianMixture& gmm,
                             const NoiseSchedule& schedule) {
  require_same_size(x.size(), gmm.dimension(), "mixture predictor");
  const double abar = schedule.alpha_bar(t);
  const double root_abar = std::sqrt(abar);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  MarginalTerms out;
  out.log_joint.resize(gmm.size());
  out.scaled_resid.resize(gmm.size());
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    const auto& c = gmm.component(k);
    Vec r(x.size());
    double lp = std::log(c.weight);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = abar * c.diag_cov[j] + (1.0 - abar);
      const double d = x[j] - root_abar * c.mean[j];
      lp -= 0.5 * (log_two_pi + std::log(v) + d * d / v);
      r[j] = d / v;
    }
    out.log_joint[k] = lp;
    out.scaled_resid[k] = std::move(r);
  }
  return out;
}

Vec softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    z += p[k];
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

Vec component_posterior(std::span<const double> x, int t, const GaussianMixture& gmm,
                        const NoiseSchedule& schedule) {
  return softmax(marginal_terms(x, t, gmm, schedule).log_joint);
}

Vec gmm_eps(std::span<const double> x, int t, const GaussianMixture& gmm,
            const NoiseSchedule& schedule) {
  const MarginalTerms terms = marginal_terms(x, t, gmm, schedule);
  const Vec resp = softmax(terms.log_joint);
  const double scale = std::sqrt(1.0 - schedule.alpha_bar(t));
  Vec eps(x.size(), 0.0);
  for (std::size_t k = 0; k < gmm.size(); ++k) {
    for (std::size_t j = 0; j < x.size(); ++j) eps[j] += resp[k] * terms.scaled_resid[k][j];
  }
  for (auto& e : eps) e *= scale;
  return eps;
}

Vec conditional_eps(std::span<const double> x, int t, const GaussianMixture& gmm,
                    const Condition& c, const NoiseSchedule& schedule) {
  if (c.is_unconditional()) return gmm_eps(x, t, gmm, schedule);
  return gmm_eps(x, t, gmm.restrict(c), schedule);
}

}  // namespace ledits
