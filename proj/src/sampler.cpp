#include "ledits/sampler.hpp"

#include <cmath>
#include <string>

namespace ledits {

Vec mu_hat(std::span<const double> x_t, std::span<const double> eps, int t,
           const NoiseSchedule& schedule) {
  require_same_size(x_t.size(), eps.size(), "mu_hat");
  const double abar = schedule.alpha_bar(t);
  const double abar_prev = schedule.alpha_bar(t - 1);
  const double sigma = schedule.sigma(t);
  const double radicand = 1.0 - abar_prev - sigma * sigma;
  if (radicand < 0.0) {
    throw ScheduleError("mu_hat: 1 - abar_{t-1} - sigma_t^2 < 0 at t=" + std::to_string(t));
  }
  const double c_x = std::sqrt(abar_prev) / std::sqrt(abar);
  const double c_eps = std::sqrt(radicand) - c_x * std::sqrt(1.0 - abar);
  Vec out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c_x * x_t[i] + c_eps * eps[i];
  return out;
}

Vec reverse_step(const ReverseStepInput& in, const NoiseSchedule& schedule, Rng* rng) {
  Vec out = mu_hat(in.x_t, in.eps, in.t, schedule);
  const double sigma = schedule.sigma(in.t);
  if (in.z) {
    require_same_size(in.z->size(), out.size(), "reverse_step z");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * (*in.z)[i];
  } else if (sigma > 0.0) {
    if (!rng) throw ParameterError("reverse_step: sigma_t > 0 with no z and no rng");
    for (auto& v : out) v += sigma * rng->normal();
  }
  return out;
}

Generation generate(const NoisePredictor& predictor, const Condition& condition,
                    const NoiseSchedule& schedule, std::uint64_t seed, std::optional<Vec> x_T) {
  predictor.check_condition(condition);
  const int T = schedule.steps();
  Rng rng(seed);
  Generation g;
  g.trajectory.resize(T + 1);
  if (x_T) {
    require_same_size(x_T->size(), predictor.dimension(), "generate x_T");
    g.trajectory[T] = std::move(*x_T);
  } else {
    g.trajectory[T] = rng.normal_vec(predictor.dimension());
  }
  for (int t = T; t >= 1; --t) {
    ReverseStepInput in;
    in.x_t = g.trajectory[t];
    in.eps = predictor.predict(in.x_t, t, condition);
    in.t = t;
    g.trajectory[t - 1] = reverse_step(in, schedule, &rng);
  }
  g.x0 = g.trajectory[0];
  return g;
}

}  // namespace ledits
