#include "ledits/schedule.hpp"

#include <cmath>
#include <string>

#include "ledits/error.hpp"

namespace ledits {

ScheduleParams ScheduleParams::defaults(int T, double eta) {
  ScheduleParams p;
  p.T = T;
  p.beta_start = 1e-4 * (1000.0 / T);
  p.beta_end = 0.02 * (1000.0 / T);
  p.eta = eta;
  return p;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

NoiseSchedule build_schedule(int T, double beta_start, double beta_end, double eta) {
  if (T < 1) throw ParameterError("schedule: T must be >= 1, got " + std::to_string(T));
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ParameterError("schedule: need 0 < beta_start <= beta_end < 1, got beta_start=" +
                         std::to_string(beta_start) + " beta_end=" + std::to_string(beta_end));
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ParameterError("schedule: eta must lie in [0, 1], got " + std::to_string(eta));
  }

  NoiseSchedule s;
  s.params_ = {T, beta_start, beta_end, eta};
  s.betas_.resize(T);
  s.alphas_.resize(T);
  s.alpha_bars_.resize(T + 1);
  s.sigmas_.resize(T);
  s.alpha_bars_[0] = 1.0;
  for (int i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / (T - 1);
    s.betas_[i] = beta_start + (beta_end - beta_start) * frac;
    s.alphas_[i] = 1.0 - s.betas_[i];
    s.alpha_bars_[i + 1] = s.alpha_bars_[i] * s.alphas_[i];
  }
  for (int t = 1; t <= T; ++t) {
    const double prev = s.alpha_bars_[t - 1];
    const double cur = s.alpha_bars_[t];
    const double var = s.betas_[t - 1] * (1.0 - prev) / (1.0 - cur);
    s.sigmas_[t - 1] = eta * std::sqrt(var);
    // Keeps sqrt(1 - abar_{t-1} - sigma_t^2) real in the mean predictor.
    if (t >= 2 && !(s.sigmas_[t - 1] < std::sqrt(1.0 - prev))) {
      throw ParameterError("schedule: sigma_" + std::to_string(t) + " >= sqrt(1 - abar_" +
                           std::to_string(t - 1) + ")");
    }
  }
  return s;
}

void NoiseSchedule::check_t(int t, int lo) const {
  if (t < lo || t > params_.T) {
    throw IndexError("timestep " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                     std::to_string(params_.T) + "]");
  }
}

double NoiseSchedule::beta(int t) const {
  check_t(t, 1);
  return betas_[t - 1];
}

double NoiseSchedule::alpha(int t) const {
  check_t(t, 1);
  return alphas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_t(t, 0);
  return alpha_bars_[t];
}

double NoiseSchedule::sigma(int t) const {
  check_t(t, 1);
  return sigmas_[t - 1];
}

std::uint64_t NoiseSchedule::beta_fingerprint() const {
  std::uint64_t h = fnv1a64(&params_.T, sizeof(params_.T));
  h = fnv1a64(&params_.beta_start, sizeof(double), h);
  return fnv1a64(&params_.beta_end, sizeof(double), h);
}

std::uint64_t NoiseSchedule::fingerprint() const {
  const std::uint64_t h = beta_fingerprint();
  return fnv1a64(&params_.eta, sizeof(double), h);
}

double sigma_at(const NoiseSchedule& schedule, int t) { return schedule.sigma(t); }

}  // namespace ledits
