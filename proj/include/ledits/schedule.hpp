#pragma once

#include <cstdint>
#include <vector>

namespace ledits {

// Arguments to build_schedule. Defaults scale the usual 1000-step linear
// schedule (1e-4 .. 0.02) to T steps.
struct ScheduleParams {
  int T = 100;
  double beta_start = 1e-3;
  double beta_end = 0.2;
  double eta = 1.0;

  static ScheduleParams defaults(int T, double eta = 1.0);

  bool operator==(const ScheduleParams&) const = default;
};

// Immutable diffusion coefficients. Timesteps are 1-based: t = 1..T.
// alpha_bar(0) == 1 by convention, which makes sigma(1) == 0.
class NoiseSchedule {
 public:
  int steps() const { return params_.T; }
  double eta() const { return params_.eta; }
  const ScheduleParams& params() const { return params_; }

  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;  // valid for 0 <= t <= T
  double sigma(int t) const;

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& sigmas() const { return sigmas_; }

  // Hash of (T, beta_start, beta_end, eta). Identifies noise maps.
  std::uint64_t fingerprint() const;
  // Hash of (T, beta_start, beta_end). Identifies what a predictor was built for;
  // eta does not change the forward process.
  std::uint64_t beta_fingerprint() const;

 private:
  friend NoiseSchedule build_schedule(int, double, double, double);
  NoiseSchedule() = default;

  void check_t(int t, int lo) const;

  ScheduleParams params_;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;  // T + 1 entries, [0] = 1
  std::vector<double> sigmas_;
};

// betas linearly interpolate beta_start -> beta_end over T steps.
// Throws ParameterError on T < 1, betas outside 0 < start <= end < 1, or eta outside [0, 1].
NoiseSchedule build_schedule(int T, double beta_start, double beta_end, double eta);

inline NoiseSchedule build_schedule(const ScheduleParams& p) {
  return build_schedule(p.T, p.beta_start, p.beta_end, p.eta);
}

// sigma_t; throws IndexError unless 1 <= t <= T.
double sigma_at(const NoiseSchedule& schedule, int t);

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace ledits
