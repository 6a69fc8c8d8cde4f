#include "ledits/inversion.hpp"

#include <cmath>
#include <limits>

#include "ledits/binary_io.hpp"
#include "ledits/rng.hpp"
#include "ledits/sampler.hpp"

namespace ledits {

namespace {

constexpr Magic kInversionMagic = {'L', 'E', 'D', 'I', 'N', 'V', '\0', '\0'};
constexpr std::uint32_t kInversionVersion = 1;

}  // namespace

InversionResult invert(std::span<const double> x0, const NoisePredictor& predictor,
                       const Condition& condition, const NoiseSchedule& schedule,
                       std::uint64_t seed) {
  const int T = schedule.steps();
  for (int t = 2; t <= T; ++t) {
    if (!(schedule.sigma(t) > 0.0)) {
      throw InversionError("inversion undefined: requires eta > 0 so that sigma_t > 0 for t >= 2 "
                           "(eta = " + std::to_string(schedule.eta()) + ")");
    }
  }
  require_same_size(x0.size(), predictor.dimension(), "invert");
  for (double v : x0) {
    if (!std::isfinite(v)) throw InversionError("inversion: x_0 has non-finite entries");
  }
  if (predictor.schedule_fingerprint() != schedule.beta_fingerprint()) {
    throw CompatibilityError("inversion: predictor was built for a different noise schedule");
  }
  predictor.check_condition(condition);

  const std::size_t d = x0.size();
  InversionResult r;
  r.source.assign(x0.begin(), x0.end());
  r.condition = condition;
  r.schedule_fingerprint = schedule.fingerprint();
  r.xs.resize(T);
  r.zs.resize(T);
  r.aux_noise.resize(T);

  Rng rng(seed);
  for (int t = 1; t <= T; ++t) {
    r.aux_noise[t - 1] = rng.normal_vec(d);
    r.xs[t - 1] = axpby(std::sqrt(schedule.alpha_bar(t)), x0, std::sqrt(1.0 - schedule.alpha_bar(t)),
                        r.aux_noise[t - 1]);
  }
  for (int t = T; t >= 2; --t) {
    const Vec& xt = r.xs[t - 1];
    const Vec mu = mu_hat(xt, predictor.predict(xt, t, condition), t, schedule);
    const Vec& prev = r.x(t - 1);
    const double sigma = schedule.sigma(t);
    Vec z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = (prev[i] - mu[i]) / sigma;
    r.zs[t - 1] = std::move(z);
  }
  r.zs[0] = Vec(d, 0.0);
  const Vec mu1 = mu_hat(r.xs[0], predictor.predict(r.xs[0], 1, condition), 1, schedule);
  r.final_residual = axpby(1.0, r.source, -1.0, mu1);
  return r;
}

void check_compatible(const InversionResult& inv, const NoiseSchedule& schedule) {
  if (inv.schedule_fingerprint != schedule.fingerprint() || inv.steps() != schedule.steps()) {
    throw CompatibilityError("inversion artifact was computed under a different noise schedule");
  }
}

Vec replay(const InversionResult& inv, const NoisePredictor& predictor, const Condition& condition,
           const NoiseSchedule& schedule) {
  check_compatible(inv, schedule);
  Vec x = inv.x_T();
  for (int t = schedule.steps(); t >= 2; --t) {
    x = reverse_step({x, predictor.predict(x, t, condition), t, inv.z(t)}, schedule);
  }
  Vec x0 = mu_hat(x, predictor.predict(x, 1, condition), 1, schedule);
  for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += inv.final_residual[i];
  return x0;
}

void save_inversions(const std::filesystem::path& path,
                     const std::vector<InversionResult>& results) {
  BinaryWriter w(path);
  w.magic(kInversionMagic);
  w.u32(kInversionVersion);
  w.u32(static_cast<std::uint32_t>(results.size()));
  for (const auto& r : results) {
    w.u64(r.schedule_fingerprint);
    w.u32(static_cast<std::uint32_t>(r.steps()));
    w.u32(static_cast<std::uint32_t>(r.source.size()));
    w.u32(r.condition.is_unconditional() ? 0 : 1);
    w.u32(static_cast<std::uint32_t>(r.condition.indices().size()));
    for (int k : r.condition.indices()) w.u32(static_cast<std::uint32_t>(k));
    w.f64s(r.source);
    for (int t = 0; t < r.steps(); ++t) {
      w.f64s(r.xs[t]);
      w.f64s(r.zs[t]);
      w.f64s(r.aux_noise[t]);
    }
    w.f64s(r.final_residual);
  }
  w.finish();
}

std::vector<InversionResult> load_inversions(const std::filesystem::path& path) {
  BinaryReader rd(path);
  rd.expect_magic(kInversionMagic, "inversion artifact");
  const std::uint32_t version = rd.u32();
  if (version != kInversionVersion) {
    throw CompatibilityError("unsupported inversion artifact version " + std::to_string(version));
  }
  const std::uint32_t count = rd.u32();
  std::vector<InversionResult> out(count);
  for (auto& r : out) {
    r.schedule_fingerprint = rd.u64();
    const std::uint32_t T = rd.u32();
    const std::uint32_t d = rd.u32();
    const std::uint32_t kind = rd.u32();
    const std::uint32_t n = rd.u32();
    if (kind > 1 || T == 0 || d == 0) throw IoError("corrupt inversion record in " + path.string());
    std::vector<int> idx(n);
    for (auto& k : idx) k = static_cast<int>(rd.u32());
    r.condition = kind == 0 ? Condition::unconditional() : Condition::subset(std::move(idx));
    r.source = rd.f64s(d);
    r.xs.resize(T);
    r.zs.resize(T);
    r.aux_noise.resize(T);
    for (std::uint32_t t = 0; t < T; ++t) {
      r.xs[t] = rd.f64s(d);
      r.zs[t] = rd.f64s(d);
      r.aux_noise[t] = rd.f64s(d);
    }
    r.final_residual = rd.f64s(d);
  }
  rd.expect_end();
  return out;
}

}  // namespace ledits

namespace ledits {

std::vector<NoiseMapStat> noise_map_statistics(const std::vector<InversionResult>& runs) {
  if (runs.empty()) throw ParameterError("noise_map_statistics: no inversions");
  const int T = runs.front().steps();
  const std::size_t d = runs.front().source.size();
  for (const auto& r : runs) {
    if (r.steps() != T || r.source.size() != d) {
      throw ParameterError("noise_map_statistics: inversions differ in shape");
    }
  }
  const auto n = static_cast<double>(runs.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<NoiseMapStat> out;
  for (int t = 2; t <= T; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      NoiseMapStat s;
      s.t = t;
      s.coord = static_cast<int>(j);
      s.runs = static_cast<int>(runs.size());
      double mean = 0.0, mean_next = 0.0;
      for (const auto& r : runs) {
        mean += r.z(t)[j];
        if (t < T) mean_next += r.z(t + 1)[j];
      }
      mean /= n;
      mean_next /= n;
      double sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (const auto& r : runs) {
        const double a = r.z(t)[j] - mean;
        sxx += a * a;
        if (t < T) {
          const double b = r.z(t + 1)[j] - mean_next;
          syy += b * b;
          sxy += a * b;
        }
      }
      s.variance = runs.size() > 1 ? sxx / (n - 1.0) : nan;
      s.lag1_corr = (t < T && runs.size() > 1 && sxx > 0.0 && syy > 0.0)
                        ? sxy / std::sqrt(sxx * syy)
                        : nan;
      s.z_score = (runs.size() > 3 && std::isfinite(s.lag1_corr))
                      ? std::atanh(s.lag1_corr) * std::sqrt(n - 3.0)
                      : nan;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace ledits
