#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ledits/pipeline.hpp"
#include "ledits/predictor.hpp"
#include "ledits/schedule.hpp"
#include "ledits/toy_model.hpp"

namespace ledits {

inline constexpr int kConfigVersion = 1;
// Default hidden width for image-domain training; points use TrainConfig's default.
inline constexpr int kImageHidden = 512;

enum class Domain { points, image };

// Where source points come from when no --input is given.
struct SourceSpec {
  std::optional<int> component;  // absent: draw from the whole distribution
  int count = 1;
};

struct SweepAxes {
  std::vector<int> skips;
  std::vector<double> target_scales;
  std::vector<double> concept_scales;

  bool empty() const { return skips.empty() && target_scales.empty() && concept_scales.empty(); }
};

struct TrainSection {
  TrainConfig config;
  std::size_t dataset_size = 10000;
  std::optional<std::uint64_t> dataset_seed;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
};

struct RunConfig {
  Domain domain = Domain::points;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  ScheduleParams schedule = ScheduleParams::defaults(100, 1.0);
  std::optional<GaussianMixture> mixture;
  std::optional<std::filesystem::path> checkpoint;
  TrainSection train;
  SourceSpec source;
  EditParams edit;  // schedule and seed mirror the fields above
  SweepAxes sweep;
  int stats_runs = 200;
};

// JSON <-> domain types. Parsers reject unknown keys and throw ConfigError.
nlohmann::json to_json(const ScheduleParams& p);
ScheduleParams schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GaussianMixture& gmm);
GaussianMixture mixture_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Condition& c);
Condition condition_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GuidanceConfig& g);
GuidanceConfig guidance_from_json(const nlohmann::json& j);

// Relative paths inside the config resolve against base_dir.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace ledits
