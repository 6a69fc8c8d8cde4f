#include "ledits/config.hpp"

#include <fstream>
#include <set>

namespace ledits {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Domain-level validation errors surface as configuration errors.
template <typename F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

json to_json(const ScheduleParams& p) {
  return {{"T", p.T}, {"beta_start", p.beta_start}, {"beta_end", p.beta_end}, {"eta", p.eta}};
}

ScheduleParams schedule_from_json(const json& j) {
  return as_config_error([&] {
    check_keys(j, {"T", "beta_start", "beta_end", "eta"}, "schedule");
    const int T = get_or(j, "T", 100);
    if (T < 1) throw ConfigError("schedule: T must be >= 1");
    ScheduleParams p = ScheduleParams::defaults(T, get_or(j, "eta", 1.0));
    p.beta_start = get_or(j, "beta_start", p.beta_start);
    p.beta_end = get_or(j, "beta_end", p.beta_end);
    return p;
  });
}

json to_json(const GaussianMixture& gmm) {
  json comps = json::array();
  for (const auto& c : gmm.components()) {
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"diag_cov", c.diag_cov}});
  }
  return {{"components", comps}};
}

GaussianMixture mixture_from_json(const json& j) {
  return as_config_error([&] {
    check_keys(j, {"components"}, "mixture");
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
      check_keys(c, {"weight", "mean", "diag_cov"}, "mixture component");
      comps.push_back({c.at("weight").get<double>(), c.at("mean").get<Vec>(),
                       c.at("diag_cov").get<Vec>()});
    }
    return GaussianMixture(std::move(comps));
  });
}

json to_json(const Condition& c) {
  if (c.is_unconditional()) return "unconditional";
  return c.indices();
}

Condition condition_from_json(const json& j) {
  return as_config_error([&] {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "unconditional")) {
      return Condition::unconditional();
    }
    if (j.is_array()) return Condition::subset(j.get<std::vector<int>>());
    throw ConfigError("condition: expected \"unconditional\" or an array of component indices");
  });
}

json to_json(const GuidanceConfig& g) {
  json concepts = json::array();
  for (const auto& e : g.concepts) {
    concepts.push_back({{"condition", to_json(e.condition)},
                        {"direction", e.direction == EditDirection::add ? "add" : "remove"},
                        {"scale", e.scale},
                        {"warmup", e.warmup},
                        {"threshold", e.threshold}});
  }
  return {{"target_scale", g.target_scale},
          {"concepts", concepts},
          {"concept_baseline",
           g.baseline == ConceptBaseline::unconditional ? "unconditional" : "target"}};
}

GuidanceConfig guidance_from_json(const json& j) {
  return as_config_error([&] {
    check_keys(j, {"target_scale", "concepts", "concept_baseline"}, "guidance");
    GuidanceConfig g;
    g.target_scale = get_or(j, "target_scale", g.target_scale);
    const std::string baseline = get_or<std::string>(j, "concept_baseline", "unconditional");
    if (baseline == "unconditional") {
      g.baseline = ConceptBaseline::unconditional;
    } else if (baseline == "target") {
      g.baseline = ConceptBaseline::target;
    } else {
      throw ConfigError("guidance: concept_baseline must be \"unconditional\" or \"target\"");
    }
    if (j.contains("concepts")) {
      for (const auto& c : j.at("concepts")) {
        check_keys(c, {"condition", "direction", "scale", "warmup", "threshold"}, "concept");
        ConceptEdit e;
        e.condition = condition_from_json(c.at("condition"));
        const std::string dir = get_or<std::string>(c, "direction", "add");
        if (dir != "add" && dir != "remove") {
          throw ConfigError("concept: direction must be \"add\" or \"remove\"");
        }
        e.direction = dir == "add" ? EditDirection::add : EditDirection::remove;
        e.scale = get_or(c, "scale", e.scale);
        e.warmup = get_or(c, "warmup", e.warmup);
        e.threshold = get_or(c, "threshold", e.threshold);
        g.concepts.push_back(std::move(e));
      }
    }
    validate(g);
    return g;
  });
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  try {
    check_keys(j, {"version", "domain", "seed", "output_dir", "schedule", "mixture", "checkpoint",
                   "train", "source", "edit", "sweep", "stats"},
               "config");
    if (!j.contains("version")) throw ConfigError("config: missing required \"version\" field");
    if (j.at("version").get<int>() != kConfigVersion) {
      throw ConfigError("config: unsupported version " + j.at("version").dump());
    }
    RunConfig rc;
    const std::string domain = get_or<std::string>(j, "domain", "points");
    if (domain == "points") {
      rc.domain = Domain::points;
    } else if (domain == "image") {
      rc.domain = Domain::image;
    } else {
      throw ConfigError("config: domain must be \"points\" or \"image\"");
    }
    // The output layer of an image model must reproduce 256-d noise at high t, which a
    // hidden layer narrower than the image cannot.
    if (rc.domain == Domain::image) rc.train.config.hidden = kImageHidden;
    rc.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("output_dir")) rc.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("schedule")) rc.schedule = schedule_from_json(j.at("schedule"));
    (void)build_schedule(rc.schedule);  // validates ranges
    if (j.contains("mixture")) rc.mixture = mixture_from_json(j.at("mixture"));
    if (j.contains("checkpoint")) {
      rc.checkpoint = resolve(base_dir, j.at("checkpoint").get<std::string>());
    }

    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "adam_eps",
                     "final_lr_fraction", "condition_dropout", "hidden", "dataset_size",
                     "dataset_seed", "seed"},
                 "train");
      TrainConfig& tc = rc.train.config;
      tc.epochs = get_or(t, "epochs", tc.epochs);
      tc.batch_size = get_or(t, "batch_size", tc.batch_size);
      tc.adam.learning_rate = get_or(t, "learning_rate", tc.adam.learning_rate);
      tc.adam.beta1 = get_or(t, "beta1", tc.adam.beta1);
      tc.adam.beta2 = get_or(t, "beta2", tc.adam.beta2);
      tc.adam.eps = get_or(t, "adam_eps", tc.adam.eps);
      tc.final_lr_fraction = get_or(t, "final_lr_fraction", tc.final_lr_fraction);
      tc.condition_dropout = get_or(t, "condition_dropout", tc.condition_dropout);
      tc.hidden = get_or(t, "hidden", tc.hidden);
      rc.train.dataset_size = get_or<std::size_t>(t, "dataset_size", rc.train.dataset_size);
      if (t.contains("dataset_seed")) rc.train.dataset_seed = t.at("dataset_seed").get<std::uint64_t>();
      if (t.contains("seed")) rc.train.seed = t.at("seed").get<std::uint64_t>();
      tc.validate();
      if (rc.train.dataset_size == 0) throw ConfigError("train: dataset_size must be >= 1");
    }

    if (j.contains("source")) {
      const json& s = j.at("source");
      check_keys(s, {"component", "count"}, "source");
      if (s.contains("component") && !s.at("component").is_null()) {
        rc.source.component = s.at("component").get<int>();
      }
      rc.source.count = get_or(s, "count", 1);
      if (rc.source.count < 1) throw ConfigError("source: count must be >= 1");
    }

    rc.edit.schedule = rc.schedule;
    rc.edit.seed = rc.seed;
    if (j.contains("edit")) {
      const json& e = j.at("edit");
      check_keys(e, {"skip", "target", "target_scale", "concepts", "concept_baseline",
                     "inversion_condition"},
                 "edit");
      rc.edit.skip = get_or(e, "skip", rc.edit.skip);
      if (e.contains("target")) rc.edit.target = condition_from_json(e.at("target"));
      if (e.contains("inversion_condition")) {
        rc.edit.inversion_condition = condition_from_json(e.at("inversion_condition"));
      }
      json g = json::object();
      for (const char* key : {"target_scale", "concepts", "concept_baseline"}) {
        if (e.contains(key)) g[key] = e.at(key);
      }
      rc.edit.guidance = guidance_from_json(g);
    }
    if (rc.edit.skip < 0 || rc.edit.skip >= rc.schedule.T) {
      throw ConfigError("edit: skip must lie in [0, T)");
    }

    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      check_keys(s, {"skips", "target_scales", "concept_scales"}, "sweep");
      rc.sweep.skips = get_or(s, "skips", std::vector<int>{});
      rc.sweep.target_scales = get_or(s, "target_scales", std::vector<double>{});
      rc.sweep.concept_scales = get_or(s, "concept_scales", std::vector<double>{});
      for (int k : rc.sweep.skips) {
        if (k < 0 || k >= rc.schedule.T) throw ConfigError("sweep: skip values must lie in [0, T)");
      }
    }
    if (j.contains("stats")) {
      const json& s = j.at("stats");
      check_keys(s, {"runs"}, "stats");
      rc.stats_runs = get_or(s, "runs", rc.stats_runs);
      if (rc.stats_runs < 1) throw ConfigError("stats: runs must be >= 1");
    }
    return rc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

}  // namespace ledits
