#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ledits/config.hpp"
#include "support/fixtures.hpp"

using namespace ledits;
using nlohmann::json;

namespace {

json minimal() { return json{{"version", 1}}; }

RunConfig parse(const json& j) { return parse_run_config(j, "/base"); }

}  // namespace

TEST_CASE("minimal config takes the reference defaults") {
  const RunConfig rc = parse(minimal());
  CHECK(rc.domain == Domain::points);
  CHECK(rc.schedule.T == 100);
  CHECK(rc.schedule.eta == 1.0);
  CHECK(rc.edit.skip == 36);
  CHECK(rc.edit.guidance.target_scale == 15.0);
  CHECK(rc.edit.guidance.concepts.empty());
  CHECK(rc.edit.target.is_unconditional());
  CHECK(rc.sweep.empty());
  CHECK(rc.stats_runs == 200);
  CHECK(!rc.mixture);
}

TEST_CASE("json round-trips") {
  SUBCASE("schedule") {
    const ScheduleParams p{60, 2e-4, 0.03, 0.7};
    const ScheduleParams q = schedule_from_json(to_json(p));
    CHECK(q.T == 60);
    CHECK(q.beta_start == p.beta_start);
    CHECK(q.beta_end == p.beta_end);
    CHECK(q.eta == p.eta);
    const ScheduleParams d = schedule_from_json(json{{"T", 50}});
    CHECK(d.beta_end == ScheduleParams::defaults(50).beta_end);
  }
  SUBCASE("mixture") {
    const auto g = fixtures::three_component();
    const auto h = mixture_from_json(to_json(g));
    REQUIRE(h.size() == g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(h.components()[k].weight == g.components()[k].weight);
      CHECK(h.components()[k].mean == g.components()[k].mean);
      CHECK(h.components()[k].diag_cov == g.components()[k].diag_cov);
    }
  }
  SUBCASE("conditions") {
    CHECK(condition_from_json(json("unconditional")).is_unconditional());
    CHECK(condition_from_json(json(nullptr)).is_unconditional());
    CHECK(condition_from_json(json::array({2, 0, 2})) == Condition::subset({0, 2}));
    CHECK(condition_from_json(to_json(Condition::subset({1, 3}))) == Condition::subset({1, 3}));
    CHECK(condition_from_json(to_json(Condition::unconditional())).is_unconditional());
    CHECK_THROWS_AS(condition_from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(condition_from_json(json::array({-1})), ConfigError);
    CHECK_THROWS_AS(condition_from_json(json("cats")), ConfigError);
  }
  SUBCASE("guidance") {
    GuidanceConfig g;
    g.target_scale = 4.5;
    g.baseline = ConceptBaseline::target;
    ConceptEdit e;
    e.condition = Condition::subset({1});
    e.direction = EditDirection::remove;
    e.scale = 3.0;
    e.warmup = 4;
    e.threshold = 0.8;
    g.concepts = {e, ConceptEdit{}};
    g.concepts[1].condition = Condition::subset({0});
    const GuidanceConfig h = guidance_from_json(to_json(g));
    CHECK(h.target_scale == 4.5);
    CHECK(h.baseline == ConceptBaseline::target);
    REQUIRE(h.concepts.size() == 2);
    CHECK(h.concepts[0].condition == e.condition);
    CHECK(h.concepts[0].direction == EditDirection::remove);
    CHECK(h.concepts[0].scale == 3.0);
    CHECK(h.concepts[0].warmup == 4);
    CHECK(h.concepts[0].threshold == 0.8);
    CHECK(h.concepts[1].scale == 7.0);
    CHECK(h.concepts[1].warmup == 1);
    CHECK(h.concepts[1].threshold == 0.95);
  }
}

TEST_CASE("full config") {
  const json j = json::parse(R"({
    "version": 1,
    "domain": "image",
    "seed": 17,
    "output_dir": "runs/a",
    "checkpoint": "/abs/model.ckpt",
    "schedule": {"T": 50, "eta": 0.5},
    "train": {"epochs": 3, "hidden": 16, "dataset_size": 64, "learning_rate": 0.002},
    "source": {"component": 1, "count": 4},
    "edit": {"skip": 10, "target": [1], "target_scale": 3,
             "concepts": [{"condition": [0], "direction": "remove"}],
             "inversion_condition": [1]},
    "sweep": {"skips": [0, 10], "target_scales": [1, 2], "concept_scales": [0]},
    "stats": {"runs": 12}
  })");
  const RunConfig rc = parse(j);
  CHECK(rc.domain == Domain::image);
  CHECK(rc.seed == 17);
  CHECK(rc.output_dir == std::filesystem::path("/base/runs/a"));
  CHECK(*rc.checkpoint == std::filesystem::path("/abs/model.ckpt"));
  CHECK(rc.schedule.T == 50);
  CHECK(rc.schedule.eta == 0.5);
  CHECK(rc.edit.schedule.T == 50);
  CHECK(rc.edit.seed == 17);
  CHECK(rc.train.config.epochs == 3);
  CHECK(rc.train.config.hidden == 16);
  CHECK(rc.train.config.adam.learning_rate == 0.002);
  CHECK(rc.train.dataset_size == 64);
  CHECK(*rc.source.component == 1);
  CHECK(rc.source.count == 4);
  CHECK(rc.edit.skip == 10);
  CHECK(rc.edit.target == Condition::subset({1}));
  CHECK(rc.edit.inversion_condition == Condition::subset({1}));
  CHECK(rc.edit.guidance.target_scale == 3.0);
  CHECK(rc.edit.guidance.concepts.at(0).direction == EditDirection::remove);
  CHECK(rc.sweep.skips == std::vector<int>{0, 10});
  CHECK(rc.sweep.target_scales == std::vector<double>{1.0, 2.0});
  CHECK(rc.stats_runs == 12);
}

TEST_CASE("invalid configs are rejected") {
  auto with = [](const char* key, json value) {
    json j = minimal();
    j[key] = std::move(value);
    return j;
  };
  CHECK_THROWS_AS(parse(json::object()), ConfigError);
  CHECK_THROWS_AS(parse(json{{"version", 2}}), ConfigError);
  CHECK_THROWS_AS(parse(json::array()), ConfigError);
  CHECK_THROWS_AS(parse(with("colour", "red")), ConfigError);
  CHECK_THROWS_AS(parse(with("domain", "audio")), ConfigError);
  CHECK_THROWS_AS(parse(with("schedule", json{{"T", 0}})), ConfigError);
  CHECK_THROWS_AS(parse(with("schedule", json{{"T", 10}})), ConfigError);  // default betas reach 1
  CHECK_THROWS_AS(parse(with("schedule", json{{"eta", 1.5}})), ConfigError);
  CHECK_THROWS_AS(parse(with("schedule", json{{"steps", 100}})), ConfigError);
  CHECK_THROWS_AS(parse(with("edit", json{{"skip", 100}})), ConfigError);
  CHECK_THROWS_AS(parse(with("edit", json{{"skip", "many"}})), ConfigError);
  CHECK_THROWS_AS(parse(with("edit", json{{"concepts", json::array({json{{"scale", 1}}})}})),
                  ConfigError);
  CHECK_THROWS_AS(parse(with("edit", json::parse(R"({"concepts": [{"condition": [0], "threshold": 1.0}]})"))),
                  ConfigError);
  CHECK_THROWS_AS(parse(with("train", json{{"epochs", 0}})), ConfigError);
  CHECK_THROWS_AS(parse(with("train", json{{"momentum", 0.9}})), ConfigError);
  CHECK_THROWS_AS(parse(with("sweep", json{{"skips", json::array({-1})}})), ConfigError);
  CHECK_THROWS_AS(parse(with("stats", json{{"runs", 0}})), ConfigError);
  CHECK_THROWS_AS(parse(with("mixture", json{{"components", json::array()}})), ConfigError);
  CHECK_THROWS_AS(
      parse(with("mixture", json::parse(R"({"components": [{"weight": 1, "mean": [0, 0], "diag_cov": [1]}]})"))),
      ConfigError);
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "ledits_test_config";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ok.json") << R"({"version": 1, "output_dir": "out", "checkpoint": "m.ckpt"})";
    std::ofstream(dir / "broken.json") << R"({"version": 1,)";
  }
  const RunConfig rc = load_run_config(dir / "ok.json");
  CHECK(rc.output_dir == dir / "out");
  CHECK(*rc.checkpoint == dir / "m.ckpt");
  CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir / "absent.json"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("image training defaults to a hidden layer wider than the image") {
  CHECK(parse(minimal()).train.config.hidden == 128);
  json image = minimal();
  image["domain"] = "image";
  CHECK(parse(image).train.config.hidden == kImageHidden);
  image["train"] = {{"hidden", 64}};
  CHECK(parse(image).train.config.hidden == 64);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : std::filesystem::directory_iterator(LEDITS_CONFIG_DIR)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(load_run_config(entry.path()));
  }
}
