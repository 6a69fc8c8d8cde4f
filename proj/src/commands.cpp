#include "ledits/commands.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "ledits/config.hpp"
#include "ledits/dataset.hpp"
#include "ledits/image.hpp"
#include "ledits/inversion.hpp"
#include "ledits/pipeline.hpp"
#include "ledits/rng.hpp"
#include "ledits/toy_model.hpp"

namespace ledits {

namespace fs = std::filesystem;

namespace {

// Stream ids for seeds derived from the run seed.
constexpr std::uint64_t kDatasetStream = 11;
constexpr std::uint64_t kSourceStream = 21;
constexpr std::uint64_t kInversionStreamBase = 1000;
// Fixed so posterior columns mean the same thing across runs.
constexpr std::uint64_t kReferenceSeed = 0x5eed;
constexpr std::size_t kReferenceSize = 2000;
constexpr double kReferenceBandwidth = 0.5;

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Context {
  RunConfig rc;
  NoiseSchedule schedule;
  fs::path out;
};

Context load_context(const CliOptions& opts) {
  RunConfig rc = load_run_config(opts.config);
  if (opts.seed) {
    rc.seed = *opts.seed;
    rc.edit.seed = *opts.seed;
  }
  fs::path out = opts.out ? *opts.out : rc.output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  NoiseSchedule schedule = build_schedule(rc.schedule);
  return {std::move(rc), std::move(schedule), std::move(out)};
}

std::unique_ptr<NoisePredictor> make_predictor(const Context& ctx) {
  const RunConfig& rc = ctx.rc;
  if (rc.checkpoint) {
    if (!fs::exists(*rc.checkpoint)) {
      throw ConfigError("checkpoint " + rc.checkpoint->string() + " does not exist");
    }
    auto model = std::make_shared<const MlpDenoiser>(load_checkpoint(*rc.checkpoint));
    if (model->schedule_fingerprint() != ctx.schedule.beta_fingerprint()) {
      throw CompatibilityError("checkpoint " + rc.checkpoint->string() +
                               " was trained under a different noise schedule");
    }
    const std::size_t expect = rc.domain == Domain::image ? kImageSide * kImageSide : 0;
    if (expect && static_cast<std::size_t>(model->shape().data_dim) != expect) {
      throw CompatibilityError("checkpoint dimension does not match the image domain");
    }
    return std::make_unique<MlpPredictor>(std::move(model));
  }
  if (rc.domain == Domain::image) throw ConfigError("image domain needs a \"checkpoint\"");
  if (!rc.mixture) throw ConfigError("points domain needs a \"mixture\" or a \"checkpoint\"");
  return std::make_unique<GmmPredictor>(*rc.mixture, ctx.schedule);
}

// Reference density for posterior columns, in model space. Images use a kernel
// density over procedural shapes; a per-pixel Gaussian cannot tell shapes apart
// once their positions vary.
std::optional<ReferenceDensity> reference_density(const RunConfig& rc) {
  if (rc.domain == Domain::image) {
    return kernel_reference(shape_dataset(kReferenceSize, kReferenceSeed), kReferenceBandwidth);
  }
  if (rc.mixture) return mixture_reference(*rc.mixture);
  return std::nullopt;
}

std::vector<Vec> load_sources(const Context& ctx, const CliOptions& opts, int count) {
  const RunConfig& rc = ctx.rc;
  if (opts.input) {
    if (rc.domain == Domain::image) {
      std::vector<Vec> tiles = split_tiles(read_pgm(*opts.input), kImageSide);
      for (auto& t : tiles) t = to_model_space(t);
      return tiles;
    }
    return read_points_csv(*opts.input);
  }
  Rng rng(mix_seed(rc.seed, kSourceStream));
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    if (rc.domain == Domain::image) {
      const int cls = rc.source.component.value_or(i % kImageClasses);
      out.push_back(render_shape(cls, rng));
    } else {
      if (!rc.mixture) throw ConfigError("source sampling needs a \"mixture\"; pass --input instead");
      if (rc.source.component) {
        rc.mixture->check_condition(Condition::subset({*rc.source.component}));
        out.push_back(rc.mixture->sample_component(*rc.source.component, rng));
      } else {
        out.push_back(rc.mixture->sample(rng));
      }
    }
  }
  return out;
}

std::uint64_t inversion_seed(std::uint64_t seed, std::size_t index) {
  return mix_seed(seed, kInversionStreamBase + index);
}

std::vector<InversionResult> invert_all(const Context& ctx, const NoisePredictor& predictor,
                                        const std::vector<Vec>& sources) {
  ctx.rc.edit.validate();
  std::vector<InversionResult> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.push_back(invert(sources[i], predictor, ctx.rc.edit.inversion_condition, ctx.schedule,
                         inversion_seed(ctx.rc.seed, i)));
  }
  return out;
}

// Writes edited samples; `stem` gets .csv or .pgm appended.
void write_samples(const Context& ctx, const fs::path& stem, const std::vector<Vec>& samples) {
  if (ctx.rc.domain == Domain::image) {
    std::vector<Vec> tiles;
    for (const auto& s : samples) tiles.push_back(to_pixel_space(s));
    write_pgm(fs::path(stem.string() + ".pgm"), join_tiles(tiles, kImageSide));
  } else {
    write_points_csv(fs::path(stem.string() + ".csv"), samples);
  }
}

struct SampleMetrics {
  double mse = 0.0;
  Vec posterior;
};

SampleMetrics measure(const Context& ctx, const std::optional<ReferenceDensity>& ref,
                      const Vec& edited, const Vec& source) {
  SampleMetrics m;
  // Images are compared in [0, 1] pixel space, points in their own coordinates.
  m.mse = ctx.rc.domain == Domain::image
              ? mean_squared_error(to_pixel_space(edited), to_pixel_space(source))
              : mean_squared_error(edited, source);
  if (ref) m.posterior = ref->class_posterior(edited, 1, ctx.schedule);
  return m;
}

std::string posterior_header(const std::optional<ReferenceDensity>& ref) {
  std::string h;
  if (ref) {
    for (int k = 0; k < ref->classes; ++k) h += fmt::format(",posterior_{}", k);
  }
  return h;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void close_text(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<Vec> read_points_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Vec> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Vec p;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      // strtod rather than stod: stod rejects subnormals, which the writer can emit.
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (cell.empty() || end == cell.c_str() || *end != '\0') {
        numeric = false;
        break;
      }
      p.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw IoError(path.string() + ": non-numeric row \"" + line + "\"");
    }
    first = false;
    if (!points.empty() && p.size() != points.front().size()) {
      throw IoError(path.string() + ": rows differ in length");
    }
    points.push_back(std::move(p));
  }
  if (points.empty()) throw IoError(path.string() + ": no points");
  return points;
}

void write_points_csv(const fs::path& path, const std::vector<Vec>& points) {
  std::ofstream out = open_text(path);
  if (!points.empty()) {
    for (std::size_t j = 0; j < points.front().size(); ++j) out << (j ? "," : "") << "x" << j;
    out << "\n";
  }
  for (const auto& p : points) {
    for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << num(p[j]);
    out << "\n";
  }
  close_text(out, path);
}

void cmd_train(const CliOptions& opts) {
  Context ctx = load_context(opts);
  const RunConfig& rc = ctx.rc;
  const std::uint64_t data_seed = rc.train.dataset_seed.value_or(mix_seed(rc.seed, kDatasetStream));
  LabeledDataset data;
  if (rc.domain == Domain::image) {
    data = shape_dataset(rc.train.dataset_size, data_seed);
  } else {
    if (!rc.mixture) throw ConfigError("train: points domain needs a \"mixture\"");
    data = sample_mixture_dataset(*rc.mixture, rc.train.dataset_size, data_seed);
  }
  TrainConfig tc = rc.train.config;
  tc.seed = rc.train.seed.value_or(rc.seed);

  const fs::path log_path = ctx.out / "train_log.csv";
  std::ofstream log = open_text(log_path);
  log << "epoch,loss\n";
  const TrainResult result = train(data, ctx.schedule, tc, [&](int epoch, double loss) {
    log << epoch << "," << num(loss) << "\n";
    std::cerr << fmt::format("epoch {:4d}  loss {:.6f}\n", epoch, loss);
  });
  close_text(log, log_path);
  save_checkpoint(ctx.out / "model.ckpt", result.model);
}

void cmd_invert(const CliOptions& opts) {
  Context ctx = load_context(opts);
  const auto predictor = make_predictor(ctx);
  const auto sources = load_sources(ctx, opts, ctx.rc.source.count);
  save_inversions(ctx.out / "inversion.bin", invert_all(ctx, *predictor, sources));
}

void cmd_edit(const CliOptions& opts) {
  Context ctx = load_context(opts);
  const auto predictor = make_predictor(ctx);
  std::vector<InversionResult> invs;
  if (opts.inversion) {
    invs = load_inversions(*opts.inversion);
    for (const auto& inv : invs) check_compatible(inv, ctx.schedule);
  } else {
    invs = invert_all(ctx, *predictor, load_sources(ctx, opts, ctx.rc.source.count));
  }
  const auto ref = reference_density(ctx.rc);
  std::vector<Vec> edited;
  const fs::path metrics_path = ctx.out / "metrics.csv";
  std::ofstream metrics = open_text(metrics_path);
  metrics << "index,mse_to_source" << posterior_header(ref) << "\n";
  for (std::size_t i = 0; i < invs.size(); ++i) {
    edited.push_back(edit_from_inversion(invs[i], *predictor, ctx.schedule, ctx.rc.edit).edited);
    const SampleMetrics m = measure(ctx, ref, edited.back(), invs[i].source);
    metrics << i << "," << num(m.mse);
    for (double p : m.posterior) metrics << "," << num(p);
    metrics << "\n";
  }
  close_text(metrics, metrics_path);
  write_samples(ctx, ctx.out / "edited", edited);
}

void cmd_sweep(const CliOptions& opts) {
  Context ctx = load_context(opts);
  const RunConfig& rc = ctx.rc;
  if (rc.sweep.empty()) throw ConfigError("sweep: at least one of skips/target_scales/concept_scales must be nonempty");
  if (opts.threads < 1) throw ConfigError("--threads must be >= 1");
  const auto predictor = make_predictor(ctx);
  const auto invs = invert_all(ctx, *predictor, load_sources(ctx, opts, rc.source.count));
  const auto ref = reference_density(rc);

  const std::vector<int> skips = rc.sweep.skips.empty() ? std::vector<int>{rc.edit.skip} : rc.sweep.skips;
  const std::vector<double> targets = rc.sweep.target_scales.empty()
                                          ? std::vector<double>{rc.edit.guidance.target_scale}
                                          : rc.sweep.target_scales;
  // NaN marks "leave concept scales as configured".
  const std::vector<double> concepts = rc.sweep.concept_scales.empty()
                                           ? std::vector<double>{std::nan("")}
                                           : rc.sweep.concept_scales;
  struct Cell {
    int skip;
    double target_scale;
    double concept_scale;
    double mse = 0.0;
    Vec posterior;
  };
  std::vector<Cell> cells;
  for (int s : skips) {
    for (double ts : targets) {
      for (double cs : concepts) cells.push_back({s, ts, cs, 0.0, {}});
    }
  }

  // Cells share the read-only inversions; the guided loop itself draws no randomness.
  auto run_cell = [&](std::size_t idx) {
    Cell& cell = cells[idx];
    EditParams p = rc.edit;
    p.skip = cell.skip;
    p.guidance.target_scale = cell.target_scale;
    if (!std::isnan(cell.concept_scale)) {
      for (auto& e : p.guidance.concepts) e.scale = cell.concept_scale;
    }
    std::vector<Vec> edited;
    for (const auto& inv : invs) {
      edited.push_back(edit_from_inversion(inv, *predictor, ctx.schedule, p).edited);
      const SampleMetrics m = measure(ctx, ref, edited.back(), inv.source);
      cell.mse += m.mse / static_cast<double>(invs.size());
      if (cell.posterior.empty()) cell.posterior.assign(m.posterior.size(), 0.0);
      for (std::size_t k = 0; k < m.posterior.size(); ++k) {
        cell.posterior[k] += m.posterior[k] / static_cast<double>(invs.size());
      }
    }
    write_samples(ctx, ctx.out / fmt::format("cell_{:04d}", idx), edited);
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opts.threads), cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cells.size(); i += workers) run_cell(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const fs::path path = ctx.out / "sweep.csv";
  std::ofstream csv = open_text(path);
  csv << "cell,skip,target_scale,concept_scale,mse_to_source" << posterior_header(ref) << "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    csv << i << "," << c.skip << "," << num(c.target_scale) << ","
        << (std::isnan(c.concept_scale) ? std::string() : num(c.concept_scale)) << "," << num(c.mse);
    for (double p : c.posterior) csv << "," << num(p);
    csv << "\n";
  }
  close_text(csv, path);
}

void cmd_stats(const CliOptions& opts) {
  Context ctx = load_context(opts);
  const int runs = opts.runs.value_or(ctx.rc.stats_runs);
  if (runs < 1) throw ConfigError("stats: runs must be >= 1");
  if (runs < 4) {
    std::cerr << "warning: " << runs
              << " run(s) is too few for a significance test; z_score is undefined (nan)\n";
  }
  const auto predictor = make_predictor(ctx);
  const auto invs = invert_all(ctx, *predictor, load_sources(ctx, CliOptions{}, runs));
  const auto stats = noise_map_statistics(invs);
  const fs::path path = ctx.out / "noise_stats.csv";
  std::ofstream csv = open_text(path);
  csv << "t,coord,runs,variance,lag1_corr,z_score\n";
  for (const auto& s : stats) {
    csv << s.t << "," << s.coord << "," << s.runs << "," << num(s.variance) << ","
        << num(s.lag1_corr) << "," << num(s.z_score) << "\n";
  }
  close_text(csv, path);
}

int run_command(const std::string& name, const CliOptions& opts, std::ostream& err) {
  try {
    if (name == "train") {
      cmd_train(opts);
    } else if (name == "invert") {
      cmd_invert(opts);
    } else if (name == "edit") {
      cmd_edit(opts);
    } else if (name == "sweep") {
      cmd_sweep(opts);
    } else if (name == "stats") {
      cmd_stats(opts);
    } else {
      err << "error: unknown command " << name << "\n";
      return static_cast<int>(ErrorClass::config);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::io);
  }
  return 0;
}

}  // namespace ledits
