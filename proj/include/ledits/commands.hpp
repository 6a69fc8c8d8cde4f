#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ledits/vec.hpp"

namespace ledits {

struct CliOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> inversion;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  int threads = 1;
};

// Each command reads the run config, writes into the output directory and
// throws ledits::Error on failure. File names:
//   train   model.ckpt, train_log.csv
//   invert  inversion.bin
//   edit    edited.csv (points) or edited.pgm (image strip), metrics.csv
//   sweep   cell_NNNN.csv / cell_NNNN.pgm per grid cell, sweep.csv
//   stats   noise_stats.csv
void cmd_train(const CliOptions& opts);
void cmd_invert(const CliOptions& opts);
void cmd_edit(const CliOptions& opts);
void cmd_sweep(const CliOptions& opts);
void cmd_stats(const CliOptions& opts);

// Dispatches by name and maps failures to exit codes
// (0 ok, 2 config, 3 numeric constraint, 4 I/O). Messages go to `err`.
int run_command(const std::string& name, const CliOptions& opts, std::ostream& err);

// Point files: one comma-separated point per line; an optional non-numeric
// header line and '#' comments are skipped.
std::vector<Vec> read_points_csv(const std::filesystem::path& path);
void write_points_csv(const std::filesystem::path& path, const std::vector<Vec>& points);

}  // namespace ledits
