#include <CLI11.hpp>

#include <iostream>

#include "ledits/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Edit-friendly DDPM inversion with semantic guidance on toy domains"};
  app.require_subcommand(1);

  ledits::CliOptions opts;
  std::string input, out, inversion;
  std::uint64_t seed = 0;
  int runs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Run-config JSON file")->required();
    sub->add_option("--out", out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "Run seed (overrides config)");
    sub->add_option("--threads", opts.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "Train the MLP denoiser; writes model.ckpt and train_log.csv");
  add_common(train);
  auto* invert = app.add_subcommand("invert", "Invert sources; writes inversion.bin");
  add_common(invert);
  invert->add_option("--input", input, "Points CSV or PGM strip of 16x16 tiles");
  auto* edit = app.add_subcommand("edit", "Guided edit; writes edited.{csv,pgm} and metrics.csv");
  add_common(edit);
  edit->add_option("--input", input, "Points CSV or PGM strip of 16x16 tiles");
  edit->add_option("--inversion", inversion, "Inversion artifact from `invert` (else inverts inline)");
  auto* sweep = app.add_subcommand("sweep", "Grid over skip / target scale / concept scale; writes sweep.csv");
  add_common(sweep);
  sweep->add_option("--input", input, "Points CSV or PGM strip of 16x16 tiles");
  auto* stats = app.add_subcommand("stats", "Noise-map statistics over repeated inversions");
  add_common(stats);
  stats->add_option("--runs", runs, "Number of inversions (overrides stats.runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; any other usage error is a config error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto* sub = app.get_subcommands().front();
  if (!input.empty()) opts.input = input;
  if (!out.empty()) opts.out = out;
  if (!inversion.empty()) opts.inversion = inversion;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub == stats && stats->count("--runs")) opts.runs = runs;
  return ledits::run_command(sub->get_name(), opts, std::cerr);
}
