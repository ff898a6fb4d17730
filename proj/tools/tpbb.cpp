// Command-line front end: run presets or config files, synthesize value
// grids, and validate configurations.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tpbb/config.hpp"
#include "tpbb/errors.hpp"
#include "tpbb/experiment.hpp"

namespace {

struct Source {
  std::string preset;
  std::string config;
  bool paper_scale = false;
};

tpbb::RunConfig resolve(const Source& src) {
  if (!src.preset.empty()) return tpbb::preset(src.preset, src.paper_scale);
  tpbb::RunConfig cfg = tpbb::load_config(src.config);
  if (src.paper_scale) throw tpbb::ValidationError("--paper-scale only applies to --preset");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower feedback control: binary DP synthesis and Boltzmann particle runs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tpbb::kVersion));

  Source run_src;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  bool no_control = false;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Synthesize or load the feedback and run the particle scheme");
  auto* run_preset = run->add_option("--preset", run_src.preset, "Preset name")
                         ->check(CLI::IsMember(tpbb::preset_names()));
  auto* run_config = run->add_option("--config", run_src.config, "Config file")->check(CLI::ExistingFile);
  run_preset->excludes(run_config);
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--workers", workers, "OpenMP threads (1 is deterministic)")->check(CLI::PositiveNumber);
  run->add_flag("--no-control", no_control, "Run without leader control");
  run->add_flag("--paper-scale", run_src.paper_scale, "Use the large sample counts of the reference runs");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("-q,--quiet", quiet, "Suppress progress output");

  std::string synth_config;
  std::string synth_out;
  std::optional<int> synth_workers;
  auto* synth = app.add_subcommand("synthesize-dp", "Solve the binary Bellman problem and save the value grid");
  synth->add_option("--config", synth_config, "Config file or preset name")->required();
  synth->add_option("--out", synth_out, "Output grid file")->required();
  synth->add_option("--workers", synth_workers, "OpenMP threads")->check(CLI::PositiveNumber);

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", validate_config, "Config file")->required()->check(CLI::ExistingFile);

  Source show_src;
  auto* show = app.add_subcommand("show-config", "Print a preset or config in config-file form");
  auto* show_preset = show->add_option("--preset", show_src.preset, "Preset name")
                          ->check(CLI::IsMember(tpbb::preset_names()));
  auto* show_config = show->add_option("--config", show_src.config, "Config file")->check(CLI::ExistingFile);
  show_preset->excludes(show_config);
  show->add_flag("--paper-scale", show_src.paper_scale, "Apply paper-scale sample counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (run_src.preset.empty() && run_src.config.empty()) {
        throw tpbb::ValidationError("run: one of --preset or --config is required");
      }
      tpbb::RunConfig cfg = resolve(run_src);
      if (seed) cfg.seed = *seed;
      if (workers) cfg.workers = *workers;
      if (out_dir) cfg.output.directory = *out_dir;
      if (no_control) cfg.control = tpbb::ControlSelector::kNone;
      const auto res = tpbb::run_experiment(cfg, quiet ? nullptr : &std::cerr);
      if (!quiet) std::cerr << "outputs written to " << res.out_dir.string() << "\n";
    } else if (*synth) {
      const bool is_preset = std::find(tpbb::preset_names().begin(), tpbb::preset_names().end(), synth_config) !=
                             tpbb::preset_names().end();
      tpbb::RunConfig cfg = is_preset ? tpbb::preset(synth_config) : tpbb::load_config(synth_config);
      if (synth_workers) cfg.workers = *synth_workers;
      cfg.validate();
      if (cfg.dp.method == tpbb::DpMethod::kRiccati) {
        std::cerr << "note: config selects riccati; solving the grid problem with policy iteration\n";
      }
      const auto r = tpbb::synthesize_value_grid(cfg, &std::cerr);
      tpbb::save_value_grid(synth_out, r.grid);
      std::cerr << "grid written to " << synth_out << "\n";
      if (!r.grid.diagnostics.converged) return 7;
    } else if (*validate) {
      tpbb::load_config(validate_config).validate();
      std::cout << "ok\n";
    } else if (*show) {
      if (show_src.preset.empty() && show_src.config.empty()) {
        throw tpbb::ValidationError("show-config: one of --preset or --config is required");
      }
      std::cout << tpbb::serialize_config(resolve(show_src));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tpbb::exit_code_for(e);
  }
  return 0;
}
