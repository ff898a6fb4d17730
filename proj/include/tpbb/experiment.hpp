#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tpbb/config.hpp"
#include "tpbb/control_source.hpp"
#include "tpbb/dsmc.hpp"

namespace tpbb {

inline constexpr std::string_view kVersion = "1.0.0";

/// Feedback ready for deployment plus how it was obtained.
struct ControlBundle {
  ControlSource source = ControlSource::none();
  SolverDiagnostics dp;
  std::string origin = "none";  // none | riccati | synthesized | cache | file
  std::filesystem::path grid_path;
  double seconds = 0.0;
};

/// Solves the binary problem of `cfg` on its DP grid (never Riccati).
DpResult synthesize_value_grid(const RunConfig& cfg, std::ostream* log = nullptr);

/// Builds the control selected by `cfg`: Riccati gain, a grid from
/// dp.grid_file, a cached grid keyed by dp_digest, or a fresh synthesis that
/// is then cached. Throws ValidationError for a mismatched grid file.
ControlBundle build_control(const RunConfig& cfg, std::ostream* log = nullptr);

std::filesystem::path cache_path(const RunConfig& cfg);

struct ExperimentResult {
  RunRecord record;
  ControlBundle control;
  double sim_seconds = 0.0;
  std::filesystem::path out_dir;
};

/// Builds the control, runs the particle scheme and writes snapshots.csv,
/// control_surface.csv, scalars.csv, control_trace.csv and metadata.json to
/// cfg.output.directory. If a stage throws, metadata.json is still written
/// with "partial": true before the error propagates.
ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* log = nullptr);

void write_snapshots_csv(const std::filesystem::path& path, const RunRecord& rec);
void write_control_surface_csv(const std::filesystem::path& path, const RunRecord& rec);
void write_scalars_csv(const std::filesystem::path& path, const RunRecord& rec);
void write_control_trace_csv(const std::filesystem::path& path, const RunRecord& rec);

/// Process exit status for an exception escaping run_experiment.
int exit_code_for(const std::exception& e);

}  // namespace tpbb
