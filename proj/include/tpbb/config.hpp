#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tpbb/binary_dynamics.hpp"
#include "tpbb/control_source.hpp"
#include "tpbb/dsmc.hpp"
#include "tpbb/kernels.hpp"
#include "tpbb/value_grid.hpp"

namespace tpbb {

enum class DpMethod { kValueIteration, kPolicyIteration, kRiccati };
enum class ControlSelector { kNone, kFeedback };

struct DpConfig {
  int nodes = 41;
  int control_nodes = 41;
  double tol = 1e-6;
  int max_iter = 500;
  DpMethod method = DpMethod::kPolicyIteration;
  GridEvaluation evaluation = GridEvaluation::kTabulated;
  std::string grid_file;  // load instead of synthesizing when set
  std::string cache_dir = ".tpbb_cache";

  bool operator==(const DpConfig&) const = default;
};

struct PopulationConfig {
  double rho_f = 1.0;
  double rho_l = 0.5;
  std::size_t n_followers = 10000;
  std::size_t n_leaders = 5000;
  Interval followers_init{-1.0, 1.0};
  Interval leaders_init{-1.0, 1.0};

  bool operator==(const PopulationConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "tpbb_out";
  int stride = 15;
  double dx = 0.025;
  int surface_points = 41;

  bool operator==(const OutputConfig&) const = default;
};

/// Complete description of one experiment.
struct RunConfig {
  std::string name = "custom";
  KernelTriple kernels;
  CostParams cost;
  ScalingParams scaling;
  PopulationConfig populations;
  DpConfig dp;
  ControlSelector control = ControlSelector::kFeedback;
  OutputConfig output;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<std::string> notes;  // emitted as comments when serialized

  /// Throws ValidationError with a field-level message.
  void validate() const;
  DpSetup dp_setup() const;
  SimulationSetup simulation_setup() const;

  bool operator==(const RunConfig& o) const {
    return name == o.name && kernels == o.kernels && cost == o.cost &&
           scaling.epsilon == o.scaling.epsilon && scaling.dt == o.scaling.dt &&
           scaling.final_time == o.scaling.final_time &&
           scaling.control_samples == o.scaling.control_samples &&
           scaling.estimator == o.scaling.estimator &&
           scaling.symmetric_collisions == o.scaling.symmetric_collisions &&
           populations == o.populations && dp == o.dp && control == o.control &&
           output == o.output && seed == o.seed && workers == o.workers;
  }
};

/// Names accepted by preset().
const std::vector<std::string>& preset_names();

/// Experiment presets: test1, test2, test2-noleaders, test3a, test3b.
/// Desk scale unless `paper_scale`. Throws ValidationError for unknown names.
RunConfig preset(std::string_view name, bool paper_scale = false);

/// Parses the sectioned key = value format produced by serialize_config.
/// A `preset = <name>` key in [run] starts from that preset.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a digest of every field that affects the synthesized value grid.
std::uint64_t dp_digest(const RunConfig& cfg);

std::string_view method_name(DpMethod m);

}  // namespace tpbb
