#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tpbb/errors.hpp"
#include "tpbb/experiment.hpp"

using namespace tpbb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tpbb_exp_" + name);
  fs::remove_all(dir);
  return dir;
}

// Small Test-2-like run with a coarse DP grid.
RunConfig small_config(const fs::path& dir) {
  auto c = preset("test2");
  c.dp.nodes = 7;
  c.dp.control_nodes = 9;
  c.dp.cache_dir = (dir / "cache").string();
  c.output.directory = (dir / "out").string();
  c.populations.n_followers = 600;
  c.populations.n_leaders = 300;
  c.scaling.final_time = 0.2;
  return c;
}

}  // namespace

TEST(Experiment, WritesAllOutputs) {
  const auto dir = scratch("outputs");
  const auto cfg = small_config(dir);
  const auto res = run_experiment(cfg);
  for (const char* f : {"snapshots.csv", "control_surface.csv", "scalars.csv", "control_trace.csv", "metadata.json"}) {
    EXPECT_TRUE(fs::exists(res.out_dir / f)) << f;
  }
  EXPECT_EQ(slurp(res.out_dir / "scalars.csv").substr(0, 27), "t,mean_F,mean_L,cost_accum\n");
  EXPECT_EQ(slurp(res.out_dir / "snapshots.csv").substr(0, 33), "t,bin_center,density_F,density_L\n");
  EXPECT_EQ(slurp(res.out_dir / "control_surface.csv").substr(0, 8), "t,y,phi\n");

  const auto meta = nlohmann::json::parse(slurp(res.out_dir / "metadata.json"));
  EXPECT_EQ(meta["seed"], cfg.seed);
  EXPECT_EQ(meta["rng"], "mt19937_64");
  EXPECT_FALSE(meta["partial"].get<bool>());
  EXPECT_EQ(meta["dp"]["origin"], "synthesized");
  EXPECT_TRUE(meta["dp"]["converged"].get<bool>());
  EXPECT_EQ(parse_config(meta["config"].get<std::string>()), cfg);
  EXPECT_TRUE(fs::exists(cache_path(cfg)));

  // Snapshot rows: ceil(30 / 15) + 1 times, 80 bins each.
  const auto snaps = slurp(res.out_dir / "snapshots.csv");
  EXPECT_EQ(std::count(snaps.begin(), snaps.end(), '\n'), 1 + 3 * 80);
  fs::remove_all(dir);
}

TEST(Experiment, RepeatedRunsAreByteIdenticalAndUseCache) {
  const auto dir = scratch("determinism");
  auto cfg = small_config(dir);
  const auto first = run_experiment(cfg);
  EXPECT_EQ(first.control.origin, "synthesized");
  const auto a = slurp(first.out_dir / "snapshots.csv") + slurp(first.out_dir / "scalars.csv") +
                 slurp(first.out_dir / "control_surface.csv") + slurp(first.out_dir / "control_trace.csv");
  cfg.output.directory = (dir / "out2").string();
  const auto second = run_experiment(cfg);
  EXPECT_EQ(second.control.origin, "cache");
  const auto b = slurp(second.out_dir / "snapshots.csv") + slurp(second.out_dir / "scalars.csv") +
                 slurp(second.out_dir / "control_surface.csv") + slurp(second.out_dir / "control_trace.csv");
  EXPECT_EQ(a, b);
  fs::remove_all(dir);
}

TEST(Experiment, MismatchedGridFileFlagsPartialOutput) {
  const auto dir = scratch("mismatch");
  auto cfg = small_config(dir);
  auto other = cfg;
  other.cost.gamma = 0.5;
  const auto grid_path = dir / "other.bin";
  fs::create_directories(dir);
  save_value_grid(grid_path, synthesize_value_grid(other).grid);
  cfg.dp.grid_file = grid_path.string();
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  const auto meta = nlohmann::json::parse(slurp(fs::path(cfg.output.directory) / "metadata.json"));
  EXPECT_TRUE(meta["partial"].get<bool>());
  EXPECT_NE(meta["error"].get<std::string>().find("gamma"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Experiment, NoControlAndRiccatiSources) {
  const auto dir = scratch("sources");
  auto cfg = preset("test1");
  cfg.populations.n_followers = 400;
  cfg.populations.n_leaders = 200;
  cfg.scaling.final_time = 0.1;
  cfg.output.directory = (dir / "ric").string();
  EXPECT_EQ(run_experiment(cfg).control.origin, "riccati");
  cfg.control = ControlSelector::kNone;
  cfg.output.directory = (dir / "none").string();
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.control.origin, "none");
  for (const auto& c : res.record.controls) EXPECT_EQ(c.phi_mean, 0.0);
  fs::remove_all(dir);
}

TEST(Experiment, ExitCodes) {
  EXPECT_EQ(exit_code_for(ValidationError("x")), 2);
  EXPECT_EQ(exit_code_for(PersistFailure("x")), 3);
  EXPECT_EQ(exit_code_for(NoStabilizingSolution("x")), 4);
  EXPECT_EQ(exit_code_for(InfeasibleCounts("x")), 5);
  EXPECT_EQ(exit_code_for(EmptySampleSet("x")), 6);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}
