#include "tpbb/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tpbb/errors.hpp"
#include "tpbb/riccati.hpp"

namespace tpbb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PersistFailure("cannot write '" + path.string() + "'");
  return out;
}

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw PersistFailure("write failed for '" + path.string() + "'");
}

}  // namespace

void write_snapshots_csv(const std::filesystem::path& path, const RunRecord& rec) {
  auto out = open_csv(path);
  out << "t,bin_center,density_F,density_L\n";
  for (const auto& s : rec.snapshots) {
    for (std::size_t b = 0; b < s.followers.bins(); ++b) {
      out << num(s.t) << ',' << num(s.followers.center(b)) << ',' << num(s.followers.heights[b]) << ','
          << num(s.leaders.heights[b]) << '\n';
    }
  }
  finish(out, path);
}

void write_control_surface_csv(const std::filesystem::path& path, const RunRecord& rec) {
  auto out = open_csv(path);
  out << "t,y,phi\n";
  for (const auto& s : rec.snapshots) {
    for (std::size_t m = 0; m < s.surface_y.size(); ++m) {
      out << num(s.t) << ',' << num(s.surface_y[m]) << ',' << num(s.surface_phi[m]) << '\n';
    }
  }
  finish(out, path);
}

void write_scalars_csv(const std::filesystem::path& path, const RunRecord& rec) {
  auto out = open_csv(path);
  out << "t,mean_F,mean_L,cost_accum\n";
  for (const auto& r : rec.scalars) {
    out << num(r.t) << ',' << num(r.mean_f) << ',' << num(r.mean_l) << ',' << num(r.cost) << '\n';
  }
  finish(out, path);
}

void write_control_trace_csv(const std::filesystem::path& path, const RunRecord& rec) {
  auto out = open_csv(path);
  out << "t,n_ff,n_fl,m_ll,phi_mean,phi_sq_mean\n";
  for (const auto& r : rec.controls) {
    out << num(r.t) << ',' << r.n_ff << ',' << r.n_fl << ',' << r.m_ll << ',' << num(r.phi_mean) << ','
        << num(r.phi_sq_mean) << '\n';
  }
  finish(out, path);
}

std::filesystem::path cache_path(const RunConfig& cfg) {
  char name[40];
  std::snprintf(name, sizeof(name), "vgrid-%016llx.bin", static_cast<unsigned long long>(dp_digest(cfg)));
  return std::filesystem::path(cfg.dp.cache_dir) / name;
}

DpResult synthesize_value_grid(const RunConfig& cfg, std::ostream* log) {
  const DpSetup setup = cfg.dp_setup();
  setup.validate();
  const ControlGrid cg = ControlGrid::for_setup(setup);
  SolveOptions opts;
  opts.tol = cfg.dp.tol;
  opts.max_iter = cfg.dp.max_iter;
  opts.workers = cfg.workers;
  if (log) {
    opts.progress = [log](int k, double r) { *log << "dp: iteration " << k << " residual " << r << std::endl; };
    *log << "dp: " << method_name(cfg.dp.method == DpMethod::kRiccati ? DpMethod::kPolicyIteration : cfg.dp.method)
         << " on " << setup.geometry.nodes << "^4 nodes, " << setup.control_nodes << " controls\n";
  }
  DpResult r = cfg.dp.method == DpMethod::kValueIteration ? value_iteration(ValueGrid::zeros(setup), cg, opts)
                                                          : policy_iteration(ValueGrid::zeros(setup), cg, opts);
  if (log) {
    const auto& d = r.grid.diagnostics;
    *log << "dp: residual " << d.residual << " after " << d.iterations << " iterations"
         << (d.converged ? "" : " (not converged)") << "\n";
  }
  return r;
}

ControlBundle build_control(const RunConfig& cfg, std::ostream* log) {
  ControlBundle b;
  if (cfg.control == ControlSelector::kNone) return b;
  const auto t0 = Clock::now();

  if (cfg.dp.method == DpMethod::kRiccati) {
    const RiccatiGain g = riccati_feedback(cfg.cost, cfg.kernels);
    b.source = ControlSource::riccati(g);
    b.origin = "riccati";
    b.dp = {0.0, g.iterations, true};
    b.seconds = seconds_since(t0);
    return b;
  }

  const DpSetup expected = cfg.dp_setup();
  std::shared_ptr<ValueGrid> grid;
  std::vector<double> policy;
  if (!cfg.dp.grid_file.empty()) {
    grid = std::make_shared<ValueGrid>(load_value_grid(cfg.dp.grid_file));
    check_compatible(*grid, expected);
    b.origin = "file";
    b.grid_path = cfg.dp.grid_file;
  } else {
    const auto path = cache_path(cfg);
    if (std::filesystem::exists(path)) {
      try {
        auto loaded = load_value_grid(path);
        check_compatible(loaded, expected);
        grid = std::make_shared<ValueGrid>(std::move(loaded));
        b.origin = "cache";
        if (log) *log << "dp: loaded cached grid " << path.string() << "\n";
      } catch (const Error& e) {
        if (log) *log << "dp: ignoring unusable cache entry (" << e.what() << ")\n";
      }
    }
    if (!grid) {
      DpResult r = synthesize_value_grid(cfg, log);
      grid = std::make_shared<ValueGrid>(std::move(r.grid));
      policy = std::move(r.policy);
      b.origin = "synthesized";
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
      try {
        save_value_grid(path, *grid);
      } catch (const PersistFailure& e) {
        if (log) *log << "dp: cache not written (" << e.what() << ")\n";
      }
    }
    b.grid_path = path;
  }
  b.dp = grid->diagnostics;
  b.source = ControlSource::grid(std::move(grid), cfg.dp.evaluation, std::move(policy), cfg.workers);
  b.seconds = seconds_since(t0);
  return b;
}

ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  ExperimentResult res;
  res.out_dir = cfg.output.directory;
  std::filesystem::create_directories(res.out_dir);

  nlohmann::ordered_json meta;
  meta["name"] = cfg.name;
  meta["version"] = std::string(kVersion);
  meta["seed"] = cfg.seed;
  meta["rng"] = std::string(kRngName);
  meta["workers"] = cfg.workers;
  meta["config"] = serialize_config(cfg);
  meta["partial"] = true;

  const auto write_meta = [&] {
    const auto path = res.out_dir / "metadata.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PersistFailure("cannot write '" + path.string() + "'");
    out << meta.dump(2) << '\n';
  };

  try {
    res.control = build_control(cfg, log);
    meta["dp"] = {{"method", cfg.control == ControlSelector::kNone ? "none" : std::string(method_name(cfg.dp.method))},
                  {"origin", res.control.origin},
                  {"grid_file", res.control.grid_path.string()},
                  {"residual", res.control.dp.residual},
                  {"iterations", res.control.dp.iterations},
                  {"converged", res.control.dp.converged}};

    const auto t0 = Clock::now();
    Rng rng(cfg.seed);
    res.record = run_tpbb(cfg.simulation_setup(), res.control.source, rng);
    res.sim_seconds = seconds_since(t0);
    meta["timings"] = {{"control_seconds", res.control.seconds}, {"simulation_seconds", res.sim_seconds}};

    write_snapshots_csv(res.out_dir / "snapshots.csv", res.record);
    write_control_surface_csv(res.out_dir / "control_surface.csv", res.record);
    write_scalars_csv(res.out_dir / "scalars.csv", res.record);
    write_control_trace_csv(res.out_dir / "control_trace.csv", res.record);
    meta["outputs"] = {"snapshots.csv", "control_surface.csv", "scalars.csv", "control_trace.csv"};
    meta["partial"] = false;
  } catch (const std::exception& e) {
    meta["error"] = e.what();
    try {
      write_meta();
    } catch (...) {
    }
    throw;
  }
  write_meta();
  if (log) {
    const auto& last = res.record.scalars.back();
    *log << "run: t=" << last.t << " mean_F=" << last.mean_f << " mean_L=" << last.mean_l
         << " cost=" << last.cost << " (" << res.sim_seconds << " s)\n";
  }
  return res;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const PersistFailure*>(&e)) return 3;
  if (dynamic_cast<const NoStabilizingSolution*>(&e)) return 4;
  if (dynamic_cast<const InfeasibleCounts*>(&e)) return 5;
  if (dynamic_cast<const Error*>(&e)) return 6;
  return 1;
}

}  // namespace tpbb
