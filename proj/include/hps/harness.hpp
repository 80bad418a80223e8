#pragma once

// Experiment drivers behind the command-line front end: convergence tables,
// build/solve scaling fits, thread speedup sweeps and single solves.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hps/solver.hpp"

namespace hps {

enum class PlanSource { serial, automatic, file };

struct RunConfig {
  std::string subcommand = "convergence";
  int level_min = 3;
  int level_max = 7;
  int level_step = 1;
  std::vector<int> n_c{16};
  double kappa = 16.0;
  std::optional<cplx> eta;  // κ when unset
  int threads = 1;
  std::vector<int> thread_counts;  // speedup sweep; 1, 2, 4, ..., threads when empty
  PlanSource plan = PlanSource::serial;
  std::string plan_file;  // calibration table for PlanSource::file
  std::string out;
  std::string checkpoint;
  std::uint64_t seed = 20240917;
  int repeats = 1;  // timed runs per point, fastest kept
  std::string problem = "manufactured";
  double angle = 0.0;  // plane-wave direction

  cplx resolved_eta() const noexcept { return eta.value_or(cplx(kappa, 0.0)); }
  std::vector<int> levels() const;
  /// Throws std::invalid_argument on the first bad field.
  void validate() const;
  /// Resolved configuration as one line of JSON.
  std::string to_json() const;
  /// FNV-1a of to_json() with output paths left out, as 16 hex digits.
  std::string hash() const;
};

ProblemSpec make_problem(const RunConfig& cfg);

/// Plan for a tree of the given depth. Automatic plans calibrate on the tree
/// (seeded from cfg.seed); a single thread always gives the serial plan.
ThreadPlan resolve_plan(const RunConfig& cfg, const BoxTree& tree, int total_threads);

/// Rough peak bytes of a build: retained leaf and merge blocks plus the ItI
/// operators alive while two adjacent levels are merged, scaled to match
/// measured resident size.
std::size_t estimate_build_bytes(int levels, int n_c);
/// MemAvailable from /proc/meminfo, 0 when unknown.
std::size_t available_memory_bytes();
/// Throws std::runtime_error naming the deepest feasible tree when the
/// estimate exceeds `fraction` of available memory.
void check_memory(int levels, int n_c, double fraction = 0.8);

struct ConvergenceRow {
  int n_c = 0;
  int levels = 0;
  Index n = 0;
  double points_per_wavelength = 0.0;
  double e_inf = 0.0;
  double build_s = 0.0;
  double solve_s = 0.0;
};

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg, std::ostream* log = nullptr);
/// Header "config_hash,n_c,levels,N,ppw,e_inf,build_s,solve_s".
void write_convergence_csv(std::ostream& os, const std::string& hash, const std::vector<ConvergenceRow>& rows);

struct ScalingRow {
  int levels = 0;
  Index n = 0;
  double build_s = 0.0;
  double solve_s = 0.0;
  std::vector<LevelTiming> build_levels;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double build_slope = 0.0;
  double solve_slope = 0.0;
  /// Build seconds per box at each level of the largest run, leaves first.
  std::vector<double> per_box_build;
  /// Per-box merge time (leaf level excluded) never decreases toward the root.
  bool per_box_build_grows_toward_root = false;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ScalingReport run_scaling(const RunConfig& cfg, std::ostream* log = nullptr);
/// Header "config_hash,n_c,levels,N,build_s,solve_s".
void write_scaling_csv(std::ostream& os, const std::string& hash, int n_c, const ScalingReport& rep);

struct SpeedupRow {
  int levels = 0;
  Index n = 0;
  int threads = 1;
  std::string stage;  // "build" or "solve"
  double seconds = 0.0;
  double speedup = 1.0;
  double e_inf = 0.0;
};

struct SpeedupReport {
  std::vector<SpeedupRow> rows;
  /// Largest |e_inf(parallel) - e_inf(serial)| over all runs.
  double max_e_inf_gap = 0.0;
};

/// Serial baseline, then each thread count with its own plan. Throws
/// std::runtime_error if any parallel e_inf differs from the serial one by
/// more than 1e-12.
SpeedupReport run_speedup(const RunConfig& cfg, std::ostream* log = nullptr);
/// Header "config_hash,levels,N,theta_t,stage,seconds,speedup,e_inf".
void write_speedup_csv(std::ostream& os, const std::string& hash, const SpeedupReport& rep);

struct SolveOnceReport {
  bool loaded_checkpoint = false;
  double build_s = 0.0;  // 0 when loaded
  double solve_s = 0.0;
  std::optional<double> e_inf;
  Index n = 0;
};

/// Builds (or loads cfg.checkpoint when it exists, saving it otherwise),
/// solves for `spec` and writes "x,y,re,im" rows for every point to cfg.out.
SolveOnceReport solve_once(const RunConfig& cfg, const ProblemSpec& spec);

/// Gnuplot script plotting a convergence or scaling CSV on log-log axes.
std::string gnuplot_script(const std::string& kind, const std::string& csv_path, const std::vector<int>& n_c);

}  // namespace hps
