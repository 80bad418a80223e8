#pragma once

// Per-level split of a thread budget into outer workers (boxes in flight) and
// inner workers (per linear-algebra call), chosen from measured timings of a
// representative kernel per stage and level.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hps/geometry.hpp"

namespace hps {

enum class Stage : std::uint8_t { build, upward, downward };
inline constexpr std::array<Stage, 3> kAllStages{Stage::build, Stage::upward, Stage::downward};

const char* to_string(Stage s) noexcept;
Stage parse_stage(const std::string& s);

enum class TaskKind : std::uint8_t { inversion, matvec };
const char* to_string(TaskKind t) noexcept;

struct RepresentativeAction {
  Stage stage;
  bool leaf_level;
  TaskKind task;
  Index rows;
  Index cols;
};

/// Kernel whose time stands in for one box of the given stage and level.
///   build    leaf: n_i x n_i inversion          other: |I3| x |I3| inversion
///   upward   leaf: n^τ x n_i matvec             other: (|I1|+|I2|) x |I3| matvec
///   downward leaf: n^τ x n_b matvec             other: |I3| x (|I1|+|I2|) matvec
/// For a non-leaf level the sizes come from the merge performed at that level.
RepresentativeAction representative_action(const BoxTree& tree, Stage stage, int level);

struct CalibrationRow {
  Stage stage;
  int level;
  TaskKind task;
  Index rows;
  Index cols;
  int inner_threads;
  double seconds;
};

class CalibrationTable {
 public:
  void add(const CalibrationRow& row);
  const std::vector<CalibrationRow>& rows() const noexcept { return rows_; }

  /// r[j-1] for j = 1..max_threads. Throws std::out_of_range if any entry is missing.
  std::vector<double> times(Stage stage, int level, int max_threads) const;
  bool has(Stage stage, int level) const;

  /// Text format: one row per measurement,
  /// "stage level task rows cols inner_threads seconds"; '#' starts a comment.
  void write(std::ostream& os) const;
  static CalibrationTable read(std::istream& is);
  void save(const std::string& path) const;
  static CalibrationTable load(const std::string& path);

 private:
  std::vector<CalibrationRow> rows_;
};

struct CalibrationOptions {
  int max_threads = 1;
  int repetitions = 5;         // timed samples, median reported
  double min_sample_seconds = 0.01;
  std::uint64_t seed = 20240917;
};

/// Times the representative action for every stage and level of the tree at
/// 1..max_threads inner workers. Must run on an otherwise idle machine.
CalibrationTable calibrate(const BoxTree& tree, const CalibrationOptions& opts);

/// Times one representative action at `inner_threads` workers (median of
/// repetitions, each sample looped until min_sample_seconds).
double time_representative(const RepresentativeAction& a, int inner_threads, const CalibrationOptions& opts);

struct LevelThreads {
  int outer = 1;
  int inner = 1;
};

/// Exhaustive minimization of ceil(n_boxes / outer) * r[inner - 1] over
/// outer * inner <= total_threads, outer <= n_boxes. Ties prefer larger outer,
/// then smaller inner.
LevelThreads optimize_level(int n_boxes, int total_threads, const std::vector<double>& r_row);

/// Objective value for one choice.
double level_cost(int n_boxes, const LevelThreads& choice, const std::vector<double>& r_row);

class ThreadPlan {
 public:
  ThreadPlan() = default;
  ThreadPlan(int levels, int total_threads);

  static ThreadPlan serial(int levels);
  /// Every level: outer = min(boxes, threads), inner = threads / outer.
  static ThreadPlan outer_first(int levels, int total_threads);

  int levels() const noexcept { return levels_; }
  int total_threads() const noexcept { return total_threads_; }
  const LevelThreads& at(Stage s, int level) const;
  void set(Stage s, int level, LevelThreads lt);

  /// Throws std::invalid_argument if any entry is infeasible.
  void validate() const;
  std::string describe() const;

 private:
  int levels_ = 0;
  int total_threads_ = 1;
  std::array<std::vector<LevelThreads>, 3> entries_;
};

/// Applies optimize_level per stage and level.
ThreadPlan make_plan(const CalibrationTable& table, const BoxTree& tree, int total_threads);

}  // namespace hps
