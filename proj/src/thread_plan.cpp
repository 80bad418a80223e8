#include "hps/thread_plan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hps/linalg.hpp"

namespace hps {

const char* to_string(Stage s) noexcept {
  switch (s) {
    case Stage::build: return "build";
    case Stage::upward: return "upward";
    case Stage::downward: return "downward";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  if (s == "build") return Stage::build;
  if (s == "upward") return Stage::upward;
  if (s == "downward") return Stage::downward;
  throw std::invalid_argument("unknown stage '" + s + "'");
}

const char* to_string(TaskKind t) noexcept { return t == TaskKind::inversion ? "inversion" : "matvec"; }

namespace {

TaskKind parse_task(const std::string& s) {
  if (s == "inversion") return TaskKind::inversion;
  if (s == "matvec") return TaskKind::matvec;
  throw std::invalid_argument("unknown task '" + s + "'");
}

}  // namespace

RepresentativeAction representative_action(const BoxTree& tree, Stage stage, int level) {
  if (level < 0 || level >= tree.levels()) throw std::out_of_range("representative_action: bad level");
  const bool leaf = level == tree.leaf_level();
  const auto& ls = tree.leaf_sets();
  if (leaf) {
    switch (stage) {
      case Stage::build: return {stage, true, TaskKind::inversion, ls.n_interior(), ls.n_interior()};
      case Stage::upward: return {stage, true, TaskKind::matvec, ls.n_total(), ls.n_interior()};
      case Stage::downward: return {stage, true, TaskKind::matvec, ls.n_total(), ls.n_boundary()};
    }
  }
  const auto& s = tree.sibling_sets(BoxTree::first_on_level(level));
  const Index ext = s.n1() + s.n2();
  switch (stage) {
    case Stage::build: return {stage, false, TaskKind::inversion, s.n3(), s.n3()};
    case Stage::upward: return {stage, false, TaskKind::matvec, ext, s.n3()};
    case Stage::downward: return {stage, false, TaskKind::matvec, s.n3(), ext};
  }
  throw std::logic_error("unreachable");
}

void CalibrationTable::add(const CalibrationRow& row) {
  if (!(row.seconds > 0.0) || row.inner_threads < 1)
    throw std::invalid_argument("CalibrationTable: entries need seconds > 0 and inner_threads >= 1");
  rows_.push_back(row);
}

bool CalibrationTable::has(Stage stage, int level) const {
  return std::any_of(rows_.begin(), rows_.end(),
                     [&](const CalibrationRow& r) { return r.stage == stage && r.level == level; });
}

std::vector<double> CalibrationTable::times(Stage stage, int level, int max_threads) const {
  std::vector<double> out(static_cast<std::size_t>(max_threads), -1.0);
  for (const auto& r : rows_)
    if (r.stage == stage && r.level == level && r.inner_threads <= max_threads)
      out[static_cast<std::size_t>(r.inner_threads - 1)] = r.seconds;
  for (int j = 0; j < max_threads; ++j)
    if (out[static_cast<std::size_t>(j)] < 0.0)
      throw std::out_of_range(std::string("calibration table has no row for stage ") + to_string(stage) +
                              " level " + std::to_string(level) + " inner_threads " + std::to_string(j + 1));
  return out;
}

void CalibrationTable::write(std::ostream& os) const {
  os << "# stage level task rows cols inner_threads seconds\n";
  char buf[64];
  for (const auto& r : rows_) {
    std::snprintf(buf, sizeof buf, "%.17g", r.seconds);
    os << to_string(r.stage) << ' ' << r.level << ' ' << to_string(r.task) << ' ' << r.rows << ' ' << r.cols << ' '
       << r.inner_threads << ' ' << buf << '\n';
  }
}

CalibrationTable CalibrationTable::read(std::istream& is) {
  CalibrationTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string stage, task;
    CalibrationRow r{};
    if (!(ls >> stage)) continue;
    if (!(ls >> r.level >> task >> r.rows >> r.cols >> r.inner_threads >> r.seconds))
      throw std::runtime_error("calibration table: malformed line " + std::to_string(lineno));
    std::string extra;
    if (ls >> extra) throw std::runtime_error("calibration table: trailing fields on line " + std::to_string(lineno));
    r.stage = parse_stage(stage);
    r.task = parse_task(task);
    t.add(r);
  }
  return t;
}

void CalibrationTable::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write(os);
}

CalibrationTable CalibrationTable::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read(is);
}

double time_representative(const RepresentativeAction& a, int inner_threads, const CalibrationOptions& opts) {
  std::mt19937_64 rng(opts.seed ^ (static_cast<std::uint64_t>(a.rows) << 32) ^ static_cast<std::uint64_t>(a.cols));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto disc = [&] { return std::polar(std::sqrt(unif(rng)), 2.0 * 3.14159265358979323846 * unif(rng)); };
  CMatrix m(a.rows, a.cols);
  for (Index j = 0; j < a.cols; ++j)
    for (Index i = 0; i < a.rows; ++i) m(i, j) = disc();
  if (a.task == TaskKind::inversion)
    for (Index i = 0; i < a.rows; ++i) m(i, i) += static_cast<double>(a.rows);  // keep it well conditioned
  CVector x(static_cast<std::size_t>(a.cols));
  for (auto& v : x) v = disc();

  auto once = [&] {
    if (a.task == TaskKind::inversion) {
      CMatrix inv = lu_invert(m, inner_threads);
      return inv(0, 0).real();
    }
    CVector y = matvec(m, x, inner_threads);
    return y.empty() ? 0.0 : y[0].real();
  };
  using clock = std::chrono::steady_clock;
  volatile double sink = once();  // warm-up

  std::vector<double> samples;
  for (int rep = 0; rep < std::max(1, opts.repetitions); ++rep) {
    long iters = 0;
    const auto t0 = clock::now();
    double elapsed = 0.0;
    do {
      sink = sink + once();
      ++iters;
      elapsed = std::chrono::duration<double>(clock::now() - t0).count();
    } while (elapsed < opts.min_sample_seconds);
    samples.push_back(elapsed / static_cast<double>(iters));
  }
  std::nth_element(samples.begin(), samples.begin() + static_cast<long>(samples.size() / 2), samples.end());
  return samples[samples.size() / 2];
}

CalibrationTable calibrate(const BoxTree& tree, const CalibrationOptions& opts) {
  if (opts.max_threads < 1) throw std::invalid_argument("calibrate: max_threads must be >= 1");
  CalibrationTable t;
  for (Stage s : kAllStages)
    for (int level = 0; level < tree.levels(); ++level) {
      const RepresentativeAction a = representative_action(tree, s, level);
      for (int j = 1; j <= opts.max_threads; ++j)
        t.add({s, level, a.task, a.rows, a.cols, j, time_representative(a, j, opts)});
    }
  return t;
}

double level_cost(int n_boxes, const LevelThreads& choice, const std::vector<double>& r_row) {
  const int rounds = (n_boxes + choice.outer - 1) / choice.outer;
  return static_cast<double>(rounds) * r_row.at(static_cast<std::size_t>(choice.inner - 1));
}

LevelThreads optimize_level(int n_boxes, int total_threads, const std::vector<double>& r_row) {
  if (n_boxes < 1 || total_threads < 1) throw std::invalid_argument("optimize_level: need boxes and threads >= 1");
  if (r_row.empty()) throw std::invalid_argument("optimize_level: empty timing row");
  for (double r : r_row)
    if (!(r > 0.0)) throw std::invalid_argument("optimize_level: timings must be positive");
  const int max_inner_row = static_cast<int>(r_row.size());
  LevelThreads best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int outer = std::min(total_threads, n_boxes); outer >= 1; --outer) {
    const int max_inner = std::min(total_threads / outer, max_inner_row);
    for (int inner = 1; inner <= max_inner; ++inner) {
      const double c = level_cost(n_boxes, {outer, inner}, r_row);
      // Strict improvement only: outer is visited descending and inner
      // ascending, so the first minimizer found is the preferred one.
      if (c < best_cost) {
        best_cost = c;
        best = {outer, inner};
      }
    }
  }
  return best;
}

ThreadPlan::ThreadPlan(int levels, int total_threads) : levels_(levels), total_threads_(total_threads) {
  if (levels < 1 || total_threads < 1) throw std::invalid_argument("ThreadPlan: levels and threads must be >= 1");
  for (auto& e : entries_) e.assign(static_cast<std::size_t>(levels), LevelThreads{});
}

ThreadPlan ThreadPlan::serial(int levels) { return ThreadPlan(levels, 1); }

ThreadPlan ThreadPlan::outer_first(int levels, int total_threads) {
  ThreadPlan p(levels, total_threads);
  for (Stage s : kAllStages)
    for (int l = 0; l < levels; ++l) {
      const int outer = std::min(BoxTree::boxes_on_level(l), total_threads);
      p.set(s, l, {outer, std::max(1, total_threads / outer)});
    }
  return p;
}

const LevelThreads& ThreadPlan::at(Stage s, int level) const {
  return entries_[static_cast<std::size_t>(s)].at(static_cast<std::size_t>(level));
}

void ThreadPlan::set(Stage s, int level, LevelThreads lt) {
  entries_[static_cast<std::size_t>(s)].at(static_cast<std::size_t>(level)) = lt;
}

void ThreadPlan::validate() const {
  for (Stage s : kAllStages)
    for (int l = 0; l < levels_; ++l) {
      const auto& e = at(s, l);
      if (e.outer < 1 || e.inner < 1 || e.outer * e.inner > total_threads_ || e.outer > BoxTree::boxes_on_level(l))
        throw std::invalid_argument(std::string("ThreadPlan: infeasible entry at stage ") + to_string(s) +
                                    " level " + std::to_string(l));
    }
}

std::string ThreadPlan::describe() const {
  std::ostringstream os;
  os << "# stage level outer inner (threads " << total_threads_ << ")\n";
  for (Stage s : kAllStages)
    for (int l = 0; l < levels_; ++l) os << to_string(s) << ' ' << l << ' ' << at(s, l).outer << ' ' << at(s, l).inner << '\n';
  return os.str();
}

ThreadPlan make_plan(const CalibrationTable& table, const BoxTree& tree, int total_threads) {
  ThreadPlan p(tree.levels(), total_threads);
  for (Stage s : kAllStages)
    for (int l = 0; l < tree.levels(); ++l)
      p.set(s, l, optimize_level(BoxTree::boxes_on_level(l), total_threads, table.times(s, l, total_threads)));
  return p;
}

}  // namespace hps
