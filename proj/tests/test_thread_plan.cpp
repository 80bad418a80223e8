#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hps/thread_plan.hpp"
#include "planner_oracle.hpp"

using namespace hps;

using hps::testing::brute_force_level;
using hps::testing::sublinear_row;

TEST(OptimizeLevel, FlatTimesUseOuterOnly) {
  const auto lt = optimize_level(16, 56, std::vector<double>(56, 2.0));
  EXPECT_EQ(lt.outer, 16);
  EXPECT_EQ(lt.inner, 1);
  EXPECT_DOUBLE_EQ(level_cost(16, lt, std::vector<double>(56, 2.0)), 2.0);
}

TEST(OptimizeLevel, RootUsesAllInner) {
  std::vector<double> r;
  for (int j = 1; j <= 56; ++j) r.push_back(1.0 / std::sqrt(static_cast<double>(j)));
  const auto lt = optimize_level(1, 56, r);
  EXPECT_EQ(lt.outer, 1);
  EXPECT_EQ(lt.inner, 56);
}

TEST(OptimizeLevel, TwoBoxesSplitEvenly) {
  std::vector<double> r;
  for (int j = 1; j <= 56; ++j) r.push_back(1.0 / std::pow(j, 0.8));
  const auto lt = optimize_level(2, 56, r);
  EXPECT_EQ(lt.outer, 2);
  EXPECT_EQ(lt.inner, 28);
}

TEST(OptimizeLevel, EvenSplitForFewBoxes) {
  for (int boxes : {1, 2, 3, 4, 5, 7, 8, 10}) {
    const auto lt = optimize_level(boxes, 40, sublinear_row(40));
    EXPECT_EQ(lt.outer, boxes) << boxes;
    EXPECT_EQ(lt.inner, 40 / boxes) << boxes;
  }
}

TEST(OptimizeLevel, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> boxes(1, 300), threads(1, 64);
  std::uniform_real_distribution<double> time(0.1, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = boxes(rng), t = threads(rng);
    std::vector<double> r(static_cast<std::size_t>(t));
    for (auto& v : r) v = (trial % 3 == 0) ? (1.0 + std::round(time(rng) * 4)) / 4 : time(rng);  // some ties
    const auto got = optimize_level(n, t, r);
    const auto want = brute_force_level(n, t, r);
    EXPECT_EQ(got.outer, want.outer) << trial;
    EXPECT_EQ(got.inner, want.inner) << trial;
  }
}

TEST(OptimizeLevel, LargerBudgetNeverHurts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> time(0.1, 2.0);
  std::vector<double> r(64);
  for (auto& v : r) v = time(rng);
  for (int n : {1, 3, 17, 64}) {
    double prev = 1e300;
    for (int t = 1; t <= 64; ++t) {
      const double c = level_cost(n, optimize_level(n, t, r), r);
      EXPECT_LE(c, prev);
      prev = c;
    }
  }
}

TEST(OptimizeLevel, RejectsBadInput) {
  EXPECT_THROW(optimize_level(0, 4, {1.0}), std::invalid_argument);
  EXPECT_THROW(optimize_level(4, 4, {}), std::invalid_argument);
  EXPECT_THROW(optimize_level(4, 4, {1.0, -1.0}), std::invalid_argument);
}

TEST(RepresentativeAction, TableSizes) {
  const auto t16 = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 16);
  const auto leaf_build = representative_action(t16, Stage::build, 1);
  EXPECT_EQ(leaf_build.task, TaskKind::inversion);
  EXPECT_EQ(leaf_build.rows, 196);
  EXPECT_EQ(leaf_build.cols, 196);
  const auto down = representative_action(t16, Stage::downward, 0);
  EXPECT_EQ(down.task, TaskKind::matvec);
  EXPECT_EQ(down.rows, 14);
  EXPECT_EQ(down.cols, 84);
  const auto up = representative_action(t16, Stage::upward, 0);
  EXPECT_EQ(up.rows, 84);
  EXPECT_EQ(up.cols, 14);
  const auto root_build = representative_action(t16, Stage::build, 0);
  EXPECT_EQ(root_build.rows, 14);
  const auto leaf_up = representative_action(t16, Stage::upward, 1);
  EXPECT_EQ(leaf_up.rows, 252);
  EXPECT_EQ(leaf_up.cols, 196);
  const auto leaf_down = representative_action(t16, Stage::downward, 1);
  EXPECT_EQ(leaf_down.rows, 252);
  EXPECT_EQ(leaf_down.cols, 56);
}

TEST(Calibration, TextRoundTrip) {
  CalibrationTable t;
  t.add({Stage::build, 3, TaskKind::inversion, 196, 196, 1, 0.0123456789012345678});
  t.add({Stage::downward, 0, TaskKind::matvec, 14, 84, 2, 1.5e-7});
  std::stringstream ss;
  t.write(ss);
  const auto back = CalibrationTable::read(ss);
  ASSERT_EQ(back.rows().size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& a = t.rows()[k];
    const auto& b = back.rows()[k];
    EXPECT_EQ(a.stage, b.stage);
    EXPECT_EQ(a.level, b.level);
    EXPECT_EQ(a.task, b.task);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.cols, b.cols);
    EXPECT_EQ(a.inner_threads, b.inner_threads);
    EXPECT_EQ(a.seconds, b.seconds);
  }
}

TEST(Calibration, ParsesCommentsAndRejectsMalformed) {
  std::istringstream good("# header\n\nbuild 0 inversion 4 4 1 0.5  # trailing\n");
  EXPECT_EQ(CalibrationTable::read(good).rows().size(), 1u);
  std::istringstream bad("build 0 inversion 4 4\n");
  EXPECT_THROW(CalibrationTable::read(bad), std::runtime_error);
  std::istringstream bad_stage("solve 0 matvec 4 4 1 0.5\n");
  EXPECT_THROW(CalibrationTable::read(bad_stage), std::invalid_argument);
  std::istringstream zero("build 0 inversion 4 4 1 0\n");
  EXPECT_THROW(CalibrationTable::read(zero), std::invalid_argument);
}

TEST(Calibration, MeasuresEveryStageAndLevel) {
  const auto tree = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 3, 6);
  CalibrationOptions opts;
  opts.max_threads = 2;
  opts.repetitions = 3;
  opts.min_sample_seconds = 1e-4;
  const auto table = calibrate(tree, opts);
  EXPECT_EQ(table.rows().size(), 3u * 3u * 2u);
  for (const auto& r : table.rows()) EXPECT_GT(r.seconds, 0.0);
  const auto plan = make_plan(table, tree, 2);
  plan.validate();
  EXPECT_EQ(plan.levels(), 3);
}

TEST(Calibration, MissingRowsReported) {
  const auto tree = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 2, 6);
  CalibrationTable t;
  t.add({Stage::build, 0, TaskKind::inversion, 4, 4, 1, 1.0});
  EXPECT_THROW(make_plan(t, tree, 1), std::out_of_range);
}

TEST(ThreadPlan, SingleLevelPlanHasOneEntryPerStage) {
  const auto tree = BoxTree::build_uniform(Rect{0, 1, 0, 1}, 1, 6);
  CalibrationTable t;
  for (Stage s : kAllStages)
    for (int j = 1; j <= 4; ++j) t.add({s, 0, TaskKind::matvec, 4, 4, j, 1.0 / j});
  const auto plan = make_plan(t, tree, 4);
  EXPECT_EQ(plan.levels(), 1);
  for (Stage s : kAllStages) {
    EXPECT_EQ(plan.at(s, 0).outer, 1);
    EXPECT_EQ(plan.at(s, 0).inner, 4);
  }
}

TEST(ThreadPlan, FeasibilityEnforced) {
  ThreadPlan p(3, 4);
  p.set(Stage::upward, 2, {4, 1});
  p.validate();
  p.set(Stage::upward, 2, {3, 2});
  EXPECT_THROW(p.validate(), std::invalid_argument);
  const auto of = ThreadPlan::outer_first(4, 6);
  of.validate();
  EXPECT_EQ(of.at(Stage::build, 0).inner, 6);
  EXPECT_EQ(of.at(Stage::build, 3).outer, 6);
  EXPECT_EQ(of.at(Stage::build, 3).inner, 1);
}
