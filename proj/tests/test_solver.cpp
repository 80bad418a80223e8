#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "hps/linalg.hpp"
#include "hps/solver.hpp"

using namespace hps;

namespace {

ProblemSpec plane_wave_unit(double kappa) { return plane_wave_problem(kappa, 0.3); }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / (name + std::to_string(::getpid()))).string();
}

}  // namespace

TEST(Build, SingleLevelHasOnlyLeafOperators) {
  const auto p = manufactured_problem(2.0);
  const auto st = SolverState::build(p, 1, 8, ThreadPlan::serial(1));
  const auto& op = st.leaf(1);
  EXPECT_FALSE(op.r.empty());
  EXPECT_FALSE(op.psi.empty());
  EXPECT_FALSE(op.y.empty());
  EXPECT_FALSE(op.gamma.empty());
  EXPECT_THROW(st.merged(1), std::invalid_argument);
  const auto rep = st.storage_report();
  EXPECT_EQ(rep.leaf_records, 1);
  EXPECT_EQ(rep.merge_records, 0);
  EXPECT_TRUE(rep.root_r_present);
}

TEST(Build, FourByFourTreeRecords) {
  const auto p = manufactured_problem(2.0);
  const auto st = SolverState::build(p, 5, 6, ThreadPlan::serial(5));
  const auto rep = st.storage_report();
  EXPECT_EQ(rep.leaf_records, 16);
  EXPECT_EQ(rep.merge_records, 15);
  EXPECT_EQ(rep.non_root_r_count, 0);
  EXPECT_TRUE(rep.root_r_present);
  EXPECT_EQ(rep.leaf_records_with_exact_set, 16);
  EXPECT_EQ(rep.merge_records_with_exact_set, 14);
  ASSERT_EQ(st.build_timings().size(), 5u);
  EXPECT_EQ(st.build_timings().front().level, 4);
  EXPECT_EQ(st.build_timings().front().boxes, 16);
  EXPECT_EQ(st.build_timings().back().level, 0);
}

TEST(Build, RejectsPlanOfWrongDepth) {
  const auto p = manufactured_problem(2.0);
  EXPECT_THROW(SolverState::build(p, 3, 6, ThreadPlan::serial(2)), std::invalid_argument);
  ThreadPlan bad(3, 2);
  bad.set(Stage::build, 0, {2, 1});  // two outer workers on a single-box level
  EXPECT_THROW(SolverState::build(p, 3, 6, bad), std::invalid_argument);
}

TEST(Build, RejectsPurelyImaginaryEta) {
  auto p = manufactured_problem(2.0, cplx(0.0, 1.0));
  EXPECT_THROW(SolverState::build(p, 2, 6, ThreadPlan::serial(2)), std::invalid_argument);
}

TEST(Build, ParallelPlansReproduceSerialOperators) {
  const auto p = manufactured_problem(4.0);
  const int levels = 4;
  const auto serial = SolverState::build(p, levels, 10, ThreadPlan::serial(levels));
  std::mt19937 rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    ThreadPlan plan(levels, 4);
    for (Stage s : kAllStages)
      for (int l = 0; l < levels; ++l) {
        const int outer = 1 + static_cast<int>(rng() % std::min(4, BoxTree::boxes_on_level(l)));
        const int inner = 1 + static_cast<int>(rng() % (4 / outer));
        plan.set(s, l, {outer, inner});
      }
    const auto par = SolverState::build(p, levels, 10, plan);
    EXPECT_LE(max_abs_diff(par.root_r(), serial.root_r()), 1e-12) << trial;
    for (int id = 1; id < BoxTree::first_on_level(levels - 1); ++id)
      EXPECT_LE(max_abs_diff(par.merged(id).phi_alpha, serial.merged(id).phi_alpha), 1e-12);
    const auto a = solve(serial, p, ThreadPlan::serial(levels));
    const auto b = solve(par, p, plan);
    EXPECT_LE(std::abs(*a.e_inf - *b.e_inf), 1e-12);
    EXPECT_LE(max_abs_diff(a.u, b.u), 1e-12);
  }
}

TEST(Solve, ZeroDataGivesZero) {
  const auto p = zero_problem(3.0);
  const auto st = SolverState::build(p, 3, 8, ThreadPlan::serial(3));
  const auto sol = solve(st, p, ThreadPlan::serial(3));
  EXPECT_EQ(norm_max(sol.u), 0.0);
  EXPECT_EQ(*sol.e_inf, 0.0);
}

TEST(Solve, PlaneWaveHomogeneousPath) {
  const auto p = plane_wave_unit(6.0);
  ASSERT_TRUE(p.homogeneous());
  const auto st = SolverState::build(p, 5, 12, ThreadPlan::serial(5));
  const auto sol = solve(st, p, ThreadPlan::serial(5));
  EXPECT_LT(*sol.e_inf, 1e-9);
  for (const auto& t : sol.timings) EXPECT_NE(t.stage, Stage::upward);
}

TEST(Solve, ConstantSolutionIsExact) {
  const auto p = constant_problem(cplx(1.0, 0.5));
  // Roundoff grows with resolution (the dense direct solve shows the same
  // growth), so exactness to 1e-12 is checked at modest sizes.
  for (int levels : {1, 3, 5}) {
    const auto st = SolverState::build(p, levels, 9, ThreadPlan::serial(levels));
    EXPECT_LE(*solve(st, p, ThreadPlan::serial(levels)).e_inf, 1e-12) << levels;
  }
}

TEST(Solve, MatchesDenseOracle) {
  ProblemSpec p = manufactured_problem(2.0);
  p.coefficient = [](double, double) { return 1.0; };
  p.body_load = [](double x, double y) { return cplx(std::sin(3 * x), x * y); };
  for (int levels : {1, 2, 3}) {
    const auto st = SolverState::build(p, levels, 8, ThreadPlan::serial(levels));
    const auto hps_sol = solve(st, p, ThreadPlan::serial(levels));
    const auto ref = global_direct_oracle(p, levels, 8);
    EXPECT_LE(max_abs_diff(hps_sol.u, ref.u), 1e-9) << levels;
    EXPECT_LE(max_abs_diff(st.root_r(), oracle_iti(p, st.tree(), 1)), 1e-9) << levels;
  }
}

TEST(Solve, ManufacturedSolutionConverges) {
  const auto p = manufactured_problem(4.0);
  double prev = 1e300;
  for (int levels : {1, 3, 5}) {
    const auto st = SolverState::build(p, levels, 12, ThreadPlan::serial(levels));
    const double e = *solve(st, p, ThreadPlan::serial(levels)).e_inf;
    EXPECT_LT(e, prev / 10.0) << levels;
    prev = e;
  }
}

TEST(Solve, PerformsNoFactorizations) {
  const auto p = manufactured_problem(3.0);
  const auto st = SolverState::build(p, 4, 8, ThreadPlan::serial(4));
  const long before = op_counters().factorizations.load();
  const auto sol = solve(st, p, ThreadPlan::serial(4));
  EXPECT_EQ(op_counters().factorizations.load(), before);
  EXPECT_GT(sol.solve_seconds(), 0.0);
}

TEST(Solve, RejectsMismatchedProblem) {
  const auto p = manufactured_problem(3.0);
  const auto st = SolverState::build(p, 2, 6, ThreadPlan::serial(2));
  EXPECT_THROW(solve(st, manufactured_problem(4.0), ThreadPlan::serial(2)), std::invalid_argument);
  EXPECT_THROW(solve(st, p, ThreadPlan::serial(3)), std::invalid_argument);
  auto other_c = p;
  other_c.coefficient = [](double, double) { return 1.0; };
  EXPECT_THROW(solve(st, other_c, ThreadPlan::serial(2)), std::invalid_argument);
  auto other_domain = manufactured_problem(3.0, std::nullopt, Rect{0, 2, 0, 1});
  EXPECT_THROW(solve(st, other_domain, ThreadPlan::serial(2)), std::invalid_argument);
}

TEST(Solve, CoefficientIgnoredWithoutWavenumber) {
  const auto p = constant_problem(cplx(1.0, 0.0));
  const auto st = SolverState::build(p, 2, 6, ThreadPlan::serial(2));
  auto q = p;
  q.coefficient = [](double x, double) { return 5.0 + x; };
  EXPECT_EQ(st.coefficient_fingerprint(), 0u);
  EXPECT_LE(*solve(st, q, ThreadPlan::serial(2)).e_inf, 1e-12);
}

TEST(Solve, SecondRightHandSideReusesOperators) {
  const auto p = manufactured_problem(3.0);
  const auto st = SolverState::build(p, 3, 10, ThreadPlan::serial(3));
  auto q = plane_wave_problem(3.0, 1.1, p.eta);
  q.coefficient = p.coefficient;  // same operator, different data
  q.exact = nullptr;
  const auto a = solve(st, p, ThreadPlan::serial(3));
  const auto b = solve(st, q, ThreadPlan::serial(3));
  const auto ref = global_direct_oracle(q, 3, 10);
  EXPECT_LE(max_abs_diff(b.u, ref.u), 1e-9);
  EXPECT_TRUE(a.e_inf.has_value());
}

TEST(Oracle, SingleLeafEqualsLeafSolve) {
  const auto p = manufactured_problem(2.0);
  const auto st = SolverState::build(p, 1, 10, ThreadPlan::serial(1));
  const auto a = solve(st, p, ThreadPlan::serial(1));
  const auto b = global_direct_oracle(p, 1, 10);
  EXPECT_LE(max_abs_diff(a.u, b.u), 1e-11);
}

TEST(Oracle, PlaneWaveErrorDecaysWithOrder) {
  const auto p = plane_wave_unit(4.0);
  const double e6 = *global_direct_oracle(p, 2, 6).e_inf;
  const double e10 = *global_direct_oracle(p, 2, 10).e_inf;
  const double e14 = *global_direct_oracle(p, 2, 14).e_inf;
  EXPECT_LT(e10, e6 * 1e-2);
  EXPECT_LT(e14, e10 * 1e-2);
}

TEST(Residual, ZeroSolutionZeroData) {
  const auto p = zero_problem(2.0);
  const auto t = BoxTree::build_uniform(p.domain, 3, 6);
  const auto r = residual_check(t, CVector(static_cast<std::size_t>(t.n_points())), p);
  EXPECT_EQ(r.max_abs, 0.0);
  EXPECT_EQ(r.scaled, 0.0);
}

TEST(Residual, OracleAndSolverSatisfyCollocation) {
  const auto p = manufactured_problem(2.0);
  const auto ref = global_direct_oracle(p, 3, 8);
  const auto t = BoxTree::build_uniform(p.domain, 3, 8);
  EXPECT_LE(residual_check(t, ref.u, p).scaled, 1e-8);
  const auto st = SolverState::build(p, 3, 8, ThreadPlan::serial(3));
  const auto sol = solve(st, p, ThreadPlan::serial(3));
  EXPECT_LE(residual_check(t, sol.u, p, {4, 7}).scaled, 1e-8);
}

TEST(Checkpoint, RoundTripReproducesSolve) {
  const auto p = manufactured_problem(3.0);
  const auto st = SolverState::build(p, 4, 8, ThreadPlan::serial(4));
  const std::string path = temp_path("hps_ckpt_");
  st.save(path);
  const auto loaded = SolverState::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.tree().n_boxes(), st.tree().n_boxes());
  EXPECT_EQ(loaded.coefficient_fingerprint(), st.coefficient_fingerprint());
  EXPECT_EQ(max_abs_diff(loaded.root_r(), st.root_r()), 0.0);
  const auto a = solve(st, p, ThreadPlan::serial(4));
  const auto b = solve(loaded, p, ThreadPlan::serial(4));
  EXPECT_EQ(max_abs_diff(a.u, b.u), 0.0);
  EXPECT_EQ(loaded.storage_report().non_root_r_count, 0);
}

TEST(Checkpoint, RejectsGarbage) {
  const std::string path = temp_path("hps_bad_");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a checkpoint at all", f);
    std::fclose(f);
  }
  EXPECT_THROW(SolverState::load(path), std::runtime_error);
  std::filesystem::remove(path);
  EXPECT_THROW(SolverState::load(path), std::runtime_error);
}

TEST(Metrics, LevelTimingCsv) {
  std::ostringstream os;
  write_level_timings_csv(os, {{Stage::build, 2, 4, 2, 1, 0.5}, {Stage::downward, 0, 1, 1, 4, 0.25}});
  EXPECT_EQ(os.str(), "stage,level,boxes,theta_o,theta_i,seconds\nbuild,2,4,2,1,0.5\ndownward,0,1,1,4,0.25\n");
}
