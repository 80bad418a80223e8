#include "hps/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hps/parallel.hpp"

namespace hps {

namespace {

std::string plan_name(PlanSource p) {
  switch (p) {
    case PlanSource::serial: return "serial";
    case PlanSource::automatic: return "auto";
    case PlanSource::file: return "file";
  }
  return "?";
}

nlohmann::ordered_json config_json(const RunConfig& c, bool with_paths) {
  nlohmann::ordered_json j;
  j["subcommand"] = c.subcommand;
  j["problem"] = c.problem;
  if (c.problem == "plane-wave") j["angle"] = c.angle;
  j["levels"] = c.levels();
  j["n_c"] = c.n_c;
  j["kappa"] = c.kappa;
  j["eta"] = {c.resolved_eta().real(), c.resolved_eta().imag()};
  j["threads"] = c.threads;
  if (!c.thread_counts.empty()) j["thread_counts"] = c.thread_counts;
  j["plan"] = plan_name(c.plan);
  if (c.plan == PlanSource::file) j["plan_file"] = c.plan_file;
  j["seed"] = c.seed;
  j["repeats"] = c.repeats;
  if (with_paths) {
    j["out"] = c.out;
    j["checkpoint"] = c.checkpoint;
  }
  return j;
}

std::vector<int> default_thread_counts(int max_threads) {
  std::vector<int> out;
  for (int t = 1; t < max_threads; t *= 2) out.push_back(t);
  out.push_back(max_threads);
  return out;
}

}  // namespace

std::vector<int> RunConfig::levels() const {
  std::vector<int> out;
  for (int l = level_min; l <= level_max; l += level_step) out.push_back(l);
  return out;
}

void RunConfig::validate() const {
  static const std::vector<std::string> kSub{"convergence", "scaling", "speedup", "calibrate", "solve-once", "tree"};
  if (std::find(kSub.begin(), kSub.end(), subcommand) == kSub.end())
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  if (level_min < 1 || level_max < level_min) throw std::invalid_argument("level range must satisfy 1 <= A <= B");
  if (level_max > 24) throw std::invalid_argument("more than 24 tree levels is not supported");
  if (level_step < 1) throw std::invalid_argument("level step must be positive");
  if (n_c.empty()) throw std::invalid_argument("at least one n_c is required");
  for (int n : n_c)
    if (n < 3) throw std::invalid_argument("n_c must be at least 3");
  if (!std::isfinite(kappa) || kappa < 0) throw std::invalid_argument("kappa must be finite and non-negative");
  if (resolved_eta().real() == 0.0) throw std::invalid_argument("Re(eta) must be nonzero");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  for (int t : thread_counts)
    if (t < 1 || t > threads) throw std::invalid_argument("thread counts must lie in [1, threads]");
  if (plan == PlanSource::file && plan_file.empty()) throw std::invalid_argument("plan file path is empty");
  if (repeats < 1) throw std::invalid_argument("repeats must be positive");
  static const std::vector<std::string> kProblems{"manufactured", "plane-wave", "zero", "constant"};
  if (std::find(kProblems.begin(), kProblems.end(), problem) == kProblems.end())
    throw std::invalid_argument("unknown problem '" + problem + "'");
  if (problem == "constant" && kappa != 0.0) throw std::invalid_argument("the constant problem needs kappa = 0");
}

std::string RunConfig::to_json() const { return config_json(*this, true).dump(); }

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_json(*this, false).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemSpec make_problem(const RunConfig& cfg) {
  const cplx eta = cfg.resolved_eta();
  if (cfg.problem == "plane-wave") return plane_wave_problem(cfg.kappa, cfg.angle, eta);
  if (cfg.problem == "zero") return zero_problem(cfg.kappa, eta);
  if (cfg.problem == "constant") return constant_problem(eta);
  return manufactured_problem(cfg.kappa, eta);
}

ThreadPlan resolve_plan(const RunConfig& cfg, const BoxTree& tree, int total_threads) {
  const int levels = tree.levels();
  if (total_threads == 1 || cfg.plan == PlanSource::serial) return ThreadPlan::serial(levels);
  if (cfg.plan == PlanSource::file) return make_plan(CalibrationTable::load(cfg.plan_file), tree, total_threads);
  CalibrationOptions opts;
  opts.max_threads = total_threads;
  opts.seed = cfg.seed;
  return make_plan(calibrate(tree, opts), tree, total_threads);
}

std::size_t estimate_build_bytes(int levels, int n_c) {
  const double nb = 4.0 * (n_c - 2), ni = double(n_c - 2) * (n_c - 2), nt = nb + ni;
  const double leaves = std::ldexp(1.0, levels - 1);
  double entries = leaves * (nt * nb + nt * ni + nb * ni) + 2 * nt * nt;
  // Points along the x and y edges of a box on level l: x is split on even
  // levels, y on odd ones.
  auto boundary = [&](int l) {
    int sx = 0, sy = 0;
    for (int k = l; k < levels - 1; ++k) (k % 2 == 0 ? sx : sy)++;
    const double px = std::ldexp(double(n_c - 2), sx), py = std::ldexp(double(n_c - 2), sy);
    return std::array<double, 3>{px, py, 2 * (px + py)};
  };
  double transient = leaves * nb * nb;
  for (int l = levels - 2; l >= 0; --l) {
    const auto [px, py, perim] = boundary(l);
    const double n3 = (l % 2 == 0) ? py : px;
    const double boxes = std::ldexp(1.0, l);
    entries += boxes * (2 * n3 * perim + 3 * n3 * n3 + perim * n3);
    const auto child = boundary(l + 1);
    transient = std::max(transient, 2 * boxes * child[2] * child[2] + boxes * perim * perim);
  }
  // Allocator slack, temporaries and index arrays: measured peak RSS ran
  // about 1.25x this count (n_c = 6, 16 levels).
  return static_cast<std::size_t>(1.25 * (entries + transient) * sizeof(cplx));
}

std::size_t available_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  std::size_t value = 0;
  std::string unit;
  while (in >> key >> value >> unit)
    if (key == "MemAvailable:") return value * 1024;
  return 0;
}

void check_memory(int levels, int n_c, double fraction) {
  const std::size_t avail = available_memory_bytes();
  if (avail == 0) return;
  const double budget = fraction * static_cast<double>(avail);
  if (static_cast<double>(estimate_build_bytes(levels, n_c)) <= budget) return;
  int feasible = 0;
  for (int l = 1; l < levels; ++l)
    if (static_cast<double>(estimate_build_bytes(l, n_c)) <= budget) feasible = l;
  std::ostringstream msg;
  msg << "build with " << levels << " levels and n_c = " << n_c << " needs about "
      << estimate_build_bytes(levels, n_c) / (1 << 20) << " MiB, " << avail / (1 << 20) << " MiB available";
  if (feasible > 0)
    msg << "; deepest feasible tree has " << feasible << " levels";
  throw std::runtime_error(msg.str());
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  const ProblemSpec spec = make_problem(cfg);
  std::vector<ConvergenceRow> rows;
  for (int n_c : cfg.n_c)
    for (int levels : cfg.levels()) {
      check_memory(levels, n_c);
      const auto tree = BoxTree::build_uniform(spec.domain, levels, n_c);
      const ThreadPlan plan = resolve_plan(cfg, tree, cfg.threads);
      ConvergenceRow row;
      row.n_c = n_c;
      row.levels = levels;
      row.build_s = row.solve_s = 1e300;
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        const auto state = SolverState::build(spec, levels, n_c, plan);
        const auto sol = solve(state, spec, plan);
        row.n = state.tree().n_points();
        row.e_inf = sol.e_inf.value_or(std::nan(""));
        row.build_s = std::min(row.build_s, state.build_seconds());
        row.solve_s = std::min(row.solve_s, sol.solve_seconds());
      }
      const double width = spec.domain.xmax - spec.domain.xmin;
      // The manufactured wave has wavelength 1/κ along each axis.
      row.points_per_wavelength = cfg.kappa > 0 ? std::sqrt(double(row.n)) / (width * cfg.kappa) : 0.0;
      if (log)
        *log << "n_c=" << n_c << " L=" << levels << " N=" << row.n << " e_inf=" << row.e_inf
             << " build=" << row.build_s << "s solve=" << row.solve_s << "s\n";
      rows.push_back(row);
    }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::string& hash, const std::vector<ConvergenceRow>& rows) {
  os << "config_hash,n_c,levels,N,ppw,e_inf,build_s,solve_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%lld,%.4f,%.17g,%.9g,%.9g\n", hash.c_str(), r.n_c, r.levels,
                  static_cast<long long>(r.n), r.points_per_wavelength, r.e_inf, r.build_s, r.solve_s);
    os << buf;
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] <= 0 || y[k] <= 0) throw std::invalid_argument("log-log fit needs positive data");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw std::invalid_argument("log-log fit needs distinct x values");
  return sxy / sxx;
}

ScalingReport run_scaling(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  const ProblemSpec spec = make_problem(cfg);
  const int n_c = cfg.n_c.front();
  ScalingReport rep;
  const auto depths = cfg.levels();
  std::vector<ThreadPlan> plans;
  for (int levels : depths) {
    check_memory(levels, n_c);
    plans.push_back(resolve_plan(cfg, BoxTree::build_uniform(spec.domain, levels, n_c), cfg.threads));
    ScalingRow row;
    row.levels = levels;
    row.build_s = row.solve_s = 1e300;
    rep.rows.push_back(std::move(row));
  }
  // Repeats sweep all sizes in turn so a slow stretch of wall-clock time does
  // not land on every sample of one size.
  for (int r = 0; r < cfg.repeats; ++r)
    for (std::size_t k = 0; k < depths.size(); ++k) {
      ScalingRow& row = rep.rows[k];
      const auto state = SolverState::build(spec, depths[k], n_c, plans[k]);
      const auto sol = solve(state, spec, plans[k]);
      row.n = state.tree().n_points();
      if (state.build_seconds() < row.build_s) {
        row.build_s = state.build_seconds();
        row.build_levels = state.build_timings();
      }
      row.solve_s = std::min(row.solve_s, sol.solve_seconds());
      if (log)
        *log << "L=" << row.levels << " N=" << row.n << " build=" << state.build_seconds()
             << "s solve=" << sol.solve_seconds() << "s\n";
    }
  const auto& first = rep.rows.front();
  if (first.build_s < 0.05 || first.solve_s < 0.05) {
    std::ostringstream w;
    w << "smallest run (N=" << first.n << ") took build " << first.build_s << " s, solve " << first.solve_s
      << " s; times under 50 ms are dominated by timer noise";
    rep.warnings.push_back(w.str());
  }
  if (rep.rows.size() >= 2) {
    std::vector<double> n, b, s;
    for (const auto& r : rep.rows) {
      n.push_back(double(r.n));
      b.push_back(r.build_s);
      s.push_back(r.solve_s);
    }
    rep.build_slope = loglog_slope(n, b);
    rep.solve_slope = loglog_slope(n, s);
    if (std::log2(n.back() / n.front()) < 3.5) rep.warnings.push_back("fewer than four doublings of N; slopes are rough");
  }
  // Build timings are recorded leaves first.
  for (const auto& t : rep.rows.back().build_levels) rep.per_box_build.push_back(t.seconds / t.boxes);
  // Leaf work is a different kernel; the trend is over merge levels.
  if (rep.per_box_build.size() > 1)
    rep.per_box_build_grows_toward_root = std::is_sorted(rep.per_box_build.begin() + 1, rep.per_box_build.end());
  return rep;
}

void write_scaling_csv(std::ostream& os, const std::string& hash, int n_c, const ScalingReport& rep) {
  os << "config_hash,n_c,levels,N,build_s,solve_s\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%lld,%.9g,%.9g\n", hash.c_str(), n_c, r.levels,
                  static_cast<long long>(r.n), r.build_s, r.solve_s);
    os << buf;
  }
}

SpeedupReport run_speedup(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  const ProblemSpec spec = make_problem(cfg);
  const int n_c = cfg.n_c.front();
  const auto counts = cfg.thread_counts.empty() ? default_thread_counts(cfg.threads) : cfg.thread_counts;
  enable_nested_parallelism();
  SpeedupReport rep;
  for (int levels : cfg.levels()) {
    check_memory(levels, n_c);
    const auto tree = BoxTree::build_uniform(spec.domain, levels, n_c);
    double base_build = 0, base_solve = 0, base_e = 0;
    auto run = [&](const ThreadPlan& plan, double& b, double& s, double& e) {
      b = s = 1e300;
      for (int r = 0; r < cfg.repeats; ++r) {
        const auto state = SolverState::build(spec, levels, n_c, plan);
        const auto sol = solve(state, spec, plan);
        b = std::min(b, state.build_seconds());
        s = std::min(s, sol.solve_seconds());
        e = sol.e_inf.value_or(0.0);
      }
    };
    run(ThreadPlan::serial(levels), base_build, base_solve, base_e);
    for (int t : counts) {
      double b = base_build, s = base_solve, e = base_e;
      if (t > 1) run(resolve_plan(cfg, tree, t), b, s, e);
      const double gap = std::abs(e - base_e);
      rep.max_e_inf_gap = std::max(rep.max_e_inf_gap, gap);
      if (gap > 1e-12) {
        std::ostringstream msg;
        msg << "e_inf with " << t << " threads differs from the serial run by " << gap;
        throw std::runtime_error(msg.str());
      }
      const Index n = tree.n_points();
      rep.rows.push_back({levels, n, t, "build", b, base_build / b, e});
      rep.rows.push_back({levels, n, t, "solve", s, base_solve / s, e});
      if (log)
        *log << "L=" << levels << " threads=" << t << " build=" << b << "s (x" << base_build / b << ") solve=" << s
             << "s (x" << base_solve / s << ")\n";
    }
  }
  return rep;
}

void write_speedup_csv(std::ostream& os, const std::string& hash, const SpeedupReport& rep) {
  os << "config_hash,levels,N,theta_t,stage,seconds,speedup,e_inf\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%lld,%d,%s,%.9g,%.6g,%.17g\n", hash.c_str(), r.levels,
                  static_cast<long long>(r.n), r.threads, r.stage.c_str(), r.seconds, r.speedup, r.e_inf);
    os << buf;
  }
}

SolveOnceReport solve_once(const RunConfig& cfg, const ProblemSpec& spec) {
  cfg.validate();
  const int levels = cfg.level_max;
  const int n_c = cfg.n_c.front();
  SolveOnceReport rep;
  std::optional<SolverState> state;
  if (!cfg.checkpoint.empty() && std::filesystem::exists(cfg.checkpoint)) {
    state.emplace(SolverState::load(cfg.checkpoint));
    if (state->tree().levels() != levels || state->tree().n_c() != n_c)
      throw std::runtime_error("checkpoint " + cfg.checkpoint + " was built for a different tree");
    rep.loaded_checkpoint = true;
  } else {
    check_memory(levels, n_c);
    const auto tree = BoxTree::build_uniform(spec.domain, levels, n_c);
    state.emplace(SolverState::build(spec, levels, n_c, resolve_plan(cfg, tree, cfg.threads)));
    rep.build_s = state->build_seconds();
    if (!cfg.checkpoint.empty()) state->save(cfg.checkpoint);
  }
  enable_nested_parallelism();
  const ThreadPlan plan = cfg.threads == 1 ? ThreadPlan::serial(levels) : ThreadPlan::outer_first(levels, cfg.threads);
  const auto sol = solve(*state, spec, plan);
  rep.solve_s = sol.solve_seconds();
  rep.e_inf = sol.e_inf;
  rep.n = state->tree().n_points();
  if (!cfg.out.empty()) {
    std::ofstream os(cfg.out);
    if (!os) throw std::runtime_error("cannot write " + cfg.out);
    os << "x,y,re,im\n";
    char buf[160];
    const auto& pts = state->tree().points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", pts[k][0], pts[k][1], sol.u[k].real(),
                    sol.u[k].imag());
      os << buf;
    }
  }
  return rep;
}

std::string gnuplot_script(const std::string& kind, const std::string& csv_path, const std::vector<int>& n_c) {
  std::ostringstream g;
  g << "set datafile separator ','\nset logscale xy\nset key top right\nset xlabel 'N'\n";
  if (kind == "convergence") {
    g << "set ylabel 'max error'\nplot ";
    for (std::size_t k = 0; k < n_c.size(); ++k) {
      if (k) g << ", \\\n     ";
      g << "'" << csv_path << "' using ($2==" << n_c[k] << " ? $4 : 1/0):6 with linespoints title 'n_c = " << n_c[k]
        << "'";
    }
    g << "\n";
  } else if (kind == "scaling") {
    g << "set ylabel 'seconds'\nplot '" << csv_path << "' using 4:5 with linespoints title 'build', \\\n     '"
      << csv_path << "' using 4:6 with linespoints title 'solve'\n";
  } else if (kind == "speedup") {
    g << "unset logscale\nset xlabel 'threads'\nset ylabel 'speedup'\nplot '" << csv_path
      << "' using ($5 eq \"build\" ? $4 : 1/0):7 with linespoints title 'build', \\\n     '" << csv_path
      << "' using ($5 eq \"solve\" ? $4 : 1/0):7 with linespoints title 'solve'\n";
  } else {
    throw std::invalid_argument("no plot for '" + kind + "'");
  }
  return g.str();
}

}  // namespace hps
