// Command-line front end for the experiment suite. Results go to --out as CSV
// (stdout when omitted); the resolved config is printed to stderr and, with
// --out, saved next to the CSV as <out>.config.json.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hps/harness.hpp"
#include "hps/parallel.hpp"

namespace {

void parse_levels(const std::string& text, hps::RunConfig& cfg) {
  std::istringstream in(text);
  std::string part;
  std::vector<int> v;
  while (std::getline(in, part, ':')) v.push_back(std::stoi(part));
  if (v.size() == 1) v.push_back(v[0]);
  if (v.size() < 2 || v.size() > 3) throw CLI::ValidationError("--levels", "expected A:B or A:B:step");
  cfg.level_min = v[0];
  cfg.level_max = v[1];
  cfg.level_step = v.size() == 3 ? v[2] : 1;
}

void parse_plan(const std::string& text, hps::RunConfig& cfg) {
  if (text == "serial") {
    cfg.plan = hps::PlanSource::serial;
  } else if (text == "auto") {
    cfg.plan = hps::PlanSource::automatic;
  } else if (text.rfind("file=", 0) == 0) {
    cfg.plan = hps::PlanSource::file;
    cfg.plan_file = text.substr(5);
  } else {
    throw CLI::ValidationError("--plan", "expected auto, serial or file=PATH");
  }
}

// Writes through `fn` to cfg.out, or stdout when no path was given.
template <class Fn>
void emit(const hps::RunConfig& cfg, Fn&& fn) {
  if (cfg.out.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(cfg.out);
  if (!os) throw std::runtime_error("cannot write " + cfg.out);
  fn(os);
  std::ofstream(cfg.out + ".config.json") << cfg.to_json() << "\n";
}

void write_gnuplot(const std::string& path, const std::string& kind, const hps::RunConfig& cfg) {
  if (path.empty()) return;
  if (cfg.out.empty()) throw std::runtime_error("--gnuplot needs --out for the data file");
  std::ofstream(path) << hps::gnuplot_script(kind, cfg.out, cfg.n_c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HPS Helmholtz solver experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  hps::RunConfig cfg;
  std::string levels = "3:7", plan = "serial", gnuplot;
  double eta_re = std::nan(""), eta_im = 0.0;

  app.add_option("--levels", levels, "tree depths A:B[:step]; a single value means A:A");
  app.add_option("--nc", cfg.n_c, "Chebyshev points per leaf edge, comma separated")->delimiter(',');
  app.add_option("--kappa", cfg.kappa, "wavenumber");
  app.add_option("--eta-real", eta_re, "Re(eta); defaults to kappa");
  app.add_option("--eta-imag", eta_im, "Im(eta)");
  app.add_option("--threads", cfg.threads, "thread budget")->check(CLI::PositiveNumber);
  app.add_option("--thread-counts", cfg.thread_counts, "speedup sweep thread counts")->delimiter(',');
  app.add_option("--plan", plan, "auto, serial or file=calibration.txt");
  app.add_option("--seed", cfg.seed, "calibration RNG seed");
  app.add_option("--repeats", cfg.repeats, "timed runs per point, fastest kept")->check(CLI::PositiveNumber);
  app.add_option("--problem", cfg.problem, "manufactured, plane-wave, zero or constant");
  app.add_option("--angle", cfg.angle, "plane-wave direction in radians");
  app.add_option("--out", cfg.out, "output file");
  app.add_option("--checkpoint", cfg.checkpoint, "operator file for solve-once (loaded if present)");
  app.add_option("--gnuplot", gnuplot, "also write a gnuplot script");

  auto* conv = app.add_subcommand("convergence", "max error against N for each n_c");
  auto* scal = app.add_subcommand("scaling", "build and solve time against N with log-log slopes");
  auto* spd = app.add_subcommand("speedup", "serial baseline against each thread count");
  auto* cal = app.add_subcommand("calibrate", "time representative actions at the deepest level count");
  auto* once = app.add_subcommand("solve-once", "build or load operators, solve once, write u");
  auto* tree = app.add_subcommand("tree", "dump the box tree at the deepest level count");

  CLI11_PARSE(app, argc, argv);

  try {
    parse_levels(levels, cfg);
    parse_plan(plan, cfg);
    if (!std::isnan(eta_re)) cfg.eta = hps::cplx(eta_re, eta_im);
    else if (eta_im != 0.0) cfg.eta = hps::cplx(cfg.kappa, eta_im);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.validate();
    const std::string hash = cfg.hash();
    std::cerr << "config " << hash << " " << cfg.to_json() << "\n";
    hps::enable_nested_parallelism();

    if (*conv) {
      const auto rows = hps::run_convergence(cfg, &std::cerr);
      emit(cfg, [&](std::ostream& os) { hps::write_convergence_csv(os, hash, rows); });
      write_gnuplot(gnuplot, "convergence", cfg);
    } else if (*scal) {
      const auto rep = hps::run_scaling(cfg, &std::cerr);
      emit(cfg, [&](std::ostream& os) { hps::write_scaling_csv(os, hash, cfg.n_c.front(), rep); });
      write_gnuplot(gnuplot, "scaling", cfg);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << "build slope " << rep.build_slope << ", solve slope " << rep.solve_slope << "\n";
      std::cerr << "build seconds per box, leaves to root:";
      for (double t : rep.per_box_build) std::cerr << " " << t;
      std::cerr << (rep.per_box_build_grows_toward_root ? " (grows toward the root)\n" : "\n");
    } else if (*spd) {
      const auto rep = hps::run_speedup(cfg, &std::cerr);
      emit(cfg, [&](std::ostream& os) { hps::write_speedup_csv(os, hash, rep); });
      write_gnuplot(gnuplot, "speedup", cfg);
      std::cerr << "largest e_inf gap to serial " << rep.max_e_inf_gap << "\n";
    } else if (*cal) {
      const auto t = hps::BoxTree::build_uniform(hps::Rect{}, cfg.level_max, cfg.n_c.front());
      hps::CalibrationOptions opts;
      opts.max_threads = cfg.threads;
      opts.seed = cfg.seed;
      const auto table = hps::calibrate(t, opts);
      emit(cfg, [&](std::ostream& os) {
        os << "# " << cfg.to_json() << "\n";
        table.write(os);
      });
      std::cerr << hps::make_plan(table, t, cfg.threads).describe();
    } else if (*once) {
      const auto rep = hps::solve_once(cfg, hps::make_problem(cfg));
      std::cerr << "N=" << rep.n << (rep.loaded_checkpoint ? " loaded checkpoint" : " built")
                << " build=" << rep.build_s << "s solve=" << rep.solve_s << "s";
      if (rep.e_inf) std::cerr << " e_inf=" << *rep.e_inf;
      std::cerr << "\n";
    } else if (*tree) {
      const auto t = hps::BoxTree::build_uniform(hps::Rect{}, cfg.level_max, cfg.n_c.front());
      emit(cfg, [&](std::ostream& os) { os << t.describe(); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
