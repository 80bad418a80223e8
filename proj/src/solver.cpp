#include "hps/solver.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "hps/linalg.hpp"
#include "hps/parallel.hpp"

namespace hps {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Runs body(id, inner) for every box on `level` with the plan's split and
// returns the timing row.
template <class Body>
LevelTiming run_level(Stage stage, int level, const LevelThreads& lt, Body&& body) {
  const int first = BoxTree::first_on_level(level);
  const int count = BoxTree::boxes_on_level(level);
  const auto t0 = clock_type::now();
  parallel_chunks_checked(lt.outer, count, [&](Index k) { body(first + static_cast<int>(k), lt.inner); });
  return {stage, level, count, lt.outer, lt.inner, seconds_since(t0)};
}

void check_plan(const ThreadPlan& plan, int levels) {
  if (plan.levels() != levels)
    throw std::invalid_argument("thread plan has " + std::to_string(plan.levels()) + " levels, tree has " +
                                std::to_string(levels));
  plan.validate();
}

}  // namespace

void write_level_timings_csv(std::ostream& os, const std::vector<LevelTiming>& rows) {
  os << "stage,level,boxes,theta_o,theta_i,seconds\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g", r.seconds);
    os << to_string(r.stage) << ',' << r.level << ',' << r.boxes << ',' << r.outer << ',' << r.inner << ',' << buf
       << '\n';
  }
}

SolverState SolverState::build(const ProblemSpec& spec, int levels, int n_c, const ThreadPlan& plan) {
  spec.validate();
  check_plan(plan, levels);
  SolverState st;
  st.tree_ = std::make_shared<const BoxTree>(BoxTree::build_uniform(spec.domain, levels, n_c));
  st.kappa_ = spec.kappa;
  st.eta_ = spec.eta;
  st.plan_ = plan;
  const BoxTree& tree = *st.tree_;
  st.coefficient_fp_ = hps::coefficient_fingerprint(tree, spec);
  st.leaves_.resize(static_cast<std::size_t>(tree.n_boxes()));
  st.merges_.resize(static_cast<std::size_t>(tree.n_boxes()));

  const int leaf_level = tree.leaf_level();
  st.build_timings_.push_back(run_level(Stage::build, leaf_level, plan.at(Stage::build, leaf_level),
                                        [&](int id, int inner) {
                                          const auto disc = build_leaf_discretization(tree.node(id).rect, spec, n_c);
                                          st.leaves_[id - 1] = build_leaf_operators(disc, inner);
                                        }));

  // Taking a child's R leaves it empty, which is the deletion step.
  auto take_r = [&](int id) -> CMatrix {
    if (tree.node(id).is_leaf()) return std::move(st.leaves_[id - 1]->r);
    return std::move(st.merges_[id - 1]->r);
  };
  for (int level = leaf_level - 1; level >= 0; --level) {
    st.build_timings_.push_back(run_level(Stage::build, level, plan.at(Stage::build, level), [&](int id, int inner) {
      const auto [a, b] = *tree.node(id).children;
      st.merges_[id - 1] = merge(take_r(a), take_r(b), tree.sibling_sets(id), inner);
    }));
  }
  return st;
}

const LeafOperators& SolverState::leaf(int id) const {
  const auto& rec = leaves_.at(static_cast<std::size_t>(id - 1));
  if (!rec) throw std::invalid_argument("box " + std::to_string(id) + " has no leaf operators");
  return *rec;
}

const MergeOperators& SolverState::merged(int id) const {
  const auto& rec = merges_.at(static_cast<std::size_t>(id - 1));
  if (!rec) throw std::invalid_argument("box " + std::to_string(id) + " has no merge operators");
  return *rec;
}

const CMatrix& SolverState::root_r() const { return tree().node(1).is_leaf() ? leaf(1).r : merged(1).r; }

double SolverState::build_seconds() const noexcept {
  double s = 0.0;
  for (const auto& t : build_timings_) s += t.seconds;
  return s;
}

double SolverState::max_w_condition() const noexcept {
  double c = 0.0;
  for (const auto& m : merges_)
    if (m) c = std::max(c, m->w_condition);
  return c;
}

StorageReport SolverState::storage_report() const {
  StorageReport rep;
  for (int id = 1; id <= tree().n_boxes(); ++id) {
    const bool root = id == 1;
    if (const auto& l = leaves_[id - 1]) {
      ++rep.leaf_records;
      rep.bytes += l->bytes();
      if (root)
        rep.root_r_present = !l->r.empty();
      else if (!l->r.empty())
        ++rep.non_root_r_count;
      if (!root && l->r.empty() && !l->psi.empty() && !l->y.empty() && !l->gamma.empty()) ++rep.leaf_records_with_exact_set;
    }
    if (const auto& m = merges_[id - 1]) {
      ++rep.merge_records;
      rep.bytes += m->retained_bytes() + m->r.bytes();
      if (root)
        rep.root_r_present = !m->r.empty();
      else if (!m->r.empty())
        ++rep.non_root_r_count;
      const bool full_set = !m->phi_alpha.empty() && !m->phi_beta.empty() && !m->w_inv.empty() &&
                            !m->r33_alpha.empty() && !m->r33_beta.empty() && !m->r13_alpha.empty() &&
                            !m->r23_beta.empty();
      if (!root && full_set && m->r.empty()) ++rep.merge_records_with_exact_set;
    }
  }
  return rep;
}

std::uint64_t coefficient_fingerprint(const BoxTree& tree, const ProblemSpec& spec) {
  if (spec.kappa == 0.0) return 0;
  std::uint64_t h = 1469598103934665603ULL;
  const double k2 = spec.kappa * spec.kappa;
  for (const auto& p : tree.points()) {
    const auto bits = std::bit_cast<std::uint64_t>(k2 * spec.coefficient(p[0], p[1]));
    for (int b = 0; b < 64; b += 8) {
      h ^= (bits >> b) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

Solution solve(const SolverState& state, const ProblemSpec& spec, const ThreadPlan& plan) {
  const BoxTree& tree = state.tree();
  check_plan(plan, tree.levels());
  if (spec.kappa != state.kappa() || spec.eta != state.eta())
    throw std::invalid_argument("solve: problem kappa/eta differ from the built operators");
  const Rect& d = tree.domain();
  if (spec.domain.xmin != d.xmin || spec.domain.xmax != d.xmax || spec.domain.ymin != d.ymin ||
      spec.domain.ymax != d.ymax)
    throw std::invalid_argument("solve: problem domain differs from the built operators");
  if (coefficient_fingerprint(tree, spec) != state.coefficient_fingerprint())
    throw std::invalid_argument("solve: problem coefficient differs from the built operators");
  const int n_boxes = tree.n_boxes();
  const int leaf_level = tree.leaf_level();
  const auto& ls = tree.leaf_sets();
  const Index nb = ls.n_boundary();
  const bool has_load = !spec.homogeneous();

  // Sample the data before any timer starts.
  std::vector<CVector> load(static_cast<std::size_t>(n_boxes));
  if (has_load) {
    for (int id = BoxTree::first_on_level(leaf_level); id <= n_boxes; ++id) {
      const auto pts = leaf_points(tree.node(id).rect, tree.n_c());
      CVector s(static_cast<std::size_t>(ls.n_interior()));
      for (Index k = 0; k < ls.n_interior(); ++k) {
        const auto& p = pts[static_cast<std::size_t>(nb + k)];
        s[static_cast<std::size_t>(k)] = spec.body_load(p[0], p[1]);
      }
      load[id - 1] = std::move(s);
    }
  }
  std::vector<CVector> t(static_cast<std::size_t>(n_boxes));
  {
    const auto root_pts = tree.boundary(1);
    CVector t1(root_pts.size());
    if (spec.boundary_data)
      for (std::size_t k = 0; k < root_pts.size(); ++k) {
        const auto nrm = outward_normal(root_pts[k].side);
        t1[k] = spec.boundary_data(root_pts[k].x, root_pts[k].y, nrm[0], nrm[1]);
      }
    t[0] = std::move(t1);
  }

  Solution sol;
  std::vector<CVector> h(static_cast<std::size_t>(n_boxes));
  std::vector<CVector> u_part(static_cast<std::size_t>(n_boxes));
  std::vector<InterfaceCorrections> corr(static_cast<std::size_t>(n_boxes));

  if (has_load) {
    sol.timings.push_back(run_level(Stage::upward, leaf_level, plan.at(Stage::upward, leaf_level), [&](int id, int inner) {
      const LeafOperators& op = state.leaf(id);
      u_part[id - 1] = matvec(op.y, load[id - 1], inner);
      h[id - 1] = matvec(op.gamma, load[id - 1], inner);
      CVector().swap(load[id - 1]);
    }));
    for (int level = leaf_level - 1; level >= 0; --level) {
      sol.timings.push_back(run_level(Stage::upward, level, plan.at(Stage::upward, level), [&](int id, int inner) {
        const auto [a, b] = *tree.node(id).children;
        const auto& idx = tree.sibling_sets(id);
        const MergeOperators& m = state.merged(id);
        const CVector& ha = h[a - 1];
        const CVector& hb = h[b - 1];
        corr[id - 1] = apply_upsilon(m, gather(ha, idx.interface_alpha), gather(hb, idx.interface_beta), inner);
        if (id > 1) {
          CVector ht = apply_gamma_tau(m, corr[id - 1], inner);
          for (Index k = 0; k < m.n1; ++k) ht[k] += ha[idx.exterior_alpha[k]];
          for (Index k = 0; k < m.n2; ++k) ht[m.n1 + k] += hb[idx.exterior_beta[k]];
          h[id - 1] = std::move(ht);
        }
        CVector().swap(h[a - 1]);
        CVector().swap(h[b - 1]);
      }));
    }
  }
  for (const auto& r : sol.timings) sol.upward_seconds += r.seconds;

  const std::size_t n_up = sol.timings.size();
  for (int level = 0; level < leaf_level; ++level) {
    sol.timings.push_back(run_level(Stage::downward, level, plan.at(Stage::downward, level), [&](int id, int inner) {
      const auto [a, b] = *tree.node(id).children;
      const auto& idx = tree.sibling_sets(id);
      const MergeOperators& m = state.merged(id);
      const CVector& tt = t[id - 1];
      CVector ta3 = matvec(m.phi_alpha, tt, inner);
      CVector tb3 = matvec(m.phi_beta, tt, inner);
      if (has_load) {
        for (Index k = 0; k < m.n3; ++k) {
          ta3[k] += corr[id - 1].alpha[k];
          tb3[k] += corr[id - 1].beta[k];
        }
      }
      CVector ta(static_cast<std::size_t>(m.n1 + m.n3)), tb(static_cast<std::size_t>(m.n2 + m.n3));
      for (Index k = 0; k < m.n1; ++k) ta[idx.exterior_alpha[k]] = tt[k];
      for (Index k = 0; k < m.n2; ++k) tb[idx.exterior_beta[k]] = tt[m.n1 + k];
      scatter(ta, idx.interface_alpha, ta3);
      scatter(tb, idx.interface_beta, tb3);
      t[a - 1] = std::move(ta);
      t[b - 1] = std::move(tb);
      CVector().swap(t[id - 1]);
      corr[id - 1] = {};
    }));
  }

  sol.u.assign(static_cast<std::size_t>(tree.n_points()), cplx(0.0, 0.0));
  sol.timings.push_back(run_level(Stage::downward, leaf_level, plan.at(Stage::downward, leaf_level), [&](int id, int inner) {
    const LeafOperators& op = state.leaf(id);
    CVector ul = has_load ? std::move(u_part[id - 1]) : CVector(static_cast<std::size_t>(ls.n_total()));
    matvec_update(ul, 1.0, op.psi, t[id - 1], inner);
    const auto glob = tree.leaf_global_indices(id);
    const auto own = tree.leaf_ownership(id);
    for (std::size_t q = 0; q < ul.size(); ++q)
      if (own[q]) sol.u[static_cast<std::size_t>(glob[q])] = ul[q];
    CVector().swap(t[id - 1]);
  }));
  for (std::size_t k = n_up; k < sol.timings.size(); ++k) sol.downward_seconds += sol.timings[k].seconds;

  if (spec.exact) sol.e_inf = max_error(tree, sol.u, spec.exact);
  return sol;
}

double max_error(const BoxTree& tree, const CVector& u, const ComplexField& exact) {
  if (static_cast<Index>(u.size()) != tree.n_points()) throw DimensionError("max_error: length mismatch");
  double e = 0.0;
  const auto& pts = tree.points();
  for (std::size_t j = 0; j < u.size(); ++j) e = std::max(e, std::abs(exact(pts[j][0], pts[j][1]) - u[j]));
  return e;
}

}  // namespace hps
