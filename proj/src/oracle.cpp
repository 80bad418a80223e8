// Dense reference solutions used to check the hierarchical solver.

#include <map>
#include <stdexcept>

#include "hps/linalg.hpp"
#include "hps/solver.hpp"

namespace hps {

namespace {

using PointKey = std::pair<double, double>;

bool inside(const Rect& inner, const Rect& outer) {
  return inner.xmin >= outer.xmin && inner.xmax <= outer.xmax && inner.ymin >= outer.ymin && inner.ymax <= outer.ymax;
}

bool on_edge(double x, double y, const Rect& r) {
  return x == r.xmin || x == r.xmax || y == r.ymin || y == r.ymax;
}

// Coupled collocation system for all leaves inside one box. Unknowns are the
// leaves' local values stacked in leaf id order; rows are laid out the same
// way. Rows for points on the box boundary are impedance rows F u = f whose
// right-hand side the caller supplies.
struct CoupledSystem {
  std::vector<int> leaf_ids;
  std::vector<LeafDiscretization> discs;
  std::vector<Index> offset;
  CMatrix a;
  // (row, position in the box boundary order) for every box-boundary row.
  std::vector<std::pair<Index, Index>> exterior_rows;
  // (leaf slot, local index) of every box-boundary point, by boundary position.
  std::vector<std::pair<std::size_t, Index>> exterior_owner;
  // Interior collocation rows: (row, leaf slot, interior k).
  std::vector<std::tuple<Index, std::size_t, Index>> interior_rows;
};

CoupledSystem assemble(const ProblemSpec& spec, const BoxTree& tree, int box_id) {
  const Rect& box = tree.node(box_id).rect;
  CoupledSystem sys;
  for (const auto& nd : tree.nodes())
    if (nd.is_leaf() && inside(nd.rect, box)) sys.leaf_ids.push_back(nd.id);
  const int n_c = tree.n_c();
  const auto& ls = tree.leaf_sets();
  const Index nt = ls.n_total(), nb = ls.n_boundary(), ni = ls.n_interior();
  Index total = 0;
  for (int id : sys.leaf_ids) {
    sys.discs.push_back(build_leaf_discretization(tree.node(id).rect, spec, n_c));
    sys.offset.push_back(total);
    total += nt;
  }
  if (total > 20000) throw std::invalid_argument("dense oracle: system too large");

  std::map<PointKey, std::vector<std::pair<std::size_t, Index>>> owners;
  for (std::size_t s = 0; s < sys.leaf_ids.size(); ++s)
    for (Index k = 0; k < nb; ++k) {
      const auto& p = sys.discs[s].points[static_cast<std::size_t>(k)];
      owners[{p[0], p[1]}].push_back({s, k});
    }
  std::map<PointKey, Index> box_pos;
  const auto bpts = tree.boundary(box_id);
  for (std::size_t k = 0; k < bpts.size(); ++k) box_pos[{bpts[k].x, bpts[k].y}] = static_cast<Index>(k);
  sys.exterior_owner.resize(bpts.size());

  sys.a = CMatrix(total, total);
  for (std::size_t s = 0; s < sys.leaf_ids.size(); ++s) {
    const LeafDiscretization& d = sys.discs[s];
    const Index off = sys.offset[s];
    for (Index k = 0; k < nb; ++k) {
      const Index row = off + k;
      for (Index c = 0; c < nt; ++c) sys.a(row, off + c) = d.f(k, c);
      const auto& p = d.points[static_cast<std::size_t>(k)];
      if (on_edge(p[0], p[1], box)) {
        const Index pos = box_pos.at({p[0], p[1]});
        sys.exterior_rows.push_back({row, pos});
        sys.exterior_owner[static_cast<std::size_t>(pos)] = {s, k};
        continue;
      }
      // Shared edge: incoming impedance here equals minus the neighbour's outgoing one.
      const auto& own = owners.at({p[0], p[1]});
      if (own.size() != 2) throw std::logic_error("dense oracle: interface point without a unique neighbour");
      const auto [ns, nk] = own[0].first == s ? own[1] : own[0];
      const LeafDiscretization& dn = sys.discs[ns];
      for (Index c = 0; c < nt; ++c) sys.a(row, sys.offset[ns] + c) += dn.g(nk, c);
    }
    const CMatrix ai = d.interior_rows();
    for (Index k = 0; k < ni; ++k) {
      const Index row = off + nb + k;
      for (Index c = 0; c < nt; ++c) sys.a(row, off + c) = ai(k, c);
      sys.interior_rows.push_back({row, s, k});
    }
  }
  return sys;
}

}  // namespace

Solution global_direct_oracle(const ProblemSpec& spec, int levels, int n_c) {
  spec.validate();
  const BoxTree tree = BoxTree::build_uniform(spec.domain, levels, n_c);
  const CoupledSystem sys = assemble(spec, tree, 1);
  const Index nb = tree.leaf_sets().n_boundary();

  CVector rhs(static_cast<std::size_t>(sys.a.rows()), cplx(0.0, 0.0));
  const auto bpts = tree.boundary(1);
  if (spec.boundary_data)
    for (const auto& [row, pos] : sys.exterior_rows) {
      const auto& p = bpts[static_cast<std::size_t>(pos)];
      const auto nrm = outward_normal(p.side);
      rhs[static_cast<std::size_t>(row)] = spec.boundary_data(p.x, p.y, nrm[0], nrm[1]);
    }
  if (spec.body_load)
    for (const auto& [row, s, k] : sys.interior_rows) {
      const auto& p = sys.discs[s].points[static_cast<std::size_t>(nb + k)];
      rhs[static_cast<std::size_t>(row)] = spec.body_load(p[0], p[1]);
    }
  const CVector x = lu_factor(sys.a).solve(rhs);

  Solution sol;
  sol.u.assign(static_cast<std::size_t>(tree.n_points()), cplx(0.0, 0.0));
  for (std::size_t s = 0; s < sys.leaf_ids.size(); ++s) {
    const auto glob = tree.leaf_global_indices(sys.leaf_ids[s]);
    const auto own = tree.leaf_ownership(sys.leaf_ids[s]);
    for (std::size_t q = 0; q < glob.size(); ++q)
      if (own[q]) sol.u[static_cast<std::size_t>(glob[q])] = x[static_cast<std::size_t>(sys.offset[s]) + q];
  }
  if (spec.exact) sol.e_inf = max_error(tree, sol.u, spec.exact);
  return sol;
}

CMatrix oracle_iti(const ProblemSpec& spec, const BoxTree& tree, int box_id) {
  const CoupledSystem sys = assemble(spec, tree, box_id);
  const Index n_ext = static_cast<Index>(sys.exterior_owner.size());
  const Index nt = tree.leaf_sets().n_total();
  const LUFactorization lu = lu_factor(sys.a);
  std::vector<Index> row_of_pos(static_cast<std::size_t>(n_ext));
  for (const auto& [row, pos] : sys.exterior_rows) row_of_pos[static_cast<std::size_t>(pos)] = row;

  CMatrix r(n_ext, n_ext);
  CVector rhs(static_cast<std::size_t>(sys.a.rows()));
  for (Index j = 0; j < n_ext; ++j) {
    std::fill(rhs.begin(), rhs.end(), cplx(0.0, 0.0));
    rhs[static_cast<std::size_t>(row_of_pos[static_cast<std::size_t>(j)])] = 1.0;
    const CVector x = lu.solve(rhs);
    for (Index i = 0; i < n_ext; ++i) {
      const auto [s, k] = sys.exterior_owner[static_cast<std::size_t>(i)];
      const LeafDiscretization& d = sys.discs[s];
      cplx g = 0.0;
      for (Index c = 0; c < nt; ++c) g += d.g(k, c) * x[static_cast<std::size_t>(sys.offset[s] + c)];
      r(i, j) = g;
    }
  }
  return r;
}

ResidualReport residual_check(const BoxTree& tree, const CVector& u, const ProblemSpec& spec,
                              const std::vector<int>& sample_leaves) {
  if (static_cast<Index>(u.size()) != tree.n_points()) throw DimensionError("residual_check: length mismatch");
  std::vector<int> ids = sample_leaves;
  if (ids.empty())
    for (const auto& nd : tree.nodes())
      if (nd.is_leaf()) ids.push_back(nd.id);
  const Index nb = tree.leaf_sets().n_boundary();
  double res = 0.0, a_norm = 0.0, u_norm = norm_max(u), s_norm = 0.0;
  for (int id : ids) {
    const LeafDiscretization d = build_leaf_discretization(tree.node(id).rect, spec, tree.n_c());
    const CMatrix ai = d.interior_rows();
    const CVector ul = gather(u, tree.leaf_global_indices(id));
    CVector r = matvec(ai, ul);
    for (Index k = 0; k < ai.rows(); ++k) {
      double row = 0.0;
      for (Index c = 0; c < ai.cols(); ++c) row += std::abs(ai(k, c));
      a_norm = std::max(a_norm, row);
      if (spec.body_load) {
        const auto& p = d.points[static_cast<std::size_t>(nb + k)];
        const cplx s = spec.body_load(p[0], p[1]);
        s_norm = std::max(s_norm, std::abs(s));
        r[static_cast<std::size_t>(k)] -= s;
      }
    }
    res = std::max(res, norm_max(r));
  }
  ResidualReport rep;
  rep.max_abs = res;
  const double denom = a_norm * u_norm + s_norm;
  rep.scaled = denom > 0.0 ? res / denom : 0.0;
  return rep;
}

}  // namespace hps
