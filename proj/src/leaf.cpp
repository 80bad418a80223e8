#include "hps/leaf.hpp"

#include "hps/linalg.hpp"

namespace hps {

CMatrix LeafDiscretization::interior_rows() const { return submatrix(a_hat, sets.interior, sets.all); }

LeafDiscretization build_leaf_discretization(const Rect& rect, const ProblemSpec& spec, int n_c) {
  if (!rect.valid()) throw std::invalid_argument("build_leaf_discretization: degenerate box");
  if (!spec.coefficient) throw std::invalid_argument("build_leaf_discretization: coefficient missing");

  LeafDiscretization d;
  d.n_c = n_c;
  d.rect = rect;
  d.eta = spec.eta;
  d.sets = leaf_index_sets(n_c);
  d.points = leaf_points(rect, n_c);

  const ChebGrid1D gx = cheb_nodes(n_c, rect.xmin, rect.xmax);
  const ChebGrid1D gy = cheb_nodes(n_c, rect.ymin, rect.ymax);
  const DiffMatrix d1x = cheb_diff(gx), d1y = cheb_diff(gy);
  const DiffMatrix d2x = d1x.squared(), d2y = d1y.squared();

  const Index n = n_c, nn = n * n;
  d.dx = CMatrix(nn, nn);
  d.dy = CMatrix(nn, nn);
  d.a_hat = CMatrix(nn, nn);
  const double k2 = spec.kappa * spec.kappa;
  for (Index iy = 0; iy < n; ++iy)
    for (Index ix = 0; ix < n; ++ix) {
      const Index row = ix + n * iy;
      for (Index j = 0; j < n; ++j) {
        d.dx(row, j + n * iy) = d1x(static_cast<int>(ix), static_cast<int>(j));
        d.dy(row, ix + n * j) = d1y(static_cast<int>(iy), static_cast<int>(j));
        d.a_hat(row, j + n * iy) -= d2x(static_cast<int>(ix), static_cast<int>(j));
        d.a_hat(row, ix + n * j) -= d2y(static_cast<int>(iy), static_cast<int>(j));
      }
      if (k2 != 0.0) d.a_hat(row, row) -= k2 * spec.coefficient(gx.nodes[ix], gy.nodes[iy]);
    }

  const Index nb = d.n_boundary(), nt = d.n_total();
  const auto& all = d.sets.all;
  d.normal = CMatrix(nb, nt);
  auto put_rows = [&](const std::vector<Index>& side, const CMatrix& deriv, double sign, Index offset) {
    for (std::size_t k = 0; k < side.size(); ++k)
      for (Index c = 0; c < nt; ++c) d.normal(offset + static_cast<Index>(k), c) = sign * deriv(side[k], all[c]);
  };
  const Index ne = n - 2;
  put_rows(d.sets.south, d.dy, -1.0, 0);
  put_rows(d.sets.east, d.dx, 1.0, ne);
  put_rows(d.sets.north, d.dy, 1.0, 2 * ne);
  put_rows(d.sets.west, d.dx, -1.0, 3 * ne);

  const cplx ieta = cplx(0.0, 1.0) * spec.eta;
  d.f = d.normal;
  d.g = d.normal;
  for (Index k = 0; k < nb; ++k) {
    d.f(k, k) += ieta;
    d.g(k, k) -= ieta;
  }
  d.b = vstack(d.f, d.interior_rows());
  return d;
}

LeafOperators build_leaf_operators(const LeafDiscretization& disc, int workers) {
  const Index nb = disc.n_boundary(), ni = disc.n_interior();
  const CMatrix b_inv = lu_invert(disc.b, workers);
  // G B^{-1} = [R | Γ].
  const CMatrix gb = gemm(disc.g, b_inv, workers);
  LeafOperators ops;
  ops.psi = block(b_inv, 0, 0, disc.n_total(), nb);
  ops.y = block(b_inv, 0, nb, disc.n_total(), ni);
  ops.r = block(gb, 0, 0, nb, nb);
  ops.gamma = block(gb, 0, nb, nb, ni);
  return ops;
}

}  // namespace hps
