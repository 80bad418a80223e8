#pragma once

// Leaf discretization on one corner-free Chebyshev tensor grid and the leaf
// solution operators derived from it.

#include <array>
#include <vector>

#include "hps/chebyshev.hpp"
#include "hps/cmatrix.hpp"
#include "hps/geometry.hpp"
#include "hps/problem.hpp"

namespace hps {

struct LeafDiscretization {
  int n_c = 0;
  Rect rect;
  cplx eta;
  LeafIndexSets sets;
  /// Coordinates in local order [I_b, I_i].
  std::vector<std::array<double, 2>> points;
  /// Full-grid (n_c² x n_c²) derivative matrices, tensor index ix + n_c*iy.
  CMatrix dx, dy;
  /// -Dx² - Dy² - diag(κ² c) on the full grid.
  CMatrix a_hat;
  /// n_b x n^τ: outward normal derivative, and F = N + iηI, G = N - iηI.
  CMatrix normal, f, g;
  /// n^τ x n^τ: [F; A(I_i, I^τ)].
  CMatrix b;

  Index n_boundary() const noexcept { return sets.n_boundary(); }
  Index n_interior() const noexcept { return sets.n_interior(); }
  Index n_total() const noexcept { return sets.n_total(); }

  /// A(I_i, I^τ): the collocation rows of the interior points.
  CMatrix interior_rows() const;
};

LeafDiscretization build_leaf_discretization(const Rect& rect, const ProblemSpec& spec, int n_c);

struct LeafOperators {
  CMatrix r;      // n_b x n_b   ItI operator (released once merged)
  CMatrix psi;    // n^τ x n_b   homogeneous solution operator
  CMatrix y;      // n^τ x n_i   particular solution operator
  CMatrix gamma;  // n_b x n_i   outgoing impedance of the particular solution

  std::size_t bytes() const noexcept { return r.bytes() + psi.bytes() + y.bytes() + gamma.bytes(); }
};

/// One inversion of B gives both Ψ (first n_b columns) and Y (the rest).
/// Throws SingularMatrixError when B is singular.
LeafOperators build_leaf_operators(const LeafDiscretization& disc, int workers = 1);

}  // namespace hps
