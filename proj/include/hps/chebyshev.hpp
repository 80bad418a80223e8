#pragma once

#include <vector>

namespace hps {

/// Chebyshev extreme points (Gauss-Lobatto) mapped to [a, b], ascending.
/// The first and last nodes are exactly a and b.
struct ChebGrid1D {
  double a = -1.0;
  double b = 1.0;
  std::vector<double> nodes;

  int size() const noexcept { return static_cast<int>(nodes.size()); }
};

/// Dense real n x n matrix, row-major.
struct DiffMatrix {
  int n = 0;
  std::vector<double> entries;

  double operator()(int i, int j) const noexcept { return entries[static_cast<std::size_t>(i * n + j)]; }
  double& operator()(int i, int j) noexcept { return entries[static_cast<std::size_t>(i * n + j)]; }

  /// Matrix product with itself, this * this.
  DiffMatrix squared() const;
  std::vector<double> apply(const std::vector<double>& v) const;
};

ChebGrid1D cheb_nodes(int n_c, double a, double b);

/// First-derivative spectral differentiation matrix on the grid: exact on
/// samples of polynomials of degree < n_c (up to roundoff).
DiffMatrix cheb_diff(const ChebGrid1D& grid);

}  // namespace hps
