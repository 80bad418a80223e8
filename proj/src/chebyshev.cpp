#include "hps/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hps {

ChebGrid1D cheb_nodes(int n_c, double a, double b) {
  if (n_c < 2) throw std::invalid_argument("cheb_nodes: need at least 2 points");
  if (!(b > a)) throw std::invalid_argument("cheb_nodes: empty interval");
  ChebGrid1D g{a, b, std::vector<double>(static_cast<std::size_t>(n_c))};
  const int m = n_c - 1;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int k = 0; k < n_c; ++k) {
    // sin form keeps the canonical nodes exactly antisymmetric about 0.
    const double s = std::sin(std::numbers::pi * static_cast<double>(2 * k - m) / static_cast<double>(2 * m));
    g.nodes[static_cast<std::size_t>(k)] = mid + half * s;
  }
  g.nodes.front() = a;
  g.nodes.back() = b;
  return g;
}

DiffMatrix cheb_diff(const ChebGrid1D& grid) {
  const int n = grid.size();
  if (n < 2) throw std::invalid_argument("cheb_diff: need at least 2 points");
  // Barycentric weights of the Chebyshev-Lobatto points.
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) w[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);

  DiffMatrix d{n, std::vector<double>(static_cast<std::size_t>(n * n), 0.0)};
  const auto& x = grid.nodes;
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = (w[j] / w[i]) / (x[i] - x[j]);
      d(i, j) = v;
      diag -= v;
    }
    d(i, i) = diag;
  }
  return d;
}

DiffMatrix DiffMatrix::squared() const {
  DiffMatrix out{n, std::vector<double>(entries.size(), 0.0)};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double a = (*this)(i, k);
      for (int j = 0; j < n; ++j) out(i, j) += a * (*this)(k, j);
    }
  return out;
}

std::vector<double> DiffMatrix::apply(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != n) throw std::invalid_argument("DiffMatrix::apply: length mismatch");
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

}  // namespace hps
