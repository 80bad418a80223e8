#include "hps/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hps {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

CMatrix::CMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, "CMatrix: negative dimension");
  data_.assign(static_cast<std::size_t>(rows * cols), cplx{});
}

CMatrix CMatrix::identity(Index n) {
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void CMatrix::set_zero() noexcept { std::fill(data_.begin(), data_.end(), cplx{}); }

void CMatrix::release() noexcept {
  std::vector<cplx>().swap(data_);
  rows_ = 0;
  cols_ = 0;
}

CMatrix submatrix(const CMatrix& a, std::span<const Index> rows, std::span<const Index> cols) {
  CMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const Index cj = cols[j];
    require(cj >= 0 && cj < a.cols(), "submatrix: column index out of range");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Index ri = rows[i];
      require(ri >= 0 && ri < a.rows(), "submatrix: row index out of range");
      out(static_cast<Index>(i), static_cast<Index>(j)) = a(ri, cj);
    }
  }
  return out;
}

CMatrix block(const CMatrix& a, Index row0, Index col0, Index nrows, Index ncols) {
  require(row0 >= 0 && col0 >= 0 && row0 + nrows <= a.rows() && col0 + ncols <= a.cols(),
          "block: range out of bounds");
  CMatrix out(nrows, ncols);
  for (Index j = 0; j < ncols; ++j)
    std::copy_n(a.data() + row0 + (col0 + j) * a.ld(), nrows, out.data() + j * nrows);
  return out;
}

void set_block(CMatrix& dst, Index row0, Index col0, const CMatrix& src) {
  require(row0 >= 0 && col0 >= 0 && row0 + src.rows() <= dst.rows() && col0 + src.cols() <= dst.cols(),
          "set_block: range out of bounds");
  for (Index j = 0; j < src.cols(); ++j)
    std::copy_n(src.data() + j * src.ld(), src.rows(), dst.data() + row0 + (col0 + j) * dst.ld());
}

CMatrix hstack(const CMatrix& left, const CMatrix& right) {
  require(left.rows() == right.rows(), "hstack: row count mismatch");
  CMatrix out(left.rows(), left.cols() + right.cols());
  set_block(out, 0, 0, left);
  set_block(out, 0, left.cols(), right);
  return out;
}

CMatrix vstack(const CMatrix& top, const CMatrix& bottom) {
  require(top.cols() == bottom.cols(), "vstack: column count mismatch");
  CMatrix out(top.rows() + bottom.rows(), top.cols());
  set_block(out, 0, 0, top);
  set_block(out, top.rows(), 0, bottom);
  return out;
}

CMatrix from_column(std::span<const cplx> x) {
  CMatrix out(static_cast<Index>(x.size()), 1);
  std::copy(x.begin(), x.end(), out.data());
  return out;
}

CVector gather(std::span<const cplx> x, std::span<const Index> idx) {
  CVector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < x.size(), "gather: index out of range");
    out[i] = x[static_cast<std::size_t>(idx[i])];
  }
  return out;
}

void scatter(std::span<cplx> dst, std::span<const Index> idx, std::span<const cplx> src) {
  require(idx.size() == src.size(), "scatter: length mismatch");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < dst.size(), "scatter: index out of range");
    dst[static_cast<std::size_t>(idx[i])] = src[i];
  }
}

double norm_max(std::span<const cplx> x) noexcept {
  double m = 0.0;
  for (const cplx& v : x) m = std::max(m, std::abs(v));
  return m;
}

double norm_max(const CMatrix& a) noexcept { return norm_max(std::span<const cplx>(a.data(), a.size())); }

double norm_one(const CMatrix& a) noexcept {
  double best = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (const cplx& v : a.col(j)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  require(a.size() == b.size(), "max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: shape mismatch");
  return max_abs_diff(std::span<const cplx>(a.data(), a.size()), std::span<const cplx>(b.data(), b.size()));
}

bool all_finite(std::span<const cplx> x) noexcept {
  return std::all_of(x.begin(), x.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

CMatrix operator-(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "operator-: shape mismatch");
  CMatrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = a.data()[k] - b.data()[k];
  return out;
}

CMatrix operator+(const CMatrix& a, const CMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+: shape mismatch");
  CMatrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = a.data()[k] + b.data()[k];
  return out;
}

}  // namespace hps
