#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hps {

using cplx = std::complex<double>;
using Index = std::ptrdiff_t;
using CVector = std::vector<cplx>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by LU factorization when a pivot is numerically zero.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, Index pivot, double pivot_magnitude)
      : std::runtime_error(what), pivot_(pivot), pivot_magnitude_(pivot_magnitude) {}

  Index pivot() const noexcept { return pivot_; }
  double pivot_magnitude() const noexcept { return pivot_magnitude_; }

 private:
  Index pivot_;
  double pivot_magnitude_;
};

/// Dense complex matrix in column-major storage.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(Index rows, Index cols);

  static CMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index ld() const noexcept { return rows_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t bytes() const noexcept { return data_.size() * sizeof(cplx); }

  cplx& operator()(Index i, Index j) noexcept { return data_[static_cast<std::size_t>(i + j * rows_)]; }
  const cplx& operator()(Index i, Index j) const noexcept {
    return data_[static_cast<std::size_t>(i + j * rows_)];
  }

  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }

  std::span<cplx> col(Index j) noexcept { return {data() + j * rows_, static_cast<std::size_t>(rows_)}; }
  std::span<const cplx> col(Index j) const noexcept {
    return {data() + j * rows_, static_cast<std::size_t>(rows_)};
  }

  void set_zero() noexcept;
  /// Frees the storage; the matrix becomes 0x0.
  void release() noexcept;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<cplx> data_;
};

// Block and index helpers. Index vectors are 0-based.

CMatrix submatrix(const CMatrix& a, std::span<const Index> rows, std::span<const Index> cols);
CMatrix block(const CMatrix& a, Index row0, Index col0, Index nrows, Index ncols);
void set_block(CMatrix& dst, Index row0, Index col0, const CMatrix& src);
CMatrix hstack(const CMatrix& left, const CMatrix& right);
CMatrix vstack(const CMatrix& top, const CMatrix& bottom);
CMatrix from_column(std::span<const cplx> x);

CVector gather(std::span<const cplx> x, std::span<const Index> idx);
void scatter(std::span<cplx> dst, std::span<const Index> idx, std::span<const cplx> src);

double norm_max(const CMatrix& a) noexcept;
double norm_max(std::span<const cplx> x) noexcept;
double norm_one(const CMatrix& a) noexcept;
double max_abs_diff(const CMatrix& a, const CMatrix& b);
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);
bool all_finite(std::span<const cplx> x) noexcept;
inline bool all_finite(const CMatrix& a) noexcept { return all_finite({a.data(), a.size()}); }

CMatrix operator-(const CMatrix& a, const CMatrix& b);
CMatrix operator+(const CMatrix& a, const CMatrix& b);

}  // namespace hps
