#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace stochif {

using Complex = std::complex<double>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  Scalar value;
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
/// Complex systems use native std::complex<double> entries.
template <typename Scalar>
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Duplicates are summed.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet<Scalar>> triplets);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<std::uint32_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::uint32_t>& col_indices() const { return col_indices_; }
  const std::vector<Scalar>& values() const { return values_; }

  void multiply(std::span<const Scalar> x, std::span<Scalar> y) const;
  std::vector<Scalar> operator*(std::span<const Scalar> x) const;
  std::vector<Scalar> diagonal() const;
  double max_abs() const;
  bool is_structurally_symmetric() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint32_t> row_offsets_{0};
  std::vector<std::uint32_t> col_indices_;
  std::vector<Scalar> values_;
};

struct CgOptions {
  double tolerance = 1e-10;
  int max_iterations = 20000;
  bool jacobi = true;
  /// Called with (iteration, iterate) after every update.
  std::function<void(int, std::span<const double>)> monitor;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for SPD systems, started from zero.
/// Stops once |Ax - b| / |b| <= tolerance; throws SolverError otherwise.
CgResult cg_solve(const CsrMatrix<double>& a, std::span<const double> b, const CgOptions& options = {});

/// Sparse LU with column fill-reducing ordering and partial pivoting.
/// Construction factorizes; solve() is const and may be called concurrently.
template <typename Scalar>
class SparseLu {
 public:
  explicit SparseLu(const CsrMatrix<Scalar>& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  std::vector<Scalar> solve(std::span<const Scalar> b) const;
  /// Smallest pivot magnitude of U.
  double min_pivot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Factorize and solve once. Throws SolverError("singular") when a pivot falls
/// below 1e-14 * max |a_ij|.
template <typename Scalar>
std::vector<Scalar> lu_solve(const CsrMatrix<Scalar>& a, std::span<const Scalar> b);

void write_matrix_market(const CsrMatrix<double>& a, std::ostream& out);
void write_matrix_market(const CsrMatrix<Complex>& a, std::ostream& out);

template <typename Scalar>
double relative_residual(const CsrMatrix<Scalar>& a, std::span<const Scalar> x,
                         std::span<const Scalar> b);

extern template class CsrMatrix<double>;
extern template class CsrMatrix<Complex>;
extern template class SparseLu<double>;
extern template class SparseLu<Complex>;

}  // namespace stochif
