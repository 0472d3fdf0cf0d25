#include "stochif/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace stochif {

template <typename Scalar>
CsrMatrix<Scalar> CsrMatrix<Scalar>::from_triplets(std::size_t rows, std::size_t cols,
                                                   std::vector<Triplet<Scalar>> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::invalid_argument("triplet index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_offsets_.assign(rows + 1, 0);
  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const auto row = triplets[i].row;
    const auto col = triplets[i].col;
    Scalar sum{};
    for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i)
      sum += triplets[i].value;
    m.col_indices_.push_back(col);
    m.values_.push_back(sum);
    ++m.row_offsets_[row + 1];
  }
  std::partial_sum(m.row_offsets_.begin(), m.row_offsets_.end(), m.row_offsets_.begin());
  return m;
}

template <typename Scalar>
void CsrMatrix<Scalar>::multiply(std::span<const Scalar> x, std::span<Scalar> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("dimension mismatch in matvec");
  for (std::size_t i = 0; i < rows_; ++i) {
    Scalar s{};
    for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[col_indices_[k]];
    y[i] = s;
  }
}

template <typename Scalar>
std::vector<Scalar> CsrMatrix<Scalar>::operator*(std::span<const Scalar> x) const {
  std::vector<Scalar> y(rows_);
  multiply(x, y);
  return y;
}

template <typename Scalar>
std::vector<Scalar> CsrMatrix<Scalar>::diagonal() const {
  std::vector<Scalar> d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] == i) d[i] = values_[k];
    }
  }
  return d;
}

template <typename Scalar>
double CsrMatrix<Scalar>::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

template <typename Scalar>
bool CsrMatrix<Scalar>::is_structurally_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (auto k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const auto j = col_indices_[k];
      const auto begin = col_indices_.begin() + row_offsets_[j];
      const auto end = col_indices_.begin() + row_offsets_[j + 1];
      if (!std::binary_search(begin, end, static_cast<std::uint32_t>(i))) return false;
    }
  }
  return true;
}

template <typename Scalar>
double relative_residual(const CsrMatrix<Scalar>& a, std::span<const Scalar> x,
                         std::span<const Scalar> b) {
  const auto ax = a * x;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    num += std::norm(ax[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

CgResult cg_solve(const CsrMatrix<double>& a, std::span<const double> b, const CgOptions& options) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("cg_solve: dimension mismatch");

  std::vector<double> inv_diag(n, 1.0);
  if (options.jacobi) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(d[i] > 0.0)) throw SolverError("cg_solve: non-positive diagonal, matrix is not SPD");
      inv_diag[i] = 1.0 / d[i];
    }
  }

  CgResult result;
  result.x.assign(n, 0.0);
  const double b_norm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (b_norm == 0.0) return result;

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  double r_norm = b_norm;

  for (int it = 1; it <= options.max_iterations; ++it) {
    a.multiply(p, ap);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (!(pap > 0.0)) throw SolverError("cg_solve: breakdown, matrix is not positive definite");
    const double alpha = rz / pap;
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr += r[i] * r[i];
    }
    r_norm = std::sqrt(rr);
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    if (options.monitor) options.monitor(it, result.x);
    if (result.relative_residual <= options.tolerance) return result;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError(fmt::format("cg_solve: not converged after {} iterations (residual {:.3e})",
                                options.max_iterations, result.relative_residual));
}

namespace {

// Exposes the U diagonal, which Eigen keeps inside the supernodal L storage.
template <typename Scalar>
class InspectableSparseLu
    : public Eigen::SparseLU<Eigen::SparseMatrix<Scalar, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> {
 public:
  double min_pivot() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < this->cols(); ++j) {
      double pivot = 0.0;
      for (typename decltype(this->m_Lstore)::InnerIterator it(this->m_Lstore, j); it; ++it) {
        if (it.index() == j) {
          pivot = std::abs(it.value());
          break;
        }
      }
      m = std::min(m, pivot);
    }
    return m;
  }
};

}  // namespace

template <typename Scalar>
struct SparseLu<Scalar>::Impl {
  InspectableSparseLu<Scalar> lu;
  double pivot = 0.0;
  std::size_t n = 0;
};

template <typename Scalar>
SparseLu<Scalar>::SparseLu(const CsrMatrix<Scalar>& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu: matrix must be square");
  impl_->n = a.rows();
  std::vector<Eigen::Triplet<Scalar, int>> entries;
  entries.reserve(a.nonzeros());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (auto k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      entries.emplace_back(static_cast<int>(i), static_cast<int>(a.col_indices()[k]), a.values()[k]);
  }
  Eigen::SparseMatrix<Scalar, Eigen::ColMajor> m(static_cast<Eigen::Index>(a.rows()),
                                                  static_cast<Eigen::Index>(a.cols()));
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();

  impl_->lu.analyzePattern(m);
  impl_->lu.factorize(m);
  const double threshold = 1e-14 * a.max_abs();
  if (impl_->lu.info() != Eigen::Success) throw SolverError("lu: singular matrix");
  impl_->pivot = impl_->lu.min_pivot();
  if (!(impl_->pivot > threshold))
    throw SolverError(fmt::format("lu: singular matrix (pivot {:.3e})", impl_->pivot));
}

template <typename Scalar>
SparseLu<Scalar>::~SparseLu() = default;
template <typename Scalar>
SparseLu<Scalar>::SparseLu(SparseLu&&) noexcept = default;
template <typename Scalar>
SparseLu<Scalar>& SparseLu<Scalar>::operator=(SparseLu&&) noexcept = default;

template <typename Scalar>
std::vector<Scalar> SparseLu<Scalar>::solve(std::span<const Scalar> b) const {
  if (b.size() != impl_->n) throw std::invalid_argument("lu: right-hand side has wrong size");
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = impl_->lu.solve(rhs);
  return std::vector<Scalar>(x.data(), x.data() + x.size());
}

template <typename Scalar>
double SparseLu<Scalar>::min_pivot() const {
  return impl_->pivot;
}

template <typename Scalar>
std::vector<Scalar> lu_solve(const CsrMatrix<Scalar>& a, std::span<const Scalar> b) {
  return SparseLu<Scalar>(a).solve(b);
}

namespace {

template <typename Scalar>
void write_mm(const CsrMatrix<Scalar>& a, std::ostream& out, bool complex) {
  fmt::print(out, "%%MatrixMarket matrix coordinate {} general\n", complex ? "complex" : "real");
  fmt::print(out, "{} {} {}\n", a.rows(), a.cols(), a.nonzeros());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (auto k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      const auto& v = a.values()[k];
      if constexpr (std::is_same_v<Scalar, Complex>) {
        fmt::print(out, "{} {} {:.17g} {:.17g}\n", i + 1, a.col_indices()[k] + 1, v.real(), v.imag());
      } else {
        fmt::print(out, "{} {} {:.17g}\n", i + 1, a.col_indices()[k] + 1, v);
      }
    }
  }
}

}  // namespace

void write_matrix_market(const CsrMatrix<double>& a, std::ostream& out) { write_mm(a, out, false); }
void write_matrix_market(const CsrMatrix<Complex>& a, std::ostream& out) { write_mm(a, out, true); }

template class CsrMatrix<double>;
template class CsrMatrix<Complex>;
template class SparseLu<double>;
template class SparseLu<Complex>;
template std::vector<double> lu_solve(const CsrMatrix<double>&, std::span<const double>);
template std::vector<Complex> lu_solve(const CsrMatrix<Complex>&, std::span<const Complex>);
template double relative_residual(const CsrMatrix<double>&, std::span<const double>, std::span<const double>);
template double relative_residual(const CsrMatrix<Complex>&, std::span<const Complex>, std::span<const Complex>);

}  // namespace stochif
