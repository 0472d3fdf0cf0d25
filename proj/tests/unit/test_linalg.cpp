#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "stochif/linalg.hpp"
#include "stochif/random.hpp"

using namespace stochif;

namespace {

CsrMatrix<double> laplacian_1d(std::size_t n) {
  std::vector<Triplet<double>> t;
  for (std::uint32_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix<double>::from_triplets(n, n, std::move(t));
}

// B^T B + n I with B random sparse.
CsrMatrix<double> random_spd(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, 0);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng.uniform(i, j) < 0.1) b[i][j] = rng.uniform(i, n + j, -1.0, 1.0);
  std::vector<Triplet<double>> t;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      double v = i == j ? static_cast<double>(n) * 0.1 : 0.0;
      for (std::size_t k = 0; k < n; ++k) v += b[k][i] * b[k][j];
      if (v != 0.0) t.push_back({i, j, v});
    }
  }
  return CsrMatrix<double>::from_triplets(n, n, std::move(t));
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, 1);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(i, 0, -1.0, 1.0);
  return v;
}

}  // namespace

TEST(CsrMatrix, SumsDuplicatesAndSortsColumns) {
  const auto a = CsrMatrix<double>::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {1, 1, -1.0}});
  EXPECT_EQ(a.nonzeros(), 3u);
  EXPECT_EQ(a.col_indices()[0], 0u);
  EXPECT_EQ(a.col_indices()[1], 2u);
  EXPECT_EQ(a.values()[1], 4.0);
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto y = a * std::span<const double>(x);
  EXPECT_EQ(y[0], 14.0);
  EXPECT_EQ(y[1], -2.0);
  EXPECT_EQ(a.max_abs(), 4.0);
}

TEST(CsrMatrix, StructuralSymmetry) {
  EXPECT_TRUE(laplacian_1d(6).is_structurally_symmetric());
  EXPECT_FALSE(CsrMatrix<double>::from_triplets(2, 2, {{0, 1, 1.0}, {0, 0, 1.0}, {1, 1, 1.0}})
                   .is_structurally_symmetric());
}

TEST(Cg, IdentityConvergesInOneIteration) {
  const auto eye = CsrMatrix<double>::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  const std::vector<double> b{1.0, -2.0, 0.5};
  const auto r = cg_solve(eye, b);
  EXPECT_EQ(r.iterations, 1);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(r.x[i], b[i]);
}

TEST(Cg, SmallLaplacian) {
  const std::vector<double> b{0.0, 0.0, 1.0, 0.0, 0.0};
  const auto r = cg_solve(laplacian_1d(5), b);
  const double expected[5] = {0.5, 1.0, 1.5, 1.0, 0.5};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x[i], expected[i], 1e-12);
}

TEST(Cg, RandomSpdMeetsTolerance) {
  const auto a = random_spd(50, 3);
  const auto b = random_vector(50, 4);
  CgOptions o;
  o.tolerance = 1e-12;
  const auto r = cg_solve(a, b, o);
  EXPECT_LE(relative_residual(a, std::span<const double>(r.x), std::span<const double>(b)), 1e-12);
  EXPECT_LE(r.relative_residual, 1e-12);
}

TEST(Cg, EnergyNormErrorNeverIncreases) {
  const auto a = random_spd(60, 8);
  const auto b = random_vector(60, 9);
  const auto exact = lu_solve(a, std::span<const double>(b));
  std::vector<double> energy;
  CgOptions o;
  o.tolerance = 1e-13;
  o.monitor = [&](int, std::span<const double> x) {
    std::vector<double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) e[i] = x[i] - exact[i];
    const auto ae = a * std::span<const double>(e);
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * ae[i];
    energy.push_back(s);
  };
  cg_solve(a, b, o);
  ASSERT_GT(energy.size(), 2u);
  for (std::size_t k = 1; k < energy.size(); ++k) EXPECT_LE(energy[k], energy[k - 1] * (1 + 1e-10) + 1e-28);
}

TEST(Cg, ReportsNonConvergenceAndIndefiniteness) {
  CgOptions o;
  o.max_iterations = 2;
  EXPECT_THROW(cg_solve(laplacian_1d(40), random_vector(40, 1), o), SolverError);
  const auto indefinite = CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  EXPECT_THROW(cg_solve(indefinite, std::vector<double>{1.0, 1.0}), SolverError);
}

TEST(Lu, DiagonalIsElementwiseDivision) {
  const auto a = CsrMatrix<double>::from_triplets(3, 3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, -8.0}});
  const auto x = lu_solve(a, std::span<const double>(std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(x[0], 0.5);
  EXPECT_DOUBLE_EQ(x[1], 0.25);
  EXPECT_DOUBLE_EQ(x[2], -0.125);
}

TEST(Lu, PivotsOnZeroDiagonal) {
  const auto a = CsrMatrix<double>::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const auto x = lu_solve(a, std::span<const double>(std::vector<double>{1.0, 2.0}));
  EXPECT_NEAR(x[0], 2.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Lu, RandomSparsePlusIdentity) {
  const std::size_t n = 100;
  const CounterRng rng(5, 0);
  std::vector<Triplet<double>> t;
  for (std::uint32_t i = 0; i < n; ++i) {
    t.push_back({i, i, 1.0});
    for (std::uint32_t j = 0; j < n; ++j)
      if (rng.uniform(i, j) < 0.05) t.push_back({i, j, rng.uniform(i, n + j, -1.0, 1.0)});
  }
  const auto a = CsrMatrix<double>::from_triplets(n, n, std::move(t));
  const auto v = random_vector(n, 6);
  const auto b = a * std::span<const double>(v);
  const auto x = lu_solve(a, std::span<const double>(b));
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err += (x[i] - v[i]) * (x[i] - v[i]);
    norm += v[i] * v[i];
  }
  EXPECT_LE(std::sqrt(err / norm), 1e-10);
  EXPECT_LE(relative_residual(a, std::span<const double>(x), std::span<const double>(b)), 1e-12);
}

TEST(Lu, ComplexSystem) {
  const Complex i(0.0, 1.0);
  const auto a = CsrMatrix<Complex>::from_triplets(2, 2, {{0, 0, 1.0 + i}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, -i}});
  const std::vector<Complex> v{Complex(1.0, -1.0), Complex(0.5, 2.0)};
  const auto b = a * std::span<const Complex>(v);
  const auto x = lu_solve(a, std::span<const Complex>(b));
  EXPECT_NEAR(std::abs(x[0] - v[0]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(x[1] - v[1]), 0.0, 1e-14);
}

TEST(Lu, SingularMatrixIsReported) {
  const auto a = CsrMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 4.0}});
  EXPECT_THROW(lu_solve(a, std::span<const double>(std::vector<double>{1.0, 1.0})), SolverError);
}

TEST(MatrixMarket, WritesHeaderAndEntries) {
  std::ostringstream out;
  write_matrix_market(laplacian_1d(3), out);
  const auto s = out.str();
  EXPECT_NE(s.find("%%MatrixMarket matrix coordinate real general"), std::string::npos);
  EXPECT_NE(s.find("3 3 7"), std::string::npos);
}
