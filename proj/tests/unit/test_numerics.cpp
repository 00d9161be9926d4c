// Copyright 2026 The Warmstart Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "warmstart/error.hpp"
#include "warmstart/numerics.hpp"

namespace warmstart::numerics {
namespace {

SymMatrix random_spd(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(2 * d + 1, d);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = n(rng);
  SymMatrix a = SymMatrix::gram(x);
  a.add_diagonal(0.5);
  return a;
}

TEST(Matrix, MultiplyAndTranspose) {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.multiply(Vector{1, 0, -1}), (Vector{-2, -2}));
  EXPECT_EQ(m.transpose_multiply(Vector{1, 1}), (Vector{5, 7, 9}));
  const Matrix t = m.transpose();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_DOUBLE_EQ(t(2, 1), 6.0);
  const Matrix p = m.multiply(t);
  EXPECT_DOUBLE_EQ(p(0, 0), 14.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 32.0);
}

TEST(Matrix, RaggedRowsRejected) {
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), Error);
}

TEST(SymMatrix, GramMatchesExplicitProduct) {
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const SymMatrix g = SymMatrix::gram(x);
  EXPECT_DOUBLE_EQ(g(0, 0), 35.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 44.0);
  EXPECT_DOUBLE_EQ(g(1, 0), 44.0);
  EXPECT_DOUBLE_EQ(g(1, 1), 56.0);
}

TEST(SymMatrix, ZeroDimensionRejected) {
  try {
    SymMatrix m(0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Cholesky, SolvesAndReportsLogDet) {
  const SymMatrix a = SymMatrix::diagonal(Vector{4.0, 9.0});
  const Cholesky c(a);
  EXPECT_EQ(c.solve(Vector{4, 9}), (Vector{1, 1}));
  EXPECT_NEAR(c.log_determinant(), std::log(36.0), 1e-14);
  EXPECT_NEAR(c.inverse_quadratic_form(Vector{2, 3}), 2.0, 1e-14);
}

TEST(Cholesky, IndefiniteMatrixThrows) {
  SymMatrix a(2);
  a.set(0, 0, 1.0);
  a.set(0, 1, 2.0);
  a.set(1, 1, 1.0);
  try {
    Cholesky c(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPositiveDefinite);
  }
}

TEST(Cholesky, RandomSystemsResidual) {
  std::mt19937_64 rng(11);
  for (std::size_t d = 1; d <= 8; ++d) {
    const SymMatrix a = random_spd(d, rng);
    Vector b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = static_cast<double>(i) - 1.5;
    const Vector x = cholesky_solve(a, b);
    const Vector r = subtract(a.multiply(x), b);
    EXPECT_LT(norm2(r), 1e-10 * (1.0 + norm2(b)));
  }
}

TEST(SymEigen, DiagonalIsSortedDescending) {
  const auto e = sym_eigen(SymMatrix::diagonal(Vector{1.0, 4.0, 2.0}));
  EXPECT_EQ(e.eigenvalues, (Vector{4.0, 2.0, 1.0}));
  EXPECT_DOUBLE_EQ(std::abs(e.eigenvectors(1, 0)), 1.0);
}

TEST(SymEigen, TwoByTwoClosedForm) {
  SymMatrix a(2);
  a.set(0, 0, 2.0);
  a.set(0, 1, 1.0);
  a.set(1, 1, 2.0);
  const auto e = sym_eigen(a);
  EXPECT_NEAR(e.eigenvalues[0], 3.0, 1e-12);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-12);
}

// Reconstruction U diag(l) U^T and orthonormality on random SPD matrices.
TEST(SymEigen, ReconstructsRandomMatrices) {
  std::mt19937_64 rng(5);
  for (std::size_t d = 1; d <= 8; ++d) {
    const SymMatrix a = random_spd(d, rng);
    const auto e = sym_eigen(a);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double rec = 0.0;
        double gram = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          rec += e.eigenvectors(i, k) * e.eigenvalues[k] * e.eigenvectors(j, k);
          gram += e.eigenvectors(k, i) * e.eigenvectors(k, j);
        }
        EXPECT_NEAR(rec, a(i, j), 1e-9 * a.frobenius_norm());
        EXPECT_NEAR(gram, i == j ? 1.0 : 0.0, 1e-10);
      }
    }
    for (std::size_t k = 1; k < d; ++k) EXPECT_GE(e.eigenvalues[k - 1], e.eigenvalues[k]);
    double tr = 0.0;
    for (double l : e.eigenvalues) tr += l;
    EXPECT_NEAR(tr, a.trace(), 1e-9 * a.frobenius_norm());
  }
}

TEST(Mahalanobis, DiagonalForm) {
  EXPECT_DOUBLE_EQ(mahalanobis_norm(Vector{1, 0}, SymMatrix::diagonal(Vector{4, 1})), 2.0);
  EXPECT_DOUBLE_EQ(mahalanobis_norm(Vector{0, 0}, SymMatrix::identity(2)), 0.0);
  EXPECT_THROW(mahalanobis_norm(Vector{1, 0, 0}, SymMatrix::identity(2)), Error);
}

TEST(VectorOps, SizeMismatchThrows) {
  try {
    dot(Vector{1, 2}, Vector{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  Vector y{1, 1};
  axpy(2.0, Vector{1, -1}, y);
  EXPECT_EQ(y, (Vector{3, -1}));
}

}  // namespace
}  // namespace warmstart::numerics
