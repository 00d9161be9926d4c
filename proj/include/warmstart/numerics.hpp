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

// Dense linear algebra for the small symmetric systems that show up in ridge
// priors and LinUCB: Cholesky solves, cyclic Jacobi eigendecomposition and
// Mahalanobis norms. Everything here is value-typed and pure.

#ifndef WARMSTART_NUMERICS_HPP_
#define WARMSTART_NUMERICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace warmstart::numerics {

using Vector = std::vector<double>;

// Pivots at or below this value are treated as loss of definiteness.
inline constexpr double kPivotThreshold = 1e-12;

// Dense row-major matrix. Used for design matrices (n rows of dimension d).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  // Stacks equally sized rows; an empty list gives a 0 x 0 matrix.
  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix identity(std::size_t dim);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  void append_row(std::span<const double> values);

  // this * v
  Vector multiply(std::span<const double> v) const;
  // this^T * v
  Vector transpose_multiply(std::span<const double> v) const;
  Matrix multiply(const Matrix& other) const;
  Matrix transpose() const;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense symmetric matrix. Both triangles are stored and kept bitwise equal.
class SymMatrix {
 public:
  // dim x dim zero matrix; dim must be >= 1.
  explicit SymMatrix(std::size_t dim);

  static SymMatrix identity(std::size_t dim, double scale = 1.0);
  static SymMatrix diagonal(std::span<const double> values);
  // (m + m^T) / 2; m must be square.
  static SymMatrix symmetrized(const Matrix& m);
  // X^T X.
  static SymMatrix gram(const Matrix& x);

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * dim_ + j];
  }
  // Writes (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);

  // this += weight * x x^T
  void add_outer(std::span<const double> x, double weight = 1.0);
  void add_diagonal(double value);
  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix operator*(double scale) const;

  Vector multiply(std::span<const double> v) const;
  // v^T this v
  double quadratic_form(std::span<const double> v) const;
  double frobenius_norm() const;
  double trace() const;
  Matrix to_matrix() const;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

SymMatrix operator+(SymMatrix lhs, const SymMatrix& rhs);
SymMatrix operator-(SymMatrix lhs, const SymMatrix& rhs);

// Lower-triangular factor L with A = L L^T.
class Cholesky {
 public:
  // Throws Error(kNotPositiveDefinite) when a pivot is <= kPivotThreshold.
  explicit Cholesky(const SymMatrix& a);

  std::size_t dim() const noexcept { return dim_; }

  Vector solve(std::span<const double> b) const;
  // Solves L y = b.
  Vector forward_substitute(std::span<const double> b) const;
  // b^T A^{-1} b, computed as ||L^{-1} b||^2.
  double inverse_quadratic_form(std::span<const double> b) const;
  double log_determinant() const;
  double lower(std::size_t i, std::size_t j) const { return l_[i * dim_ + j]; }

 private:
  std::size_t dim_;
  std::vector<double> l_;
};

struct EigenDecomposition {
  Vector eigenvalues;  // descending
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
};

// Solves A x = b for symmetric positive-definite A.
Vector cholesky_solve(const SymMatrix& a, std::span<const double> b);

// Cyclic Jacobi. Converged once the off-diagonal Frobenius norm is at most
// 1e-12 * ||A||_F. Throws Error(kNoConvergence) after 100 * dim^2 sweeps.
EigenDecomposition sym_eigen(const SymMatrix& a);

// sqrt(v^T A v) for PSD A. Throws Error(kDimensionMismatch).
double mahalanobis_norm(std::span<const double> v, const SymMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> v, double factor);
// y += factor * x
void axpy(double factor, std::span<const double> x, std::span<double> y);

}  // namespace warmstart::numerics

#endif  // WARMSTART_NUMERICS_HPP_
