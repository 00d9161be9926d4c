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

#include "warmstart/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "warmstart/error.hpp"

namespace warmstart::numerics {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(0, rows.front().size());
  m.data_.reserve(rows.size() * m.cols_);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  require_same_size(values.size(), cols_, "Matrix::append_row");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Vector Matrix::multiply(std::span<const double> v) const {
  require_same_size(v.size(), cols_, "Matrix::multiply");
  Vector out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), v);
  return out;
}

Vector Matrix::transpose_multiply(std::span<const double> v) const {
  require_same_size(v.size(), rows_, "Matrix::transpose_multiply");
  Vector out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) axpy(v[i], row(i), out);
  return out;
}

Matrix Matrix::multiply(const Matrix& other) const {
  require_same_size(cols_, other.rows_, "Matrix::multiply");
  Matrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
    }
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "SymMatrix dimension must be >= 1");
  }
}

SymMatrix SymMatrix::identity(std::size_t dim, double scale) {
  SymMatrix m(dim);
  m.add_diagonal(scale);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
  SymMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.data_[i * m.dim_ + i] = values[i];
  return m;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  require_same_size(m.rows(), m.cols(), "SymMatrix::symmetrized");
  SymMatrix out(m.rows());
  for (std::size_t i = 0; i < out.dim_; ++i) {
    for (std::size_t j = i; j < out.dim_; ++j) {
      out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    }
  }
  return out;
}

SymMatrix SymMatrix::gram(const Matrix& x) {
  SymMatrix out(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) out.add_outer(x.row(r));
  return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
  data_[i * dim_ + j] = value;
  data_[j * dim_ + i] = value;
}

void SymMatrix::add_outer(std::span<const double> x, double weight) {
  require_same_size(x.size(), dim_, "SymMatrix::add_outer");
  for (std::size_t i = 0; i < dim_; ++i) {
    const double xi = weight * x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = i; j < dim_; ++j) data_[i * dim_ + j] += xi * x[j];
  }
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < i; ++j) data_[i * dim_ + j] = data_[j * dim_ + i];
}

void SymMatrix::add_diagonal(double value) {
  for (std::size_t i = 0; i < dim_; ++i) data_[i * dim_ + i] += value;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  require_same_size(dim_, other.dim_, "SymMatrix::operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  require_same_size(dim_, other.dim_, "SymMatrix::operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

SymMatrix SymMatrix::operator*(double scale) const {
  SymMatrix out = *this;
  for (double& v : out.data_) v *= scale;
  return out;
}

SymMatrix operator+(SymMatrix lhs, const SymMatrix& rhs) { return lhs += rhs; }
SymMatrix operator-(SymMatrix lhs, const SymMatrix& rhs) { return lhs -= rhs; }

Vector SymMatrix::multiply(std::span<const double> v) const {
  require_same_size(v.size(), dim_, "SymMatrix::multiply");
  Vector out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = dot(std::span<const double>(data_.data() + i * dim_, dim_), v);
  }
  return out;
}

double SymMatrix::quadratic_form(std::span<const double> v) const {
  return dot(v, multiply(v));
}

double SymMatrix::frobenius_norm() const {
  return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
  return t;
}

Matrix SymMatrix::to_matrix() const {
  Matrix m(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

Cholesky::Cholesky(const SymMatrix& a) : dim_(a.dim()), l_(a.dim() * a.dim(), 0.0) {
  for (std::size_t j = 0; j < dim_; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l_[j * dim_ + k] * l_[j * dim_ + k];
    if (!(pivot > kPivotThreshold)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "Cholesky pivot " + std::to_string(pivot) + " at index " +
                      std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    l_[j * dim_ + j] = ljj;
    for (std::size_t i = j + 1; i < dim_; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * dim_ + k] * l_[j * dim_ + k];
      l_[i * dim_ + j] = s / ljj;
    }
  }
}

Vector Cholesky::forward_substitute(std::span<const double> b) const {
  require_same_size(b.size(), dim_, "Cholesky::forward_substitute");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * dim_ + k] * y[k];
    y[i] = s / l_[i * dim_ + i];
  }
  return y;
}

Vector Cholesky::solve(std::span<const double> b) const {
  Vector x = forward_substitute(b);
  for (std::size_t ii = dim_; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < dim_; ++k) s -= l_[k * dim_ + ii] * x[k];
    x[ii] = s / l_[ii * dim_ + ii];
  }
  return x;
}

double Cholesky::inverse_quadratic_form(std::span<const double> b) const {
  const Vector y = forward_substitute(b);
  return dot(y, y);
}

double Cholesky::log_determinant() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) s += std::log(l_[i * dim_ + i]);
  return 2.0 * s;
}

Vector cholesky_solve(const SymMatrix& a, std::span<const double> b) {
  require_same_size(b.size(), a.dim(), "cholesky_solve");
  return Cholesky(a).solve(b);
}

EigenDecomposition sym_eigen(const SymMatrix& a) {
  const std::size_t n = a.dim();
  Matrix m = a.to_matrix();
  Matrix v = Matrix::identity(n);

  const double tolerance = 1e-12 * a.frobenius_norm();
  const std::size_t max_sweeps = 100 * n * n;

  auto off_diagonal_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
  };

  std::size_t sweep = 0;
  while (off_diagonal_norm() > tolerance) {
    if (sweep++ >= max_sweeps) {
      throw Error(ErrorCode::kNoConvergence,
                  "Jacobi did not converge after " + std::to_string(max_sweeps) +
                      " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = m(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
  }
  return out;
}

double mahalanobis_norm(std::span<const double> v, const SymMatrix& a) {
  require_same_size(v.size(), a.dim(), "mahalanobis_norm");
  return std::sqrt(std::max(0.0, a.quadratic_form(v)));
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(std::span<const double> v, double factor) {
  Vector out(v.begin(), v.end());
  for (double& x : out) x *= factor;
  return out;
}

void axpy(double factor, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += factor * x[i];
}

}  // namespace warmstart::numerics
