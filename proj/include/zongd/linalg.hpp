#pragma once

#include <cstddef>
#include <vector>

namespace zongd {

using Vec = std::vector<double>;

/// Dense row-major matrix. Only the small verification paths materialize
/// matrices; attack-path code works with vectors exclusively.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
double cosine(const Vec& a, const Vec& b);

Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scaled(const Vec& v, double factor);

Vec matvec(const Matrix& m, const Vec& v);
double frobenius_norm(const Matrix& m);
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Gaussian elimination with partial pivoting. Throws DataError on a
/// numerically singular system.
Vec solve_dense(Matrix a, Vec b);

/// Cholesky factor (lower triangular) of a symmetric positive definite
/// matrix. Throws DataError if a nonpositive pivot appears.
Matrix cholesky(const Matrix& a);

Vec solve_lower(const Matrix& lower, const Vec& b);

/// Solves lower^T * x = b by back substitution on the transpose.
Vec solve_lower_transposed(const Matrix& lower, const Vec& b);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
Vec symmetric_eigenvalues(Matrix a);

}  // namespace zongd
