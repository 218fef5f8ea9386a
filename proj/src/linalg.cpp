#include "zongd/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "zongd/errors.hpp"

namespace zongd {

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  require_same_size(a, b, "dot");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vec& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::fabs(x));
  return best;
}

double cosine(const Vec& a, const Vec& b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) throw DataError("cosine of zero vector");
  return dot(a, b) / (na * nb);
}

Vec add(const Vec& a, const Vec& b) {
  require_same_size(a, b, "add");
  Vec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(const Vec& a, const Vec& b) {
  require_same_size(a, b, "sub");
  Vec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scaled(const Vec& v, double factor) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
  return out;
}

Vec matvec(const Matrix& m, const Vec& v) {
  if (m.cols != static_cast<int>(v.size())) throw DimensionError("matvec: shape mismatch");
  Vec out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += m.at(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (double x : m.data) acc += x * x;
  return std::sqrt(acc);
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("frobenius_distance: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

Vec solve_dense(Matrix a, Vec b) {
  if (a.rows != a.cols) throw DimensionError("solve_dense: matrix must be square");
  if (a.rows != static_cast<int>(b.size())) throw DimensionError("solve_dense: rhs length mismatch");
  const int n = a.rows;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
    if (a.at(pivot, col) == 0.0) throw DataError("solve_dense: singular matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(a.at(pivot, j), a.at(col, j));
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a.at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double factor = a.at(r, col) * inv;
      if (factor == 0.0) continue;
      for (int j = col; j < n; ++j) a.at(r, j) -= factor * a.at(col, j);
      b[r] -= factor * b[col];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a.at(i, j) * x[j];
    x[i] = acc / a.at(i, i);
  }
  return x;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw DimensionError("cholesky: matrix must be square");
  const int n = a.rows;
  Matrix lower(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = a.at(i, j);
      for (int k = 0; k < j; ++k) acc -= lower.at(i, k) * lower.at(j, k);
      if (i == j) {
        if (acc <= 0.0) throw DataError("cholesky: matrix is not positive definite");
        lower.at(i, j) = std::sqrt(acc);
      } else {
        lower.at(i, j) = acc / lower.at(j, j);
      }
    }
  }
  return lower;
}

Vec solve_lower(const Matrix& lower, const Vec& b) {
  if (lower.rows != static_cast<int>(b.size())) throw DimensionError("solve_lower: rhs length mismatch");
  const int n = lower.rows;
  Vec x(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = b[i];
    for (int j = 0; j < i; ++j) acc -= lower.at(i, j) * x[j];
    x[i] = acc / lower.at(i, i);
  }
  return x;
}

Vec solve_lower_transposed(const Matrix& lower, const Vec& b) {
  if (lower.rows != static_cast<int>(b.size())) throw DimensionError("solve_lower_transposed: rhs length mismatch");
  const int n = lower.rows;
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= lower.at(j, i) * x[j];
    x[i] = acc / lower.at(i, i);
  }
  return x;
}

Vec symmetric_eigenvalues(Matrix a) {
  if (a.rows != a.cols) throw DimensionError("symmetric_eigenvalues: matrix must be square");
  const int n = a.rows;
  const int max_sweeps = 128;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    if (off < 1e-28) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace zongd
