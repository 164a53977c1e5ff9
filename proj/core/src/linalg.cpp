#include "rfim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rfim {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector augment(const Vector& x) {
  Vector out(x.size() + 1);
  std::copy(x.begin(), x.end(), out.begin());
  out.back() = 1.0;
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector operator-(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector subtract: size mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Matrix& m) {
  const auto d = m.data();
  return std::all_of(d.begin(), d.end(), [](double x) { return std::isfinite(x); });
}

Matrix outer(const Vector& v) {
  Matrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double* r = m.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[i] * v[j];
  }
  return m;
}

void add_scaled_outer_upper(Matrix& g, double scale, const Vector& v) {
  if (g.rows() != v.size() || g.cols() != v.size()) {
    throw std::invalid_argument("add_scaled_outer_upper: shape mismatch");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double vi = scale * v[i];
    double* r = g.row(i);
    for (std::size_t j = i; j < v.size(); ++j) r[j] += vi * v[j];
  }
}

void mirror_upper_to_lower(Matrix& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("mirror_upper_to_lower: square required");
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = i + 1; j < g.cols(); ++j) g(j, i) = g(i, j);
  }
}

void add_scaled_outer(Matrix& g, double scale, const Vector& v) {
  if (g.rows() != v.size() || g.cols() != v.size()) {
    throw std::invalid_argument("add_scaled_outer: shape mismatch");
  }
  // one product per (i,j) pair, mirrored, so the increment is exactly symmetric
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = scale * v[i];
    double* r = g.row(i);
    r[i] += vi * v[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double inc = vi * v[j];
      r[j] += inc;
      g(j, i) += inc;
    }
  }
}

Vector matvec(const Matrix& m, const Vector& x) {
  if (m.cols() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_transposed(const Matrix& m, const Vector& x) {
  if (m.rows() != x.size()) throw std::invalid_argument("matvec_transposed: shape mismatch");
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += xi * r[j];
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ar[k];
      const double* br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  for (double& x : out.data()) x *= s;
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix add: shape mismatch");
  }
  Matrix out = a;
  auto od = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] += bd[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix subtract: shape mismatch");
  }
  Matrix out = a;
  auto od = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] -= bd[i];
  return out;
}

double trace(const Matrix& m) {
  const std::size_t n = std::min(m.rows(), m.cols());
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += m(i, i);
  return t;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s = std::max(s, std::abs(x));
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double s = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) s = std::max(s, std::abs(ad[i] - bd[i]));
  return s;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    }
  }
  return true;
}

CholeskyFactor CholeskyFactor::compute(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: square matrix required");
  const std::size_t n = a.rows();
  CholeskyFactor f;
  f.lower_ = Matrix(n, n);
  Matrix& l = f.lower_;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::runtime_error("cholesky: matrix is not positive definite");
    }
    l(j, j) = std::sqrt(d);
    const double inv = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s * inv;
    }
  }
  return f;
}

void CholeskyFactor::solve_in_place(std::span<double> b) const {
  const std::size_t n = dim();
  if (b.size() != n) throw std::invalid_argument("cholesky solve: size mismatch");
  const Matrix& l = lower_;
  // forward: L y = b
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    const double* r = l.row(i);
    for (std::size_t k = 0; k < i; ++k) s -= r[k] * b[k];
    b[i] = s / r[i];
  }
  // backward: Lᵀ x = y
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
    b[ii] = s / l(ii, ii);
  }
}

Vector CholeskyFactor::solve(const Vector& b) const {
  Vector x = b;
  solve_in_place(x);
  return x;
}

Matrix CholeskyFactor::reconstruct() const {
  const std::size_t n = dim();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += lower_(i, k) * lower_(j, k);
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  return a;
}

Vector regularized_solve(const Matrix& g, const Vector& b, double eps) {
  if (g.rows() != g.cols() || g.rows() != b.size()) {
    throw std::invalid_argument("regularized_solve: shape mismatch");
  }
  if (eps < 0.0) throw std::invalid_argument("regularized_solve: eps must be >= 0");
  const double scale = std::max(1.0, max_abs(g));
  if (!is_symmetric(g, 1e-10 * scale)) {
    throw std::invalid_argument("regularized_solve: matrix is not symmetric");
  }
  Matrix shifted = g;
  for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += eps;
  const CholeskyFactor f = CholeskyFactor::compute(shifted);
  Vector x = f.solve(b);
  if (!all_finite(x)) throw std::runtime_error("regularized_solve: non-finite solution");
  return x;
}

Matrix invert(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("invert: square matrix required");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) throw std::runtime_error("invert: singular matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const double inv_pivot = 1.0 / a(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      a(col, c) *= inv_pivot;
      inv(col, c) *= inv_pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= factor * a(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

double trace_scaled_epsilon(const Matrix& g, double eps_rel) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw std::invalid_argument("trace_scaled_epsilon: square matrix required");
  }
  const double t = trace(g);
  if (t == 0.0) return eps_rel;
  return eps_rel * t / static_cast<double>(g.rows());
}

EigenDecomposition jacobi_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("jacobi_eigen: square matrix required");
  const std::size_t n = a.rows();
  Matrix d = a;
  Matrix v = Matrix::identity(n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += d(i, j) * d(i, j);
    }
    return std::sqrt(2.0 * s);
  };

  const double total = frobenius_norm(d);
  const double stop = std::max(1e-300, 1e-14 * total);
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps && off_norm() > stop; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = d(p, q);
        if (apq == 0.0) continue;
        const double app = d(p, p);
        const double aqq = d(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double dkp = d(k, p);
          const double dkq = d(k, q);
          d(k, p) = c * dkp - s * dkq;
          d(k, q) = s * dkp + c * dkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double dpk = d(p, k);
          const double dqk = d(q, k);
          d(p, k) = c * dpk - s * dqk;
          d(q, k) = s * dpk + c * dqk;
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
                   [&](std::size_t i, std::size_t j) { return d(i, i) > d(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = d(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

std::size_t numeric_rank(const Matrix& a, double rel_tol) {
  const EigenDecomposition e = jacobi_eigen(a);
  double top = 0.0;
  for (double w : e.values) top = std::max(top, std::abs(w));
  if (top == 0.0) return 0;
  std::size_t rank = 0;
  for (double w : e.values) {
    if (std::abs(w) > rel_tol * top) ++rank;
  }
  return rank;
}

}  // namespace rfim
