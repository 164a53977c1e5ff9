#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rfim {

using Vector = std::vector<double>;

// Dense row-major matrix. Everything in this project is small (at most a few
// hundred rows), so one flat buffer and plain loops are all we need. Reductions
// run in fixed left-to-right order to keep results bit-reproducible.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---- vector ops -----------------------------------------------------------

// (x_1, ..., x_D) -> (x_1, ..., x_D, 1): absorbs the bias into the weights.
Vector augment(const Vector& x);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
Vector operator-(const Vector& a, const Vector& b);
void axpy(double alpha, const Vector& x, Vector& y);  // y += alpha * x
bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// ---- matrix ops -----------------------------------------------------------

Matrix outer(const Vector& v);
// g += scale * v vᵀ with an exactly symmetric increment.
void add_scaled_outer(Matrix& g, double scale, const Vector& v);
// Triangular variant for batch accumulation loops: touches the diagonal and
// upper triangle only; mirror once when the sum is complete.
void add_scaled_outer_upper(Matrix& g, double scale, const Vector& v);
void mirror_upper_to_lower(Matrix& g);

Vector matvec(const Matrix& m, const Vector& x);             // m x
Vector matvec_transposed(const Matrix& m, const Vector& x);  // mᵀ x
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix operator*(double s, const Matrix& m);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool is_symmetric(const Matrix& m, double tol);

// ---- symmetric factorization and solves ------------------------------------

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;

  // Throws std::runtime_error when the input is not numerically positive
  // definite (non-positive pivot or non-finite entries).
  static CholeskyFactor compute(const Matrix& a);

  Vector solve(const Vector& b) const;
  void solve_in_place(std::span<double> b) const;

  const Matrix& lower() const { return lower_; }
  std::size_t dim() const { return lower_.rows(); }
  Matrix reconstruct() const;  // L Lᵀ

 private:
  Matrix lower_;
};

// Solves (g + eps I) d = b. g must be symmetric within 1e-10 of its scale
// (std::invalid_argument otherwise); factorization failure raises
// std::runtime_error.
Vector regularized_solve(const Matrix& g, const Vector& b, double eps);

// Gauss-Jordan inverse with partial pivoting. Only used by oracle-style
// cross-checks; the optimizers always go through the Cholesky path.
Matrix invert(const Matrix& m);

// eps_rel * trace(g) / dim, the relative damping rule. A zero-trace metric
// (e.g. a dead relu batch) floors the result at eps_rel so the solve
// degenerates to a scaled gradient step instead of dividing by zero.
double trace_scaled_epsilon(const Matrix& g, double eps_rel);

// ---- symmetric eigendecomposition -------------------------------------------

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // columns are the matching eigenvectors
};

// Cyclic Jacobi rotations; adequate for every symmetric matrix in this
// project (covariances up to ~800x800 and small metric blocks).
EigenDecomposition jacobi_eigen(const Matrix& a);

// Count of eigenvalues above rel_tol * max |eigenvalue| (symmetric input).
std::size_t numeric_rank(const Matrix& a, double rel_tol);

}  // namespace rfim
