#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cellsieve {

/// Dense row-major matrix of doubles.
///
/// Constructors that take external data reject NaN/Inf; element access does
/// not re-check, so operations validate their inputs with require_finite().
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;

  std::span<const double> data() const { return entries_; }
  std::span<double> data() { return entries_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Throws InputError if any entry is NaN or infinite. `what` names the operand.
void require_finite(const Matrix& a, const char* what);
void require_finite(std::span<const double> v, const char* what);

// Summation runs over ascending index in every product below, so results are
// bit-identical between runs.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without forming the transpose.
Matrix matmul_transposed_left(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> u, std::span<const double> v);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& a);

// Rows indexed by `indices`, in that order.
Matrix select_rows(const Matrix& a, std::span<const std::size_t> indices);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
};

struct JacobiOptions {
  double tol = 1e-12;          // off-diagonal Frobenius norm relative to ||A||_F
  int max_sweeps = 100;
  double symmetry_tol = 1e-9;  // relative to ||A||_F
};

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending (equal values keep their diagonal order)
/// and each eigenvector is sign-canonicalized so that its entry of largest
/// magnitude is positive, the lowest row index winning ties.
///
/// Throws InputError for non-square, asymmetric or non-finite input and
/// ConvergenceError if the sweep cap is reached.
EigenDecomposition eigh_symmetric(const Matrix& a, const JacobiOptions& options = {});

// Flips the sign of `v` in place so its largest-magnitude entry is positive.
void canonicalize_sign(std::span<double> v);

/// Solves S x = b for symmetric positive-definite S via Cholesky.
/// Throws InputError if S is not numerically positive definite.
std::vector<double> solve_spd(const Matrix& s, std::span<const double> b);

}  // namespace cellsieve
