#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cellsieve/linalg.hpp"

namespace cellsieve {

enum class KernelKind { linear, sigmoid };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  std::optional<double> gamma;  // sigmoid only; unset means 1 / n_features
  double coef0 = 0.0;           // sigmoid only

  static KernelSpec linear() { return {}; }
  static KernelSpec sigmoid(std::optional<double> gamma = std::nullopt, double coef0 = 0.0) {
    return {KernelKind::sigmoid, gamma, coef0};
  }
};

// Fills in the default gamma for `n_features` and validates the spec.
KernelSpec resolve_kernel(const KernelSpec& spec, std::size_t n_features);

/// linear: u.v   sigmoid: tanh(gamma * u.v + coef0). `k` must be resolved.
double kernel_eval(const KernelSpec& k, std::span<const double> u, std::span<const double> v);

// Gram matrix k(x_i, x_j) over the rows of x.
Matrix kernel_matrix(const KernelSpec& k, const Matrix& x);

// ---------------------------------------------------------------------------
// Ridge regression in dual form on column-centered data.

struct RidgeModel {
  std::vector<double> dual_coefficients;  // alpha, length q
  Matrix training_rows;                   // centered rows, q x n
  double lambda = 1.0;
  double y_mean = 0.0;
  std::vector<double> column_means;       // length n
};

// Log-spaced grid 10^-3, 10^-2.5, ..., 10^3 searched by automatic lambda.
std::vector<double> ridge_lambda_grid();

struct LooCurve {
  std::vector<double> lambdas;
  std::vector<double> mean_squared_errors;
};

/// Exact leave-one-out mean squared error for each lambda, using one
/// eigendecomposition of the centered Gram matrix. The intercept (response
/// mean) is refit on every held-out fold, matching an explicit refit.
LooCurve ridge_loo_curve(const Matrix& x, std::span<const double> y, std::span<const double> lambdas);

/// Fits ridge regression. With no lambda, picks the grid value with the
/// smallest exact LOO error (first one on ties).
RidgeModel train_ridge(const Matrix& x, std::span<const double> y, std::optional<double> lambda = std::nullopt);

// ---------------------------------------------------------------------------
// epsilon-SVR solved by SMO on the 2q-variable dual.

struct SvrParams {
  KernelSpec kernel;
  double c = 1.0;
  double epsilon = 0.1;
  double tol = 1e-3;
  long long max_iterations = 10'000'000;
};

struct SvrModel {
  std::vector<double> beta;  // alpha_i - alpha_i^*, each in [-C, C]
  double bias = 0.0;
  KernelSpec kernel;         // resolved
  Matrix support_rows;       // training rows (q x n)
  double c = 1.0;
  double epsilon = 0.1;
  // Solver diagnostics; not needed for prediction.
  long long iterations = 0;
  double max_violation = 0.0;
  double objective = 0.0;
};

/// Minimizes 0.5 b^T K b + eps * sum|b_i| - y^T b subject to sum b_i = 0 and
/// |b_i| <= C. Working pairs are chosen as the maximal violator plus the
/// partner with the best second-order gain; indefinite pair curvature is
/// floored at 1e-12. Throws ConvergenceError at the iteration cap.
SvrModel train_svr(const Matrix& x, std::span<const double> y, const SvrParams& params = {});

// Dual objective 0.5 b^T K b + eps * sum|b_i| - y^T b for a given beta.
double svr_dual_objective(const Matrix& gram, std::span<const double> y, std::span<const double> beta,
                          double epsilon);

using Model = std::variant<RidgeModel, SvrModel>;

std::vector<double> predict(const RidgeModel& model, const Matrix& test);
std::vector<double> predict(const SvrModel& model, const Matrix& test);
std::vector<double> predict(const Model& model, const Matrix& test);

}  // namespace cellsieve
