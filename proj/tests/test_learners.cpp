#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cellsieve/error.hpp"
#include "cellsieve/learners.hpp"
#include "oracles.hpp"

using namespace cellsieve;

namespace {

std::vector<double> random_vector(SplitMix64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform_open() - 1.0;
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("kernel evaluation") {
  const std::vector<double> u{1, 2};
  CHECK(kernel_eval(KernelSpec::linear(), u, u) == 5.0);
  const std::vector<double> a{1, 0}, b{0, 1};
  CHECK(kernel_eval(KernelSpec::sigmoid(1.0, 0.0), a, b) == 0.0);
  const std::vector<double> c{1, 1}, d{1, 1};
  CHECK(kernel_eval(KernelSpec::sigmoid(0.5, 1.0), c, d) == doctest::Approx(0.96402758007581690).epsilon(1e-14));
  CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), u, std::vector<double>{1.0}), InputError);
  CHECK(resolve_kernel(KernelSpec::sigmoid(), 8).gamma == 0.125);
}

TEST_CASE("ridge interpolates exactly linear data at tiny lambda") {
  SplitMix64 rng(3);
  const Matrix x = oracle::random_matrix(rng, 12, 3);
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = 2.0 * x(i, 0) - x(i, 1) + 0.5 * x(i, 2) + 3.0;
  const RidgeModel model = train_ridge(x, y, 1e-8);
  const auto pred = predict(model, x);
  for (std::size_t i = 0; i < 12; ++i) CHECK(rel_err(pred[i], y[i]) <= 1e-5);
}

TEST_CASE("ridge on constant responses predicts the constant") {
  SplitMix64 rng(4);
  const Matrix x = oracle::random_matrix(rng, 6, 4);
  const std::vector<double> y(6, 2.5);
  for (double lambda : {0.01, 1.0, 100.0}) {
    const RidgeModel model = train_ridge(x, y, lambda);
    for (double a : model.dual_coefficients) CHECK(a == 0.0);
    for (double p : predict(model, oracle::random_matrix(rng, 3, 4))) CHECK(p == 2.5);
  }
}

TEST_CASE("dual ridge matches the primal normal equations") {
  SplitMix64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = oracle::random_matrix(rng, 10, 4);
    const auto y = random_vector(rng, 10);
    const Matrix test = oracle::random_matrix(rng, 5, 4);
    const double lambda = 0.1 + trial;
    const RidgeModel model = train_ridge(x, y, lambda);
    const auto dual = predict(model, test);
    const auto primal = oracle::primal_ridge_predict(x, y, lambda, test);
    for (std::size_t p = 0; p < 5; ++p) CHECK(rel_err(dual[p], primal[p]) <= 1e-8);

    // (K + lambda I) alpha = y_c residual.
    const Matrix k = kernel_matrix(KernelSpec::linear(), model.training_rows);
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / 10.0;
    const auto ka = matvec(k, model.dual_coefficients);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(std::abs(ka[i] + lambda * model.dual_coefficients[i] - (y[i] - ybar)) <= 1e-8 * std::max(1.0, std::abs(y[i] - ybar)));
    }
  }
}

TEST_CASE("ridge with huge lambda predicts the mean") {
  SplitMix64 rng(12);
  const Matrix x = oracle::random_matrix(rng, 9, 3);
  const auto y = random_vector(rng, 9);
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / 9.0;
  for (double p : predict(train_ridge(x, y, 1e9), oracle::random_matrix(rng, 4, 3))) CHECK(std::abs(p - ybar) <= 1e-6);
}

TEST_CASE("closed-form LOOCV equals explicit refits") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t q = 6 + rng.below(12);
    const Matrix x = oracle::random_matrix(rng, q, 5);
    const auto y = random_vector(rng, q);
    const auto grid = ridge_lambda_grid();
    const LooCurve curve = ridge_loo_curve(x, y, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double explicit_mse = oracle::explicit_loo_mse(x, y, grid[k]);
      CHECK(std::abs(curve.mean_squared_errors[k] - explicit_mse) <= 1e-8 * explicit_mse);
    }
    // Automatic lambda is the LOOCV minimizer.
    const RidgeModel model = train_ridge(x, y);
    const auto best = std::ranges::min_element(curve.mean_squared_errors) - curve.mean_squared_errors.begin();
    CHECK(model.lambda == grid[static_cast<std::size_t>(best)]);
  }
  CHECK(ridge_lambda_grid().size() == 13);
  CHECK(ridge_lambda_grid().front() == doctest::Approx(1e-3));
  CHECK(ridge_lambda_grid().back() == doctest::Approx(1e3));
}

TEST_CASE("ridge errors") {
  CHECK_THROWS_AS(train_ridge(Matrix{{1, 2}}, std::vector<double>{1}, 1.0), InputError);
  CHECK_THROWS_AS(train_ridge(Matrix{{1}, {2}}, std::vector<double>{1, 2}, -1.0), InputError);
  CHECK_THROWS_AS(train_ridge(Matrix{{1}, {2}}, std::vector<double>{1}, 1.0), InputError);
  CHECK_THROWS_AS(train_ridge(Matrix{{1}, {2}}, std::vector<double>{1, NAN}, 1.0), InputError);
  const RidgeModel m = train_ridge(Matrix{{1, 0}, {0, 1}}, std::vector<double>{1, 2}, 1.0);
  CHECK_THROWS_AS(predict(m, Matrix{{1, 2, 3}}), InputError);
}

TEST_CASE("SVR on constant responses") {
  SplitMix64 rng(20);
  const Matrix x = oracle::random_matrix(rng, 7, 3);
  const std::vector<double> y(7, 4.0);
  for (auto kernel : {KernelSpec::linear(), KernelSpec::sigmoid()}) {
    SvrParams params;
    params.kernel = kernel;
    const SvrModel model = train_svr(x, y, params);
    for (double b : model.beta) CHECK(b == 0.0);
    CHECK(model.bias == doctest::Approx(4.0).epsilon(1e-14));
    for (double p : predict(model, oracle::random_matrix(rng, 3, 3))) CHECK(p == doctest::Approx(4.0).epsilon(1e-14));
  }
}

TEST_CASE("SVR fits y = 2x within the tube") {
  const Matrix x{{0}, {1}, {2}, {3}};
  const std::vector<double> y{0, 2, 4, 6};
  SvrParams params;
  params.c = 100.0;
  params.epsilon = 0.01;
  const SvrModel model = train_svr(x, y, params);
  const auto pred = predict(model, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(pred[i] - y[i]) <= 0.01 + 1e-2);

  const auto pg = oracle::svr_projected_gradient(kernel_matrix(model.kernel, x), y, 100.0, 0.01, 400000);
  CHECK(std::abs(model.objective - pg.objective) <= 1e-4 * std::abs(pg.objective));
}

TEST_CASE("SVR objective and KKT against the projected-gradient oracle") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const Matrix x = oracle::random_matrix(rng, 8, 3);
    const auto y = random_vector(rng, 8);
    for (auto kernel : {KernelSpec::linear(), KernelSpec::sigmoid()}) {
      SvrParams params;
      params.kernel = kernel;
      const SvrModel model = train_svr(x, y, params);
      const Matrix gram = kernel_matrix(model.kernel, x);
      const auto pg = oracle::svr_projected_gradient(gram, y, params.c, params.epsilon);
      CHECK(std::abs(model.objective - pg.objective) <= 1e-4 * std::abs(pg.objective));
      CHECK(oracle::svr_kkt_violation(gram, y, model.beta, params.c, params.epsilon) <= 1e-3);
      const double sum = std::accumulate(model.beta.begin(), model.beta.end(), 0.0);
      CHECK(std::abs(sum) <= 1e-9 * params.c * 8);
      for (double b : model.beta) CHECK((b >= -params.c && b <= params.c));
    }
  }
}

TEST_CASE("SVR with a tube wider than the response spread has no support vectors") {
  SplitMix64 rng(22);
  const Matrix x = oracle::random_matrix(rng, 10, 4);
  const auto y = random_vector(rng, 10);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 10.0;
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - mean));
  SvrParams params;
  params.epsilon = spread * 1.01;
  for (double b : train_svr(x, y, params).beta) CHECK(b == 0.0);
}

TEST_CASE("duplicating a sample never worsens the SVR dual optimum") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = oracle::random_matrix(rng, 8, 3);
    const auto y = random_vector(rng, 8);
    SvrParams params;
    params.tol = 1e-6;
    const SvrModel base = train_svr(x, y, params);

    Matrix xd(9, 3);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t a = 0; a < 3; ++a) xd(i, a) = x(i, a);
    for (std::size_t a = 0; a < 3; ++a) xd(8, a) = x(trial, a);
    auto yd = y;
    yd.push_back(y[trial]);
    const SvrModel dup = train_svr(xd, yd, params);
    // Minimization form: the larger feasible set can only lower the minimum.
    CHECK(dup.objective <= base.objective + params.tol);
  }
}

TEST_CASE("learners are permutation equivariant") {
  SplitMix64 rng(24);
  const Matrix x = oracle::random_matrix(rng, 6, 8);
  const auto y = random_vector(rng, 6);
  const Matrix test = oracle::random_matrix(rng, 5, 8);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  const Matrix xp = select_rows(x, perm);
  std::vector<double> yp;
  for (std::size_t i : perm) yp.push_back(y[i]);

  const auto r1 = predict(train_ridge(x, y, 0.5), test);
  const auto r2 = predict(train_ridge(xp, yp, 0.5), test);
  for (std::size_t p = 0; p < 5; ++p) CHECK(std::abs(r1[p] - r2[p]) <= 1e-10);

  // With q <= n the linear Gram matrix is positive definite and the dual
  // solution unique; solve tightly so both orders land on it.
  SvrParams params;
  params.tol = 1e-13;
  const auto s1 = predict(train_svr(x, y, params), test);
  const auto s2 = predict(train_svr(xp, yp, params), test);
  for (std::size_t p = 0; p < 5; ++p) CHECK(std::abs(s1[p] - s2[p]) <= 1e-10);
}

TEST_CASE("SVR errors and prediction oracle") {
  CHECK_THROWS_AS(train_svr(Matrix{{1}}, std::vector<double>{1}), InputError);
  SvrParams bad;
  bad.c = 0.0;
  CHECK_THROWS_AS(train_svr(Matrix{{1}, {2}}, std::vector<double>{1, 2}, bad), InputError);
  bad = {};
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(train_svr(Matrix{{1}, {2}}, std::vector<double>{1, 2}, bad), InputError);

  SplitMix64 rng(25);
  const Matrix x = oracle::random_matrix(rng, 10, 3);
  const auto y = random_vector(rng, 10);
  SvrParams capped;
  capped.epsilon = 0.0;
  capped.max_iterations = 1;
  CHECK_THROWS_AS(train_svr(x, y, capped), ConvergenceError);

  SvrModel fixed;
  fixed.kernel = KernelSpec::linear();
  fixed.support_rows = x;
  fixed.beta.assign(10, 0.0);
  fixed.bias = 3.0;
  for (double p : predict(fixed, oracle::random_matrix(rng, 4, 3))) CHECK(p == 3.0);
  CHECK_THROWS_AS(predict(fixed, Matrix{{1, 2}}), InputError);

  SvrParams params;
  params.kernel = KernelSpec::sigmoid(0.3, 0.2);
  const SvrModel model = train_svr(x, y, params);
  const Matrix test = oracle::random_matrix(rng, 6, 3);
  const auto pred = predict(model, test);
  for (std::size_t p = 0; p < 6; ++p) {
    double s = model.bias;
    for (std::size_t i = 0; i < 10; ++i) {
      double uv = 0.0;
      for (std::size_t a = 0; a < 3; ++a) uv += x(i, a) * test(p, a);
      s += model.beta[i] * std::tanh(0.3 * uv + 0.2);
    }
    CHECK(std::abs(pred[p] - s) <= 1e-10);
  }
}
