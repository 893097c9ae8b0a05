#include "cellsieve/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cellsieve/error.hpp"

namespace cellsieve {

KernelSpec resolve_kernel(const KernelSpec& spec, std::size_t n_features) {
  KernelSpec out = spec;
  if (spec.kind == KernelKind::linear) {
    out.gamma.reset();
    out.coef0 = 0.0;
    return out;
  }
  if (!out.gamma) {
    if (n_features == 0) throw InputError("sigmoid kernel: cannot default gamma with zero features");
    out.gamma = 1.0 / static_cast<double>(n_features);
  }
  if (!std::isfinite(*out.gamma) || !std::isfinite(out.coef0)) {
    throw InputError("sigmoid kernel: gamma and coef0 must be finite");
  }
  return out;
}

double kernel_eval(const KernelSpec& k, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("kernel_eval: vector length mismatch");
  const double uv = dot(u, v);
  if (k.kind == KernelKind::linear) return uv;
  if (!k.gamma) throw InputError("kernel_eval: sigmoid kernel gamma unresolved");
  return std::tanh(*k.gamma * uv + k.coef0);
}

Matrix kernel_matrix(const KernelSpec& k, const Matrix& x) {
  const std::size_t q = x.rows();
  Matrix gram(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i; j < q; ++j) {
      const double v = kernel_eval(k, x.row(i), x.row(j));
      if (!std::isfinite(v)) throw InputError("kernel_matrix: non-finite kernel value");
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

// ---------------------------------------------------------------------------

namespace {

struct Centered {
  Matrix x;
  std::vector<double> y;
  std::vector<double> column_means;
  double y_mean = 0.0;
};

Centered center(const Matrix& x, std::span<const double> y) {
  const std::size_t q = x.rows();
  const std::size_t n = x.cols();
  Centered c{x, std::vector<double>(y.begin(), y.end()), std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < q; ++i) {
    const auto r = x.row(i);
    for (std::size_t a = 0; a < n; ++a) c.column_means[a] += r[a];
    c.y_mean += y[i];
  }
  for (double& mu : c.column_means) mu /= static_cast<double>(q);
  c.y_mean /= static_cast<double>(q);
  for (std::size_t i = 0; i < q; ++i) {
    auto r = c.x.row(i);
    for (std::size_t a = 0; a < n; ++a) r[a] -= c.column_means[a];
    c.y[i] -= c.y_mean;
  }
  return c;
}

void check_training_inputs(const Matrix& x, std::span<const double> y, const char* who) {
  if (x.rows() < 2) throw InputError(std::string(who) + ": need at least 2 training samples");
  if (y.size() != x.rows()) {
    throw InputError(std::string(who) + ": " + std::to_string(y.size()) + " responses for " +
                     std::to_string(x.rows()) + " samples");
  }
  require_finite(x, who);
  require_finite(y, who);
}

}  // namespace

std::vector<double> ridge_lambda_grid() {
  std::vector<double> grid;
  for (int k = -6; k <= 6; ++k) grid.push_back(std::pow(10.0, 0.5 * k));
  return grid;
}

LooCurve ridge_loo_curve(const Matrix& x, std::span<const double> y, std::span<const double> lambdas) {
  check_training_inputs(x, y, "ridge_loo_curve");
  const Centered c = center(x, y);
  const std::size_t q = x.rows();
  const EigenDecomposition eig = eigh_symmetric(kernel_matrix(KernelSpec::linear(), c.x));

  // Projections of the centered response onto each eigenvector.
  std::vector<double> uy(q, 0.0);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t i = 0; i < q; ++i) uy[k] += eig.vectors(i, k) * c.y[i];

  LooCurve curve;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw InputError("ridge_loo_curve: lambda must be positive");
    std::vector<double> shrink(q);
    for (std::size_t k = 0; k < q; ++k) shrink[k] = eig.values[k] / (eig.values[k] + lambda);
    // Hat matrix H = 11^T/q + U diag(shrink) U^T; residual (I - H) y.
    double total = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      double fitted = 0.0;
      double leverage = 1.0 / static_cast<double>(q);
      for (std::size_t k = 0; k < q; ++k) {
        const double u = eig.vectors(i, k);
        fitted += u * shrink[k] * uy[k];
        leverage += u * u * shrink[k];
      }
      const double loo = (c.y[i] - fitted) / (1.0 - leverage);
      total += loo * loo;
    }
    curve.lambdas.push_back(lambda);
    curve.mean_squared_errors.push_back(total / static_cast<double>(q));
  }
  return curve;
}

RidgeModel train_ridge(const Matrix& x, std::span<const double> y, std::optional<double> lambda) {
  check_training_inputs(x, y, "train_ridge");
  if (lambda && !(*lambda > 0.0 && std::isfinite(*lambda))) {
    throw InputError("train_ridge: lambda must be positive and finite");
  }
  if (!lambda) {
    const auto grid = ridge_lambda_grid();
    const LooCurve curve = ridge_loo_curve(x, y, grid);
    const auto best = std::ranges::min_element(curve.mean_squared_errors);
    lambda = curve.lambdas[static_cast<std::size_t>(best - curve.mean_squared_errors.begin())];
  }

  Centered c = center(x, y);
  Matrix system = kernel_matrix(KernelSpec::linear(), c.x);
  for (std::size_t i = 0; i < system.rows(); ++i) system(i, i) += *lambda;

  RidgeModel model;
  model.dual_coefficients = solve_spd(system, c.y);
  model.training_rows = std::move(c.x);
  model.lambda = *lambda;
  model.y_mean = c.y_mean;
  model.column_means = std::move(c.column_means);
  return model;
}

std::vector<double> predict(const RidgeModel& model, const Matrix& test) {
  const std::size_t n = model.column_means.size();
  if (test.cols() != n) {
    throw InputError("predict: test has " + std::to_string(test.cols()) + " features, model expects " +
                     std::to_string(n));
  }
  require_finite(test, "predict");
  std::vector<double> scores(test.rows());
  std::vector<double> z(n);
  for (std::size_t p = 0; p < test.rows(); ++p) {
    const auto row = test.row(p);
    for (std::size_t a = 0; a < n; ++a) z[a] = row[a] - model.column_means[a];
    double s = 0.0;
    for (std::size_t i = 0; i < model.dual_coefficients.size(); ++i) {
      s += model.dual_coefficients[i] * dot(z, model.training_rows.row(i));
    }
    scores[p] = s + model.y_mean;
  }
  return scores;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kCurvatureFloor = 1e-12;

// SMO over 2q variables: t < q carries alpha_t (sign +1), t >= q carries
// alpha*_{t-q} (sign -1). Q_tu = s_t s_u K(t mod q, u mod q).
class SvrSolver {
 public:
  SvrSolver(const Matrix& gram, std::span<const double> y, double c, double epsilon)
      : gram_(gram), q_(gram.rows()), c_(c), alpha_(2 * q_, 0.0), grad_(2 * q_) {
    for (std::size_t t = 0; t < q_; ++t) {
      grad_[t] = epsilon - y[t];
      grad_[t + q_] = epsilon + y[t];
    }
  }

  long long solve(double tol, long long max_iterations) {
    long long iter = 0;
    while (true) {
      std::size_t i = 0;
      std::size_t j = 0;
      violation_ = select_working_set(i, j);
      if (violation_ <= tol || j == kNone) break;
      if (iter >= max_iterations) {
        throw ConvergenceError("train_svr: no convergence after " + std::to_string(max_iterations) +
                               " updates (violation " + std::to_string(violation_) + ")");
      }
      update(i, j);
      ++iter;
    }
    return iter;
  }

  double violation() const { return violation_; }

  std::vector<double> beta() const {
    std::vector<double> b(q_);
    for (std::size_t t = 0; t < q_; ++t) b[t] = alpha_[t] - alpha_[t + q_];
    return b;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < 2 * q_; ++t) {
      const double yg = sign(t) * grad_[t];
      if (alpha_[t] >= c_) {
        if (sign(t) < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (sign(t) > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  double sign(std::size_t t) const { return t < q_ ? 1.0 : -1.0; }
  double kernel(std::size_t t, std::size_t u) const { return gram_(t % q_, u % q_); }
  double signed_q(std::size_t t, std::size_t u) const { return sign(t) * sign(u) * kernel(t, u); }

  // Returns the maximal KKT violation m(alpha) - M(alpha).
  double select_working_set(std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = kNone;
    for (std::size_t t = 0; t < 2 * q_; ++t) {
      if (sign(t) > 0) {
        if (alpha_[t] < c_ && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          i = t;
        }
      } else if (alpha_[t] > 0.0 && grad_[t] >= gmax) {
        gmax = grad_[t];
        i = t;
      }
    }

    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_gain = std::numeric_limits<double>::infinity();
    std::size_t j = kNone;
    for (std::size_t t = 0; t < 2 * q_ && i != kNone; ++t) {
      double grad_diff = 0.0;
      if (sign(t) > 0) {
        if (!(alpha_[t] > 0.0)) continue;
        gmax2 = std::max(gmax2, grad_[t]);
        grad_diff = gmax + grad_[t];
      } else {
        if (!(alpha_[t] < c_)) continue;
        gmax2 = std::max(gmax2, -grad_[t]);
        grad_diff = gmax - grad_[t];
      }
      if (grad_diff > 0.0) {
        double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
        if (quad <= 0.0) quad = kCurvatureFloor;
        const double gain = -(grad_diff * grad_diff) / quad;
        if (gain <= best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    out_i = i;
    out_j = j;
    if (i == kNone) return 0.0;
    return gmax + gmax2;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const double qij = signed_q(i, j);
    const double qii = kernel(i, i);
    const double qjj = kernel(j, j);

    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kCurvatureFloor;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = alpha_[i] - alpha_[j];
      alpha_[i] += delta;
      alpha_[j] += delta;
      if (diff > 0.0) {
        if (alpha_[j] < 0.0) {
          alpha_[j] = 0.0;
          alpha_[i] = diff;
        }
      } else if (alpha_[i] < 0.0) {
        alpha_[i] = 0.0;
        alpha_[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha_[i] > c_) {
          alpha_[i] = c_;
          alpha_[j] = c_ - diff;
        }
      } else if (alpha_[j] > c_) {
        alpha_[j] = c_;
        alpha_[i] = c_ + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kCurvatureFloor;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = alpha_[i] + alpha_[j];
      alpha_[i] -= delta;
      alpha_[j] += delta;
      if (sum > c_) {
        if (alpha_[i] > c_) {
          alpha_[i] = c_;
          alpha_[j] = sum - c_;
        }
      } else if (alpha_[j] < 0.0) {
        alpha_[j] = 0.0;
        alpha_[i] = sum;
      }
      if (sum > c_) {
        if (alpha_[j] > c_) {
          alpha_[j] = c_;
          alpha_[i] = sum - c_;
        }
      } else if (alpha_[i] < 0.0) {
        alpha_[i] = 0.0;
        alpha_[j] = sum;
      }
    }

    const double di = alpha_[i] - old_i;
    const double dj = alpha_[j] - old_j;
    for (std::size_t t = 0; t < 2 * q_; ++t) {
      grad_[t] += signed_q(i, t) * di + signed_q(j, t) * dj;
    }
  }

  const Matrix& gram_;
  std::size_t q_;
  double c_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  double violation_ = 0.0;
};

}  // namespace

double svr_dual_objective(const Matrix& gram, std::span<const double> y, std::span<const double> beta,
                          double epsilon) {
  const std::vector<double> kb = matvec(gram, beta);
  double obj = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    obj += 0.5 * beta[i] * kb[i] + epsilon * std::abs(beta[i]) - y[i] * beta[i];
  }
  return obj;
}

SvrModel train_svr(const Matrix& x, std::span<const double> y, const SvrParams& params) {
  check_training_inputs(x, y, "train_svr");
  if (!(params.c > 0.0 && std::isfinite(params.c))) throw InputError("train_svr: C must be positive");
  if (!(params.epsilon >= 0.0 && std::isfinite(params.epsilon))) {
    throw InputError("train_svr: epsilon must be non-negative");
  }
  if (!(params.tol > 0.0)) throw InputError("train_svr: tol must be positive");

  SvrModel model;
  model.kernel = resolve_kernel(params.kernel, x.cols());
  model.c = params.c;
  model.epsilon = params.epsilon;
  model.support_rows = x;

  const Matrix gram = kernel_matrix(model.kernel, x);
  SvrSolver solver(gram, y, params.c, params.epsilon);
  model.iterations = solver.solve(params.tol, params.max_iterations);
  model.max_violation = solver.violation();
  model.beta = solver.beta();
  model.bias = -solver.rho();
  model.objective = svr_dual_objective(gram, y, model.beta, params.epsilon);
  return model;
}

std::vector<double> predict(const SvrModel& model, const Matrix& test) {
  if (test.cols() != model.support_rows.cols()) {
    throw InputError("predict: test has " + std::to_string(test.cols()) + " features, model expects " +
                     std::to_string(model.support_rows.cols()));
  }
  require_finite(test, "predict");
  std::vector<double> scores(test.rows());
  for (std::size_t p = 0; p < test.rows(); ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.beta.size(); ++i) {
      if (model.beta[i] == 0.0) continue;
      s += model.beta[i] * kernel_eval(model.kernel, model.support_rows.row(i), test.row(p));
    }
    scores[p] = s + model.bias;
  }
  return scores;
}

std::vector<double> predict(const Model& model, const Matrix& test) {
  return std::visit([&](const auto& m) { return predict(m, test); }, model);
}

}  // namespace cellsieve
