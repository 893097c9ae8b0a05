#include "cellsieve/noise_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "cellsieve/error.hpp"

namespace cellsieve {

Matrix manhattan_distance_matrix(const Matrix& x) {
  if (x.rows() < 2) throw InputError("manhattan_distance_matrix: need at least 2 samples");
  require_finite(x, "manhattan_distance_matrix");
  const std::size_t m = x.rows();
  Matrix l(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t a = 0; a < xi.size(); ++a) s += std::abs(xi[a] - xj[a]);
      l(i, j) = s;
      l(j, i) = s;
    }
  }
  return l;
}

SubspaceBasis smallest_eigenvectors(const Matrix& distances, std::size_t t) {
  const std::size_t m = distances.rows();
  if (t < 1 || t > m) {
    throw InputError("smallest_eigenvectors: t = " + std::to_string(t) + " outside [1, " +
                     std::to_string(m) + "]");
  }
  const EigenDecomposition eig = eigh_symmetric(distances);

  std::vector<double> squared(m);
  double largest = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    squared[k] = eig.values[k] * eig.values[k];
    largest = std::max(largest, squared[k]);
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return squared[a] < squared[b]; });

  // Tie groups are anchored at their first member so membership is well defined.
  const double tie_width = 1e-10 * largest;
  auto tie_less = [&](std::size_t a, std::size_t b) {
    if (eig.values[a] != eig.values[b]) return eig.values[a] < eig.values[b];
    for (std::size_t i = 0; i < m; ++i) {
      if (eig.vectors(i, a) != eig.vectors(i, b)) return eig.vectors(i, a) < eig.vectors(i, b);
    }
    return a < b;
  };
  for (std::size_t begin = 0; begin < m;) {
    std::size_t end = begin + 1;
    while (end < m && squared[order[end]] - squared[order[begin]] <= tie_width) ++end;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
              order.begin() + static_cast<std::ptrdiff_t>(end), tie_less);
    begin = end;
  }

  SubspaceBasis out{Matrix(m, t), std::vector<double>(t)};
  for (std::size_t c = 0; c < t; ++c) {
    out.d_eigenvalues[c] = squared[order[c]];
    for (std::size_t i = 0; i < m; ++i) out.vectors(i, c) = eig.vectors(i, order[c]);
  }
  return out;
}

Matrix project_onto_subspace(const Matrix& x, const Matrix& basis) {
  if (basis.rows() != x.rows()) {
    throw InputError("project_onto_subspace: basis has " + std::to_string(basis.rows()) +
                     " rows, data has " + std::to_string(x.rows()));
  }
  require_finite(x, "project_onto_subspace");
  const Matrix gram = matmul_transposed_left(basis, basis);
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      if (std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) > 1e-8) {
        throw InputError("project_onto_subspace: basis columns are not orthonormal");
      }
    }
  }
  const Matrix coords = matmul_transposed_left(basis, x);  // t x n
  return matmul(basis, coords);
}

std::vector<double> sample_degrees(const Matrix& x, const Matrix& projected) {
  if (x.rows() != projected.rows() || x.cols() != projected.cols()) {
    throw InputError("sample_degrees: shape mismatch");
  }
  std::vector<double> degrees(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double nx = norm2(x.row(i));
    if (nx == 0.0) throw InputError("sample_degrees: sample " + std::to_string(i) + " is a zero vector");
    const double np = norm2(projected.row(i));
    if (np == 0.0) {
      degrees[i] = 180.0;
      continue;
    }
    const double cosine = std::clamp(dot(projected.row(i), x.row(i)) / (np * nx), -1.0, 1.0);
    degrees[i] = std::acos(cosine) * 180.0 / std::numbers::pi;
  }
  return degrees;
}

std::size_t resolve_keep_count(const KeepRule& rule, std::span<const double> degrees) {
  const std::size_t m = degrees.size();
  const std::size_t q = std::visit(
      [&](const auto& r) -> std::size_t {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, KeepCount>) {
          return r.q;
        } else if constexpr (std::is_same_v<R, KeepFraction>) {
          if (!(r.fraction > 0.0 && r.fraction <= 1.0)) {
            throw InputError("keep fraction must lie in (0, 1], got " + std::to_string(r.fraction));
          }
          return static_cast<std::size_t>(std::llround(r.fraction * static_cast<double>(m)));
        } else {
          return static_cast<std::size_t>(
              std::ranges::count_if(degrees, [&](double d) { return d <= r.max_degrees; }));
        }
      },
      rule);
  if (q == 0) throw InputError("filter keeps no samples");
  if (q > m) {
    throw InputError("filter asks for q = " + std::to_string(q) + " of only " + std::to_string(m) +
                     " samples");
  }
  return q;
}

FilterReport select_samples(std::span<const double> degrees, const FilterConfig& config) {
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (!(degrees[i] >= 0.0 && degrees[i] <= 180.0)) {
      throw InputError("select_samples: degree at " + std::to_string(i) + " outside [0, 180]");
    }
  }
  const std::size_t q = resolve_keep_count(config.keep, degrees);

  FilterReport report;
  report.degrees.assign(degrees.begin(), degrees.end());
  report.order.resize(degrees.size());
  std::iota(report.order.begin(), report.order.end(), std::size_t{0});
  std::ranges::stable_sort(report.order, [&](std::size_t a, std::size_t b) { return degrees[a] < degrees[b]; });
  report.selected.assign(report.order.begin(), report.order.begin() + static_cast<std::ptrdiff_t>(q));
  return report;
}

FilterReport compute_filter_report(const Matrix& x, const FilterConfig& config) {
  const Matrix distances = manhattan_distance_matrix(x);
  SubspaceBasis basis = smallest_eigenvectors(distances, config.t);
  const Matrix projected = project_onto_subspace(x, basis.vectors);
  FilterReport report = select_samples(sample_degrees(x, projected), config);
  report.eigenvalues_used = std::move(basis.d_eigenvalues);
  return report;
}

FilteredSet filter_training_set(const Matrix& x, std::span<const double> y, const FilterConfig& config) {
  if (y.size() != x.rows()) {
    throw InputError("filter_training_set: " + std::to_string(y.size()) + " responses for " +
                     std::to_string(x.rows()) + " samples");
  }
  FilteredSet out;
  out.report = compute_filter_report(x, config);
  out.x = select_rows(x, out.report.selected);
  out.y.reserve(out.report.selected.size());
  for (std::size_t i : out.report.selected) out.y.push_back(y[i]);
  return out;
}

}  // namespace cellsieve
