#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cellsieve/linalg.hpp"

namespace cellsieve {

// How many lowest-degree samples to keep. Exactly one rule is active.
struct KeepCount {
  std::size_t q;
};
struct KeepFraction {
  double fraction;  // of m, in (0, 1]
};
struct KeepBelowDegrees {
  double max_degrees;  // keep samples with theta <= max_degrees
};
using KeepRule = std::variant<KeepCount, KeepFraction, KeepBelowDegrees>;

struct FilterConfig {
  std::size_t t = 1;  // number of smallest eigenvectors spanning the subspace
  KeepRule keep = KeepFraction{0.75};
};

struct FilterReport {
  std::vector<double> degrees;          // theta_i in degrees, per original sample
  std::vector<std::size_t> order;       // 0-based, degrees ascending, ties by index
  std::vector<std::size_t> selected;    // first q entries of order
  std::vector<double> eigenvalues_used; // t smallest eigenvalues of D = L L^T
};

/// Pairwise L1 distances between the rows of `x`. Requires at least two rows.
Matrix manhattan_distance_matrix(const Matrix& x);

struct SubspaceBasis {
  Matrix vectors;                   // m x t, orthonormal columns
  std::vector<double> d_eigenvalues;  // eigenvalues of D = L^2 for those columns
};

/// The t eigenvectors of D = L L^T with the smallest eigenvalues.
///
/// L is symmetric, so D = L^2 shares L's eigenvectors with squared
/// eigenvalues; only L is decomposed. Eigenvalues of D that agree to within
/// 1e-10 of the largest are treated as tied and ordered by the signed
/// eigenvalue of L, then lexicographically by the canonicalized vector.
SubspaceBasis smallest_eigenvectors(const Matrix& distances, std::size_t t);

/// V (V^T X) for a basis with orthonormal columns; the m x m projector is
/// never formed.
Matrix project_onto_subspace(const Matrix& x, const Matrix& basis);

/// Angle in degrees between each row of `x` and the same row of `projected`.
/// A zero projection gets 180. Zero rows in `x` are rejected.
std::vector<double> sample_degrees(const Matrix& x, const Matrix& projected);

// Resolves `rule` against the degree list (threshold mode needs the degrees).
std::size_t resolve_keep_count(const KeepRule& rule, std::span<const double> degrees);

FilterReport select_samples(std::span<const double> degrees, const FilterConfig& config);

/// Distance matrix, eigenvectors, projection, degrees and selection in one go.
FilterReport compute_filter_report(const Matrix& x, const FilterConfig& config);

struct FilteredSet {
  Matrix x;               // original (unprojected) rows, in report.selected order
  std::vector<double> y;
  FilterReport report;
};

FilteredSet filter_training_set(const Matrix& x, std::span<const double> y,
                                const FilterConfig& config);

}  // namespace cellsieve
