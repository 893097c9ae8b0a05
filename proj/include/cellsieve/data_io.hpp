#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cellsieve/eval.hpp"
#include "cellsieve/linalg.hpp"

namespace cellsieve {

struct ExpressionMatrix {
  std::vector<std::string> sample_ids;  // one per row
  std::vector<std::string> gene_ids;    // one per column
  Matrix values;
};

struct ResponseVector {
  std::vector<std::string> sample_ids;
  std::vector<double> values;
};

// Readers take a `source` name that is used in error messages only. All
// parse errors report the 1-based line and column of the offending cell.

/// CSV with header `sample_id,<gene>,...` and one row per sample.
ExpressionMatrix read_expression(std::istream& in, const std::string& source);
ExpressionMatrix load_expression(const std::string& path);

/// CSV `sample_id,value`; an optional `sample_id,...` header line is skipped.
ResponseVector read_responses(std::istream& in, const std::string& source);
ResponseVector load_responses(const std::string& path);

/// CSV `sample_id,label`, label is sensitive|resistant in any case; an
/// optional header line is skipped.
ClinicalLabels read_labels(std::istream& in, const std::string& source);
ClinicalLabels load_labels(const std::string& path);

// Writers emit decimals with 17 significant digits, so a write/read cycle
// reproduces every double exactly.
void write_expression(std::ostream& out, const ExpressionMatrix& x);
void write_responses(std::ostream& out, const ResponseVector& y);
void write_labels(std::ostream& out, const ClinicalLabels& labels);

struct AlignedPair {
  ExpressionMatrix train;
  ExpressionMatrix test;
  std::vector<std::string> warnings;
};

/// Restricts both matrices to their shared genes, ordered as in `train`.
/// Warns when fewer than 90% of either side's genes survive; throws when no
/// gene is shared.
AlignedPair align_genes(const ExpressionMatrix& train, const ExpressionMatrix& test);

/// Reorders `responses` to follow `sample_ids`. Throws on missing IDs.
std::vector<double> responses_for(const ResponseVector& responses, const std::vector<std::string>& sample_ids);
std::vector<Outcome> outcomes_for(const ClinicalLabels& labels, const std::vector<std::string>& sample_ids);

// Subset of rows, keeping IDs in step.
ExpressionMatrix select_samples_by_index(const ExpressionMatrix& x, std::span<const std::size_t> rows);

std::string format_double(double v);

// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace cellsieve
