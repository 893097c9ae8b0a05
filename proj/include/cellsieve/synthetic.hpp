#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cellsieve/data_io.hpp"

namespace cellsieve {

struct SynthConfig {
  std::size_t m = 200;  // training samples
  std::size_t n = 50;   // genes
  std::size_t p = 100;  // test patients
  double noise_fraction = 0.2;
  double clean_sigma = 1.0;
  double noise_sigma = 5.0;
  std::uint64_t seed = 1;
};

struct SynthData {
  ExpressionMatrix train;
  ResponseVector train_y;
  ExpressionMatrix test;
  ClinicalLabels test_labels;
  std::vector<double> test_signal;  // g . w for each test row
  std::vector<bool> corrupted;      // per training row
};

/// Seeded synthetic drug-response data.
///
/// Draw order from one splitmix64/Box-Muller stream: weights w (n values,
/// scaled by 1/sqrt(n)); each training row g (n values, sd clean_sigma)
/// followed by its response noise (sd 0.1), y = g.w + noise; the corrupted
/// subset of ceil(rho*m) rows by partial Fisher-Yates; additive corruption
/// (sd noise_sigma) for those rows in ascending row order; then the test
/// rows. A test patient is sensitive iff g.w is below the median of the test
/// signals.
SynthData generate_synthetic(const SynthConfig& config);

/// Writes train_x.csv, train_y.csv, test_x.csv, test_labels.csv and
/// noise_flags.csv into `dir` (created if missing).
void write_synthetic(const SynthData& data, const std::string& dir);

}  // namespace cellsieve
