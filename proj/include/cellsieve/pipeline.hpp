#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellsieve/data_io.hpp"
#include "cellsieve/eval.hpp"
#include "cellsieve/learners.hpp"
#include "cellsieve/noise_filter.hpp"

namespace cellsieve {

// The six prediction algorithms: filtered (PA) or baseline (B) training
// sets, each with linear SVR, sigmoid SVR or ridge regression.
enum class Algorithm { pa_svr_linear, pa_svr_sigmoid, pa_rr, b_svr_linear, b_svr_sigmoid, b_rr };

std::string_view algorithm_name(Algorithm a);  // "PA+SVR+L", ...
Algorithm parse_algorithm(std::string_view name);
bool uses_filter(Algorithm a);
const std::vector<Algorithm>& all_algorithms();

struct LearnerConfig {
  std::optional<double> ridge_lambda;  // unset: exact LOOCV over the lambda grid
  double svr_c = 1.0;
  double svr_epsilon = 0.1;
  double svr_tol = 1e-3;
  long long svr_max_iterations = 10'000'000;
  std::optional<double> sigmoid_gamma;  // unset: 1 / n_genes
  double sigmoid_coef0 = 0.0;
};

struct RunConfig {
  std::string train_x;
  std::string train_y;
  std::string test_x;
  std::string test_labels;
  Algorithm algorithm = Algorithm::pa_rr;
  FilterConfig filter;  // ignored by baseline algorithms
  LearnerConfig learner;
  Polarity polarity = Polarity::lower_sensitive;
  bool pooled_t_test = false;
  std::uint64_t seed = 1;
  std::string output_dir;
  bool record_timing = true;
  std::string save_model;  // optional path for the trained model
};

// Aligned, ID-matched inputs of one run.
struct Dataset {
  ExpressionMatrix train;
  std::vector<double> train_y;  // in train row order
  ExpressionMatrix test;
  std::vector<Outcome> test_outcomes;  // in test row order
  std::vector<std::string> warnings;
};

Dataset load_dataset(const RunConfig& config);

struct RunReport {
  Algorithm algorithm = Algorithm::pa_rr;
  std::size_t m = 0;  // training samples offered to the algorithm
  std::size_t n = 0;  // genes after alignment
  std::size_t q = 0;  // training samples the learner used
  std::optional<FilterReport> filter;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<Outcome> test_outcomes;
  std::vector<double> scores;
  EvalReport eval;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  Model model;
};

/// Filter (PA only), train, predict and evaluate on in-memory data. The
/// learner sees the retained rows in their original order, so keeping every
/// sample reproduces the baseline exactly.
RunReport run_on_dataset(const Dataset& data, const RunConfig& config);

/// Loads the inputs named in `config`, runs, and writes report.json,
/// roc.csv, predictions.csv and (PA only) degrees.csv to the output dir.
RunReport run_pipeline(const RunConfig& config);

void write_run_outputs(const RunReport& report, const RunConfig& config, const std::string& dir);

std::string report_json(const RunReport& report, const RunConfig& config);
std::string predictions_csv(const RunReport& report);
std::string degrees_csv(const FilterReport& filter, const std::vector<std::string>& sample_ids);

struct ShrinkageConfig {
  RunConfig base;
  std::vector<Algorithm> algorithms;
  std::vector<std::size_t> sizes;  // non-increasing, each <= m
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct ShrinkageResult {
  std::vector<std::size_t> sizes;
  std::vector<Algorithm> algorithms;
  std::vector<std::vector<RunReport>> runs;  // [size][algorithm]
  std::vector<double> mauc;                  // per algorithm
  std::vector<std::vector<std::size_t>> kept;  // retained original rows per size
};

/// Nested random shrinkage of the training set: each size drops uniformly
/// chosen samples from the previous size's set, then every algorithm runs
/// on the same reduced set.
ShrinkageResult run_shrinkage(const Dataset& data, const ShrinkageConfig& config);

// Table with one row per size, one AUC column per algorithm and the PA q,
// closed by a MAUC row.
std::string shrinkage_summary_csv(const ShrinkageResult& result);

// Worker cap from CELLSIEVE_THREADS, else hardware concurrency.
std::size_t configured_threads();

}  // namespace cellsieve
