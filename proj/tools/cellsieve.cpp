// cellsieve: noise-filtered drug sensitivity prediction from the command line.
//
//   cellsieve synth      --out DIR [--m 200 --n 50 --p 100 --noise-fraction 0.2 ...]
//   cellsieve filter     --train-x X.csv --out DIR [--keep-frac 0.75]
//   cellsieve pipeline   --train-x --train-y --test-x --test-labels --algorithm PA+RR --out DIR
//   cellsieve shrinkage  ... --sizes 200,198,196 [--algorithm A ...] --out DIR
//   cellsieve evaluate   --scores S.csv --labels L.csv --out DIR
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid input, 3 solver
// did not converge.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellsieve/data_io.hpp"
#include "cellsieve/error.hpp"
#include "cellsieve/eval.hpp"
#include "cellsieve/noise_filter.hpp"
#include "cellsieve/pipeline.hpp"
#include "cellsieve/synthetic.hpp"

namespace fs = std::filesystem;
using namespace cellsieve;

namespace {

struct FilterFlags {
  std::size_t t = 1;
  std::optional<double> keep_frac;
  std::optional<std::size_t> keep_count;
  std::optional<double> keep_max_degrees;

  void add(CLI::App* app) {
    app->add_option("--eigenvectors", t, "Number of smallest eigenvectors spanning the subspace")
        ->check(CLI::PositiveNumber);
    auto* frac = app->add_option("--keep-frac", keep_frac, "Fraction of samples to keep (default 0.75)");
    auto* count = app->add_option("--keep-count", keep_count, "Number of samples to keep");
    auto* deg = app->add_option("--keep-max-degrees", keep_max_degrees, "Keep samples with degree <= this");
    frac->excludes(count)->excludes(deg);
    count->excludes(deg);
  }

  FilterConfig config() const {
    FilterConfig c;
    c.t = t;
    if (keep_count) c.keep = KeepCount{*keep_count};
    else if (keep_max_degrees) c.keep = KeepBelowDegrees{*keep_max_degrees};
    else if (keep_frac) c.keep = KeepFraction{*keep_frac};
    return c;
  }
};

struct RunFlags {
  RunConfig run;
  FilterFlags filter;
  std::string polarity = "lower-sensitive";
  bool no_timing = false;

  void add_inputs(CLI::App* app) {
    app->add_option("--train-x", run.train_x, "Training expression CSV")->required();
    app->add_option("--train-y", run.train_y, "Training responses CSV")->required();
    app->add_option("--test-x", run.test_x, "Test expression CSV")->required();
    app->add_option("--test-labels", run.test_labels, "Test clinical labels CSV")->required();
    filter.add(app);
    app->add_option("--lambda", run.learner.ridge_lambda, "Ridge penalty (default: LOOCV over a log grid)");
    app->add_option("--svr-c", run.learner.svr_c, "SVR box constraint C");
    app->add_option("--svr-epsilon", run.learner.svr_epsilon, "SVR tube width");
    app->add_option("--svr-tol", run.learner.svr_tol, "SVR KKT tolerance");
    app->add_option("--svr-max-iter", run.learner.svr_max_iterations, "SVR update cap");
    app->add_option("--sigmoid-gamma", run.learner.sigmoid_gamma, "Sigmoid kernel gamma (default 1/n)");
    app->add_option("--sigmoid-coef0", run.learner.sigmoid_coef0, "Sigmoid kernel coef0");
    app->add_option("--polarity", polarity, "Which scores indicate sensitivity")
        ->check(CLI::IsMember({"lower-sensitive", "higher-sensitive"}));
    app->add_flag("--pooled-t-test", run.pooled_t_test, "Pooled-variance Student t-test instead of Welch");
    app->add_option("--seed", run.seed, "Random seed");
    app->add_option("--out", run.output_dir, "Output directory")->required();
    app->add_flag("--no-timing", no_timing, "Omit timing from reports");
  }

  RunConfig finish() {
    run.filter = filter.config();
    run.polarity = polarity == "higher-sensitive" ? Polarity::higher_sensitive : Polarity::lower_sensitive;
    run.record_timing = !no_timing;
    return run;
  }
};

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int cmd_synth(const SynthConfig& config, const std::string& out) {
  const SynthData data = generate_synthetic(config);
  write_synthetic(data, out);
  std::size_t n_corrupt = std::ranges::count(data.corrupted, true);
  std::cout << "wrote " << config.m << " training and " << config.p << " test samples (" << n_corrupt
            << " corrupted) to " << out << '\n';
  return 0;
}

int cmd_filter(const std::string& train_x, const FilterConfig& config, const std::string& out) {
  const ExpressionMatrix x = load_expression(train_x);
  const FilterReport report = compute_filter_report(x.values, config);
  fs::create_directories(out);
  write_file_atomically(join_path(out, "degrees.csv"), degrees_csv(report, x.sample_ids));
  std::cout << "kept " << report.selected.size() << " of " << x.sample_ids.size() << " samples\n";
  return 0;
}

int cmd_pipeline(const RunConfig& config) {
  const RunReport report = run_pipeline(config);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << algorithm_name(config.algorithm) << ": m=" << report.m << " n=" << report.n << " q=" << report.q
            << " AUC=" << format_double(report.eval.auc) << " p=" << format_double(report.eval.t_test.p_two_sided)
            << '\n';
  return 0;
}

int cmd_shrinkage(ShrinkageConfig config, bool write_runs) {
  const Dataset data = load_dataset(config.base);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  config.threads = configured_threads();
  const ShrinkageResult result = run_shrinkage(data, config);
  const std::string& out = config.base.output_dir;
  fs::create_directories(out);
  const std::string summary = shrinkage_summary_csv(result);
  write_file_atomically(join_path(out, "summary.csv"), summary);
  if (write_runs) {
    for (const auto& row : result.runs) {
      for (const auto& report : row) {
        RunConfig run = config.base;
        run.algorithm = report.algorithm;
        const auto dir = fs::path(out) / "runs" / std::to_string(report.m) / std::string(algorithm_name(report.algorithm));
        write_run_outputs(report, run, dir.string());
      }
    }
  }
  std::cout << summary;
  return 0;
}

int cmd_evaluate(const std::string& scores_path, const std::string& labels_path, Polarity polarity, bool pooled,
                 const std::string& out) {
  const ResponseVector scores = load_responses(scores_path);
  const ClinicalLabels labels = load_labels(labels_path);
  const std::vector<Outcome> outcomes = outcomes_for(labels, scores.sample_ids);
  const EvalReport report = evaluate(scores.values, outcomes, polarity, pooled);

  nlohmann::ordered_json j;
  j["auc"] = report.auc;
  j["t_statistic"] = report.t_test.t;
  j["degrees_of_freedom"] = report.t_test.df;
  j["p_value"] = report.t_test.p_two_sided;
  j["n_sensitive"] = report.n_sensitive;
  j["n_resistant"] = report.n_resistant;
  j["polarity"] = to_string(polarity);
  j["t_test"] = pooled ? "pooled" : "welch";
  fs::create_directories(out);
  write_file_atomically(join_path(out, "evaluation.json"), j.dump(2) + "\n");
  std::ostringstream roc;
  write_roc_csv(roc, report.roc);
  write_file_atomically(join_path(out, "roc.csv"), roc.str());
  std::cout << "AUC=" << format_double(report.auc) << " p=" << format_double(report.t_test.p_two_sided) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-filtered drug sensitivity prediction"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth_cmd->add_option("--m", synth.m, "Training samples");
  synth_cmd->add_option("--n", synth.n, "Genes");
  synth_cmd->add_option("--p", synth.p, "Test patients");
  synth_cmd->add_option("--noise-fraction", synth.noise_fraction, "Fraction of corrupted training rows");
  synth_cmd->add_option("--clean-sigma", synth.clean_sigma, "Standard deviation of clean expression");
  synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "Standard deviation of the corruption");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string filter_x;
  std::string filter_out;
  FilterFlags filter_flags;
  auto* filter_cmd = app.add_subcommand("filter", "Score training samples and emit degrees.csv");
  filter_cmd->add_option("--train-x", filter_x, "Training expression CSV")->required();
  filter_flags.add(filter_cmd);
  filter_cmd->add_option("--out", filter_out, "Output directory")->required();

  RunFlags pipeline_flags;
  std::string pipeline_algorithm = "PA+RR";
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Filter, train, predict and evaluate one algorithm");
  pipeline_flags.add_inputs(pipeline_cmd);
  pipeline_cmd->add_option("--algorithm", pipeline_algorithm, "PA+SVR+L, PA+SVR+S, PA+RR, B+SVR+L, B+SVR+S or B+RR");
  pipeline_cmd->add_option("--save-model", pipeline_flags.run.save_model, "Write the trained model here");

  RunFlags shrink_flags;
  std::vector<std::string> shrink_algorithms;
  std::vector<std::size_t> shrink_sizes;
  bool shrink_write_runs = true;
  auto* shrink_cmd = app.add_subcommand("shrinkage", "Repeat the pipeline on nested random subsets");
  shrink_flags.add_inputs(shrink_cmd);
  shrink_cmd->add_option("--algorithm", shrink_algorithms, "Algorithms to run (repeatable; default all six)");
  shrink_cmd->add_option("--sizes", shrink_sizes, "Training-set sizes, non-increasing")->required()->delimiter(',');
  shrink_cmd->add_flag("!--summary-only", shrink_write_runs, "Skip the per-run report directories");

  std::string eval_scores;
  std::string eval_labels;
  std::string eval_out;
  std::string eval_polarity = "lower-sensitive";
  bool eval_pooled = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "AUC, ROC and t-test for a score file");
  eval_cmd->add_option("--scores", eval_scores, "CSV sample_id,score")->required();
  eval_cmd->add_option("--labels", eval_labels, "CSV sample_id,label")->required();
  eval_cmd->add_option("--polarity", eval_polarity, "Which scores indicate sensitivity")
      ->check(CLI::IsMember({"lower-sensitive", "higher-sensitive"}));
  eval_cmd->add_flag("--pooled-t-test", eval_pooled, "Pooled-variance Student t-test instead of Welch");
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, synth_out);
    if (*filter_cmd) return cmd_filter(filter_x, filter_flags.config(), filter_out);
    if (*pipeline_cmd) {
      RunConfig run = pipeline_flags.finish();
      run.algorithm = parse_algorithm(pipeline_algorithm);
      return cmd_pipeline(run);
    }
    if (*shrink_cmd) {
      ShrinkageConfig config;
      config.base = shrink_flags.finish();
      config.sizes = shrink_sizes;
      config.seed = config.base.seed;
      if (shrink_algorithms.empty()) config.algorithms = all_algorithms();
      for (const auto& name : shrink_algorithms) config.algorithms.push_back(parse_algorithm(name));
      return cmd_shrinkage(config, shrink_write_runs);
    }
    if (*eval_cmd) {
      const Polarity polarity =
          eval_polarity == "higher-sensitive" ? Polarity::higher_sensitive : Polarity::lower_sensitive;
      return cmd_evaluate(eval_scores, eval_labels, polarity, eval_pooled, eval_out);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
