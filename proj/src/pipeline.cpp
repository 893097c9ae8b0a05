#include "cellsieve/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cellsieve/error.hpp"
#include "cellsieve/model_io.hpp"
#include "cellsieve/random.hpp"

namespace cellsieve {

namespace {

struct AlgorithmInfo {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::pa_svr_linear, "PA+SVR+L"}, {Algorithm::pa_svr_sigmoid, "PA+SVR+S"},
    {Algorithm::pa_rr, "PA+RR"},            {Algorithm::b_svr_linear, "B+SVR+L"},
    {Algorithm::b_svr_sigmoid, "B+SVR+S"},  {Algorithm::b_rr, "B+RR"},
};

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  for (const auto& info : kAlgorithms) {
    if (info.algorithm == a) return info.name;
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& info : kAlgorithms) {
    if (info.name == name) return info.algorithm;
  }
  throw InputError("unknown algorithm '" + std::string(name) + "'");
}

bool uses_filter(Algorithm a) {
  return a == Algorithm::pa_svr_linear || a == Algorithm::pa_svr_sigmoid || a == Algorithm::pa_rr;
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& info : kAlgorithms) v.push_back(info.algorithm);
    return v;
  }();
  return all;
}

std::size_t configured_threads() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CELLSIEVE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<std::size_t>(v);
  }
  return cap;
}

Dataset load_dataset(const RunConfig& config) {
  const ExpressionMatrix train = load_expression(config.train_x);
  const ExpressionMatrix test = load_expression(config.test_x);
  const ResponseVector responses = load_responses(config.train_y);
  const ClinicalLabels labels = load_labels(config.test_labels);

  AlignedPair aligned = align_genes(train, test);
  Dataset data;
  data.train_y = responses_for(responses, aligned.train.sample_ids);
  data.test_outcomes = outcomes_for(labels, aligned.test.sample_ids);
  data.train = std::move(aligned.train);
  data.test = std::move(aligned.test);
  data.warnings = std::move(aligned.warnings);
  return data;
}

namespace {

Model train_model(Algorithm algorithm, const Matrix& x, std::span<const double> y, const LearnerConfig& cfg) {
  if (algorithm == Algorithm::pa_rr || algorithm == Algorithm::b_rr) {
    return train_ridge(x, y, cfg.ridge_lambda);
  }
  SvrParams params;
  params.c = cfg.svr_c;
  params.epsilon = cfg.svr_epsilon;
  params.tol = cfg.svr_tol;
  params.max_iterations = cfg.svr_max_iterations;
  const bool sigmoid = algorithm == Algorithm::pa_svr_sigmoid || algorithm == Algorithm::b_svr_sigmoid;
  params.kernel = sigmoid ? KernelSpec::sigmoid(cfg.sigmoid_gamma, cfg.sigmoid_coef0) : KernelSpec::linear();
  return train_svr(x, y, params);
}

}  // namespace

RunReport run_on_dataset(const Dataset& data, const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (data.train_y.size() != data.train.values.rows()) {
    throw InputError("run: response count does not match training samples");
  }
  if (data.test_outcomes.size() != data.test.values.rows()) {
    throw InputError("run: label count does not match test samples");
  }

  RunReport report;
  report.algorithm = config.algorithm;
  report.m = data.train.values.rows();
  report.n = data.train.values.cols();
  report.train_ids = data.train.sample_ids;
  report.test_ids = data.test.sample_ids;
  report.test_outcomes = data.test_outcomes;
  report.warnings = data.warnings;

  std::vector<std::size_t> rows(report.m);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (uses_filter(config.algorithm)) {
    report.filter = compute_filter_report(data.train.values, config.filter);
    rows = report.filter->selected;
    std::ranges::sort(rows);
  }
  report.q = rows.size();

  const Matrix x = select_rows(data.train.values, rows);
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t i : rows) y.push_back(data.train_y[i]);

  report.model = train_model(config.algorithm, x, y, config.learner);
  report.scores = predict(report.model, data.test.values);
  report.eval = evaluate(report.scores, report.test_outcomes, config.polarity, config.pooled_t_test);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

nlohmann::ordered_json keep_json(const KeepRule& rule) {
  return std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        nlohmann::ordered_json j;
        if constexpr (std::is_same_v<R, KeepCount>) {
          j["mode"] = "count";
          j["value"] = r.q;
        } else if constexpr (std::is_same_v<R, KeepFraction>) {
          j["mode"] = "fraction";
          j["value"] = r.fraction;
        } else {
          j["mode"] = "max-degrees";
          j["value"] = r.max_degrees;
        }
        return j;
      },
      rule);
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(algorithm_name(c.algorithm));
  j["train_x"] = c.train_x;
  j["train_y"] = c.train_y;
  j["test_x"] = c.test_x;
  j["test_labels"] = c.test_labels;
  if (uses_filter(c.algorithm)) {
    j["filter"]["t"] = c.filter.t;
    j["filter"]["keep"] = keep_json(c.filter.keep);
  }
  auto& l = j["learner"];
  if (c.learner.ridge_lambda) l["ridge_lambda"] = *c.learner.ridge_lambda;
  else l["ridge_lambda"] = "loocv";
  l["svr_c"] = c.learner.svr_c;
  l["svr_epsilon"] = c.learner.svr_epsilon;
  l["svr_tol"] = c.learner.svr_tol;
  if (c.learner.sigmoid_gamma) l["sigmoid_gamma"] = *c.learner.sigmoid_gamma;
  else l["sigmoid_gamma"] = "1/n";
  l["sigmoid_coef0"] = c.learner.sigmoid_coef0;
  j["polarity"] = to_string(c.polarity);
  j["t_test"] = c.pooled_t_test ? "pooled" : "welch";
  j["seed"] = c.seed;
  return j;
}

nlohmann::ordered_json model_json(const Model& model) {
  nlohmann::ordered_json j;
  if (const auto* r = std::get_if<RidgeModel>(&model)) {
    j["kind"] = "ridge";
    j["lambda"] = r->lambda;
  } else {
    const auto& s = std::get<SvrModel>(model);
    j["kind"] = "svr";
    j["kernel"] = s.kernel.kind == KernelKind::linear ? "linear" : "sigmoid";
    if (s.kernel.gamma) j["gamma"] = *s.kernel.gamma;
    j["bias"] = s.bias;
    j["iterations"] = s.iterations;
    j["max_violation"] = s.max_violation;
    j["support_vectors"] = std::ranges::count_if(s.beta, [](double b) { return b != 0.0; });
  }
  return j;
}

}  // namespace

std::string report_json(const RunReport& report, const RunConfig& config) {
  nlohmann::ordered_json j;
  j["format"] = "cellsieve-report";
  j["version"] = 1;
  j["config"] = config_json(config);
  j["m"] = report.m;
  j["n"] = report.n;
  j["q"] = report.q;
  j["warnings"] = report.warnings;
  j["model"] = model_json(report.model);

  auto& e = j["evaluation"];
  e["auc"] = report.eval.auc;
  e["t_statistic"] = report.eval.t_test.t;
  e["degrees_of_freedom"] = report.eval.t_test.df;
  e["p_value"] = report.eval.t_test.p_two_sided;
  e["n_sensitive"] = report.eval.n_sensitive;
  e["n_resistant"] = report.eval.n_resistant;

  if (report.filter) {
    auto& f = j["filter"];
    f["eigenvalues_used"] = report.filter->eigenvalues_used;
    std::vector<std::size_t> rank(report.filter->order.size());
    for (std::size_t k = 0; k < rank.size(); ++k) rank[report.filter->order[k]] = k + 1;
    auto& table = f["degrees"];
    table = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.filter->degrees.size(); ++i) {
      nlohmann::ordered_json row;
      row["sample_id"] = report.train_ids[i];
      row["degree"] = report.filter->degrees[i];
      row["rank"] = rank[i];
      row["selected"] = rank[i] <= report.q;
      table.push_back(std::move(row));
    }
  }

  auto& preds = j["predictions"];
  preds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    nlohmann::ordered_json row;
    row["sample_id"] = report.test_ids[i];
    row["score"] = report.scores[i];
    row["label"] = to_string(report.test_outcomes[i]);
    preds.push_back(std::move(row));
  }
  if (config.record_timing) j["timing_seconds"] = report.seconds;
  return j.dump(2) + "\n";
}

std::string predictions_csv(const RunReport& report) {
  std::ostringstream out;
  out << "sample_id,score,label\n";
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    out << report.test_ids[i] << ',' << format_double(report.scores[i]) << ','
        << to_string(report.test_outcomes[i]) << '\n';
  }
  return out.str();
}

std::string degrees_csv(const FilterReport& filter, const std::vector<std::string>& sample_ids) {
  std::vector<std::size_t> rank(filter.order.size());
  for (std::size_t k = 0; k < rank.size(); ++k) rank[filter.order[k]] = k + 1;
  std::ostringstream out;
  out << "sample_id,degree,rank,selected\n";
  for (std::size_t i = 0; i < filter.degrees.size(); ++i) {
    out << sample_ids[i] << ',' << format_double(filter.degrees[i]) << ',' << rank[i] << ','
        << (rank[i] <= filter.selected.size() ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_run_outputs(const RunReport& report, const RunConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  write_file_atomically(path("report.json"), report_json(report, config));
  std::ostringstream roc;
  write_roc_csv(roc, report.eval.roc);
  write_file_atomically(path("roc.csv"), roc.str());
  write_file_atomically(path("predictions.csv"), predictions_csv(report));
  if (report.filter) write_file_atomically(path("degrees.csv"), degrees_csv(*report.filter, report.train_ids));
}

RunReport run_pipeline(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  RunReport report = run_on_dataset(data, config);
  if (!config.output_dir.empty()) write_run_outputs(report, config, config.output_dir);
  if (!config.save_model.empty()) save_model(config.save_model, report.model);
  return report;
}

// ---------------------------------------------------------------------------

ShrinkageResult run_shrinkage(const Dataset& data, const ShrinkageConfig& config) {
  const std::size_t m = data.train.values.rows();
  if (config.sizes.empty()) throw InputError("shrinkage: no sizes given");
  if (config.algorithms.empty()) throw InputError("shrinkage: no algorithms given");
  for (std::size_t k = 0; k < config.sizes.size(); ++k) {
    if (config.sizes[k] > m) {
      throw InputError("shrinkage: size " + std::to_string(config.sizes[k]) + " exceeds m = " + std::to_string(m));
    }
    if (config.sizes[k] < 2) throw InputError("shrinkage: sizes must be at least 2");
    if (k > 0 && config.sizes[k] > config.sizes[k - 1]) throw InputError("shrinkage: sizes must be non-increasing");
  }

  ShrinkageResult result;
  result.sizes = config.sizes;
  result.algorithms = config.algorithms;

  // Nested drops: the pool only ever shrinks.
  SplitMix64 rng(config.seed);
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t size : config.sizes) {
    while (pool.size() > size) {
      const std::size_t victim = rng.below(pool.size());
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    result.kept.push_back(pool);
  }

  std::vector<Dataset> subsets;
  for (const auto& kept : result.kept) {
    Dataset d;
    d.train = select_samples_by_index(data.train, kept);
    for (std::size_t i : kept) d.train_y.push_back(data.train_y[i]);
    d.test = data.test;
    d.test_outcomes = data.test_outcomes;
    d.warnings = data.warnings;
    subsets.push_back(std::move(d));
  }

  const std::size_t n_alg = config.algorithms.size();
  const std::size_t n_tasks = config.sizes.size() * n_alg;
  std::vector<RunReport> flat(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        RunConfig run = config.base;
        run.algorithm = config.algorithms[task % n_alg];
        flat[task] = run_on_dataset(subsets[task / n_alg], run);
      } catch (...) {
        errors[task] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(config.threads, 1, n_tasks);
  {
    std::vector<std::jthread> pool_threads;
    for (std::size_t t = 1; t < n_threads; ++t) pool_threads.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.runs.resize(config.sizes.size());
  for (std::size_t task = 0; task < n_tasks; ++task) result.runs[task / n_alg].push_back(std::move(flat[task]));
  for (std::size_t a = 0; a < n_alg; ++a) {
    std::vector<double> aucs;
    for (const auto& row : result.runs) aucs.push_back(row[a].eval.auc);
    result.mauc.push_back(mauc(aucs));
  }
  return result;
}

std::string shrinkage_summary_csv(const ShrinkageResult& result) {
  std::ostringstream out;
  out << "m,d";
  for (Algorithm a : result.algorithms) out << ',' << algorithm_name(a);
  out << ",q+PA\n";
  for (std::size_t k = 0; k < result.sizes.size(); ++k) {
    const auto& row = result.runs[k];
    out << result.sizes[k] << ',' << row.front().n;
    std::string q = "-";
    for (const auto& r : row) {
      out << ',' << format_double(r.eval.auc);
      if (r.filter) q = std::to_string(r.q);
    }
    out << ',' << q << '\n';
  }
  out << "MAUC,-";
  for (double v : result.mauc) out << ',' << format_double(v);
  out << ",-\n";
  return out.str();
}

}  // namespace cellsieve
