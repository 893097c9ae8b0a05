// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "cellsieve/linalg.hpp"
#include "cellsieve/noise_filter.hpp"
#include "cellsieve/pipeline.hpp"
#include "cellsieve/synthetic.hpp"
#include "oracles.hpp"

using namespace cellsieve;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Collects the worst observed value of each checked quantity.
class Tracker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      first_failure_ = what;
    }
  }
  void worst(const std::string& name, double value, double limit) {
    double& w = worst_[name];
    w = std::max(w, value);
    limits_[name] = limit;
    check(value <= limit, name);
  }
  Verdict verdict(const std::string& extra = {}) const {
    std::ostringstream s;
    bool first = true;
    for (const auto& [name, value] : worst_) {
      s << (first ? "" : ", ") << name << " " << value << " (limit " << limits_.at(name) << ")";
      first = false;
    }
    if (!extra.empty()) s << (first ? "" : ", ") << extra;
    if (!pass_) s << "; first failure: " << first_failure_;
    return {pass_, s.str()};
  }

 private:
  bool pass_ = true;
  std::string first_failure_;
  std::map<std::string, double> worst_;
  std::map<std::string, double> limits_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Dataset dataset_from(const SynthData& d) {
  return Dataset{d.train, d.train_y.values, d.test, d.test_labels.outcomes, {}};
}

Verdict eigensolver() {
  const auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(1001);
  Tracker t;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng.below(29);
    const Matrix a = oracle::random_symmetric(rng, n);
    const double fa = frobenius_norm(a);
    const EigenDecomposition e = eigh_symmetric(a);
    double residual = 0.0, ortho = 0.0;
    Matrix recon(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = e.vectors.column(j);
      const auto av = matvec(a, v);
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) r += (av[i] - e.values[j] * v[i]) * (av[i] - e.values[j] * v[i]);
      residual = std::max(residual, std::sqrt(r) / fa);
      for (std::size_t l = 0; l < n; ++l) {
        const double g = dot(v, e.vectors.column(l));
        ortho = std::max(ortho, std::abs(g - (j == l ? 1.0 : 0.0)));
      }
      for (std::size_t r1 = 0; r1 < n; ++r1)
        for (std::size_t r2 = 0; r2 < n; ++r2) recon(r1, r2) += e.values[j] * v[r1] * v[r2];
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) diff += std::pow(recon.data()[i] - a.data()[i], 2);
    t.worst("residual/|A|_F", residual, 1e-8);
    t.worst("orthonormality", ortho, 1e-8);
    t.worst("reconstruction", std::sqrt(diff) / fa, 1e-7);
  }
  const double secs = seconds_since(start);
  t.check(secs < 5.0, "runtime");
  return t.verdict("200 matrices in " + fmt(secs) + " s (limit 5)");
}

Verdict noise_filter_invariants() {
  SplitMix64 rng(2002);
  Tracker t;
  std::size_t scaling_mismatches = 0;
  for (int k = 0; k < 60; ++k) {
    const std::size_t m = 4 + rng.below(27);
    const std::size_t n = 2 + rng.below(12);
    const Matrix x = oracle::random_matrix(rng, m, n);
    const std::size_t tdim = 1 + rng.below(std::min<std::size_t>(m - 1, 4));
    const SubspaceBasis basis = smallest_eigenvectors(manhattan_distance_matrix(x), tdim);
    const Matrix xbar = project_onto_subspace(x, basis.vectors);
    const auto degrees = sample_degrees(x, xbar);

    Matrix flipped = basis.vectors;
    for (std::size_t j = 0; j < tdim; ++j)
      if (rng.below(2) || j == 0)
        for (std::size_t i = 0; i < m; ++i) flipped(i, j) = -flipped(i, j);
    const auto degrees_flipped = sample_degrees(x, project_onto_subspace(x, flipped));
    double flip = 0.0;
    for (std::size_t i = 0; i < m; ++i) flip = std::max(flip, std::abs(degrees[i] - degrees_flipped[i]));
    t.worst("sign-flip degree change", flip, 1e-12);

    const Matrix twice = project_onto_subspace(xbar, basis.vectors);
    double idem = 0.0;
    for (std::size_t i = 0; i < m * n; ++i) idem = std::max(idem, std::abs(twice.data()[i] - xbar.data()[i]));
    t.worst("idempotence (relative)", idem / std::max(frobenius_norm(xbar), 1e-300), 1e-10);

    const double c = 0.01 + 100.0 * rng.uniform_open();
    Matrix scaled = x;
    for (double& v : scaled.data()) v *= c;
    const FilterConfig cfg{tdim, KeepFraction{0.75}};
    const auto s1 = compute_filter_report(x, cfg).selected;
    const auto s2 = compute_filter_report(scaled, cfg).selected;
    if (std::set(s1.begin(), s1.end()) != std::set(s2.begin(), s2.end())) ++scaling_mismatches;

    // Rank of the t = 1 projection: every row is a multiple of one vector.
    const SubspaceBasis b1 = smallest_eigenvectors(manhattan_distance_matrix(x), 1);
    const Matrix p1 = project_onto_subspace(x, b1.vectors);
    const EigenDecomposition g = eigh_symmetric(matmul_transposed_left(p1, p1));
    const double top = g.values.back();
    const double second = g.values.size() > 1 ? g.values[g.values.size() - 2] : 0.0;
    t.worst("t=1 second singular value ratio", top > 0 ? std::sqrt(std::max(second, 0.0) / top) : 0.0, 1e-6);
  }
  t.check(scaling_mismatches == 0, "scaling invariance");
  return t.verdict("selected-set changes under scaling " + std::to_string(scaling_mismatches) + "/60");
}

Verdict learner_oracles() {
  SplitMix64 rng(3003);
  Tracker t;
  for (int k = 0; k < 50; ++k) {
    const std::size_t q = 3 + rng.below(18);
    const std::size_t n = 1 + rng.below(10);
    const Matrix x = oracle::random_matrix(rng, q, n);
    std::vector<double> y(q);
    for (double& v : y) v = 4.0 * rng.uniform_open() - 2.0;
    const Matrix test = oracle::random_matrix(rng, 4, n);
    const double lambda = std::pow(10.0, 4.0 * rng.uniform_open() - 2.0);
    const auto dual = predict(train_ridge(x, y, lambda), test);
    const auto primal = oracle::primal_ridge_predict(x, y, lambda, test);
    for (std::size_t p = 0; p < dual.size(); ++p)
      t.worst("ridge dual vs primal (relative)", std::abs(dual[p] - primal[p]) / std::max(1.0, std::abs(primal[p])), 1e-8);

    const auto grid = ridge_lambda_grid();
    const LooCurve curve = ridge_loo_curve(x, y, grid);
    for (std::size_t l = 0; l < grid.size(); ++l) {
      const double ref = oracle::explicit_loo_mse(x, y, grid[l]);
      t.worst("LOOCV vs refits (relative)", std::abs(curve.mean_squared_errors[l] - ref) / ref, 1e-8);
    }
  }
  for (int k = 0; k < 20; ++k) {
    const std::size_t q = 3 + rng.below(10);
    const std::size_t n = 1 + rng.below(6);
    const Matrix x = oracle::random_matrix(rng, q, n);
    std::vector<double> y(q);
    for (double& v : y) v = 4.0 * rng.uniform_open() - 2.0;
    for (const KernelSpec& kernel : {KernelSpec::linear(), KernelSpec::sigmoid()}) {
      SvrParams params;
      params.kernel = kernel;
      const SvrModel model = train_svr(x, y, params);
      const Matrix gram = kernel_matrix(model.kernel, x);
      const auto pg = oracle::svr_projected_gradient(gram, y, params.c, params.epsilon);
      t.worst("SVR objective vs projected gradient (relative)",
              std::abs(model.objective - pg.objective) / std::max(std::abs(pg.objective), 1e-12), 1e-4);
      t.worst("SVR KKT violation", oracle::svr_kkt_violation(gram, y, model.beta, params.c, params.epsilon), 1e-3);
    }
  }
  return t.verdict();
}

Verdict eval_oracles() {
  SplitMix64 rng(4004);
  Tracker t;
  std::size_t auc_mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.below(60);
    const std::uint64_t levels = k % 4 == 0 ? 0 : 1 + rng.below(4);  // mostly heavy ties
    std::vector<double> scores(n);
    std::vector<Outcome> outcomes(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = levels ? static_cast<double>(rng.below(levels)) : rng.uniform_open();
      outcomes[i] = rng.below(2) ? Outcome::sensitive : Outcome::resistant;
    }
    outcomes[0] = Outcome::sensitive;
    outcomes[1] = Outcome::resistant;
    for (Polarity pol : {Polarity::higher_sensitive, Polarity::lower_sensitive}) {
      const double auc = auc_midrank(scores, outcomes, pol);
      if (auc != oracle::pair_count_auc(scores, outcomes, pol == Polarity::lower_sensitive)) ++auc_mismatches;
      t.worst("|trapezoid - AUC|", std::abs(trapezoid_area(roc_points(scores, outcomes, pol)) - auc), 1e-12);
    }
  }
  t.check(auc_mismatches == 0, "AUC vs pair count");
  for (double df : {1.0, 2.0, 3.7, 8.0, 25.0, 100.0})
    for (double tv : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0})
      t.worst("|p - quadrature|", std::abs(student_t_two_sided_p(tv, df) - oracle::t_tail_quadrature(tv, df)), 1e-8);
  return t.verdict("AUC mismatches vs pair count " + std::to_string(auc_mismatches) + "/200");
}

Verdict baseline_equivalence() {
  const SynthData d = generate_synthetic(SynthConfig{});
  const Dataset data = dataset_from(d);
  Tracker t;
  const std::pair<Algorithm, Algorithm> pairs[] = {{Algorithm::pa_svr_linear, Algorithm::b_svr_linear},
                                                   {Algorithm::pa_svr_sigmoid, Algorithm::b_svr_sigmoid},
                                                   {Algorithm::pa_rr, Algorithm::b_rr}};
  for (auto [pa, b] : pairs) {
    RunConfig cp;
    cp.algorithm = pa;
    cp.filter.keep = KeepCount{data.train.sample_ids.size()};
    RunConfig cb;
    cb.algorithm = b;
    const auto sp = run_on_dataset(data, cp).scores;
    const auto sb = run_on_dataset(data, cb).scores;
    double diff = 0.0;
    for (std::size_t i = 0; i < sp.size(); ++i) diff = std::max(diff, std::abs(sp[i] - sb[i]));
    t.worst("max score difference " + std::string(algorithm_name(pa)) + " vs " + std::string(algorithm_name(b)),
            diff, 1e-10);
  }
  return t.verdict();
}

// Frozen from the first run of this criterion on seed 1.
constexpr double kFrozenDegreeMargin = 0.125455;
constexpr double kFrozenDroppedCorrupt = 0.15;
constexpr double kFrozenAucGain = -0.0116;

Verdict synthetic_efficacy() {
  const auto start = std::chrono::steady_clock::now();
  SynthConfig cfg;  // m 200, n 50, p 100, rho 0.2, noise 5x clean, seed 1
  const SynthData d = generate_synthetic(cfg);
  const Dataset data = dataset_from(d);

  RunConfig pa;
  pa.algorithm = Algorithm::pa_rr;
  pa.filter = FilterConfig{1, KeepFraction{0.8}};
  RunConfig b;
  b.algorithm = Algorithm::b_rr;
  const RunReport rp = run_on_dataset(data, pa);
  const RunReport rb = run_on_dataset(data, b);

  const auto& degrees = rp.filter->degrees;
  double corrupt = 0.0, clean = 0.0;
  std::size_t nc = 0;
  for (std::size_t i = 0; i < cfg.m; ++i) {
    (d.corrupted[i] ? corrupt : clean) += degrees[i];
    nc += d.corrupted[i];
  }
  const double margin = corrupt / nc - clean / (cfg.m - nc);
  const std::set<std::size_t> kept(rp.filter->selected.begin(), rp.filter->selected.end());
  std::size_t dropped = 0, dropped_corrupt = 0;
  for (std::size_t i = 0; i < cfg.m; ++i) {
    if (kept.count(i)) continue;
    ++dropped;
    dropped_corrupt += d.corrupted[i];
  }
  const double frac = static_cast<double>(dropped_corrupt) / dropped;
  const double gain = rp.eval.auc - rb.eval.auc;
  const double secs = seconds_since(start);

  Tracker t;
  t.check(margin > 0.0, "(a) corrupted mean degree > clean");
  t.check(frac >= 0.70, "(b) dropped corrupted fraction >= 0.70");
  t.check(gain >= 0.0, "(c) PA+RR AUC >= B+RR AUC");
  t.check(std::abs(margin - kFrozenDegreeMargin) <= 0.02, "(a) frozen margin");
  t.check(std::abs(frac - kFrozenDroppedCorrupt) <= 0.02, "(b) frozen fraction");
  t.check(std::abs(gain - kFrozenAucGain) <= 0.02, "(c) frozen AUC gain");
  t.check(secs < 60.0, "runtime");
  std::ostringstream s;
  s << "(a) degree margin " << fmt(margin) << " (need > 0), (b) " << dropped_corrupt << "/" << dropped
    << " dropped are corrupted = " << fmt(frac) << " (need >= 0.7), (c) AUC PA+RR " << fmt(rp.eval.auc) << " vs B+RR "
    << fmt(rb.eval.auc) << " gain " << fmt(gain) << " (need >= 0), " << fmt(secs) << " s";
  return t.verdict(s.str());
}

Verdict shrinkage_reproducibility() {
  const Dataset data = dataset_from(generate_synthetic(SynthConfig{}));
  ShrinkageConfig sc;
  sc.algorithms = all_algorithms();
  sc.sizes = {200, 198, 196, 194, 192};
  sc.seed = 7;
  sc.threads = configured_threads();
  const ShrinkageResult a = run_shrinkage(data, sc);
  const ShrinkageResult b = run_shrinkage(data, sc);
  Tracker t;
  t.check(shrinkage_summary_csv(a) == shrinkage_summary_csv(b), "byte-identical summaries");
  for (std::size_t k = 0; k < sc.algorithms.size(); ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < sc.sizes.size(); ++s) sum += a.runs[s][k].eval.auc;
    t.worst("|MAUC - mean AUC|", std::abs(a.mauc[k] - sum / sc.sizes.size()), 1e-12);
  }
  return t.verdict(std::string("summaries ") +
                   (shrinkage_summary_csv(a) == shrinkage_summary_csv(b) ? "identical" : "differ"));
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"1 eigensolver", eigensolver},
      {"2 noise-filter invariants", noise_filter_invariants},
      {"3 learner oracles", learner_oracles},
      {"4 eval oracles", eval_oracles},
      {"5 baseline equivalence", baseline_equivalence},
      {"6 synthetic filtering efficacy", synthetic_efficacy},
      {"7 shrinkage reproducibility", shrinkage_reproducibility},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                seconds_since(start));
  }
  std::printf("SKIP criterion 8 published-data reproduction: needs externally preprocessed matrices\n");
  return failures == 0 ? 0 : 1;
}
