#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cellsieve {

enum class Outcome { sensitive, resistant };

struct ClinicalLabels {
  std::vector<std::string> sample_ids;
  std::vector<Outcome> outcomes;
};

// Which end of the score scale indicates a sensitive patient. Predicted
// IC50-like responses are lower for sensitive patients.
enum class Polarity { higher_sensitive, lower_sensitive };

struct RocPoint {
  double threshold;  // in raw score units; +/-inf for the (0, 0) origin
  double fpr;
  double tpr;
};

/// Mann-Whitney AUC with midranks: the probability that a sensitive sample
/// outranks a resistant one, ties counting one half.
double auc_midrank(std::span<const double> scores, std::span<const Outcome> outcomes, Polarity polarity);

/// One ROC point per distinct score, walking from the most to the least
/// sensitive-looking score, preceded by (0, 0).
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const Outcome> outcomes,
                                 Polarity polarity);

double trapezoid_area(std::span<const RocPoint> points);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

/// Two-sample t-test, Welch by default. Two constant groups with equal means
/// give t = 0, p = 1; with different means the test is undefined and throws.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, bool pooled_variance = false);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta_reg(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

double mauc(std::span<const double> aucs);

struct EvalReport {
  double auc = 0.0;
  std::vector<RocPoint> roc;
  TTestResult t_test;
  std::size_t n_sensitive = 0;
  std::size_t n_resistant = 0;
};

// Full evaluation of predicted scores against clinical outcomes. The t-test
// compares the raw scores of the sensitive group against the resistant group.
EvalReport evaluate(std::span<const double> scores, std::span<const Outcome> outcomes, Polarity polarity,
                    bool pooled_variance = false);

// CSV with header `threshold,fpr,tpr`.
void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

const char* to_string(Polarity p);
const char* to_string(Outcome o);

}  // namespace cellsieve
