#include "cellsieve/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "cellsieve/error.hpp"

namespace cellsieve {

namespace {

void check_scored(std::span<const double> scores, std::span<const Outcome> outcomes, const char* who) {
  if (scores.size() != outcomes.size()) {
    throw InputError(std::string(who) + ": " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(outcomes.size()) + " labels");
  }
  const auto pos = std::ranges::count(outcomes, Outcome::sensitive);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(outcomes.size())) {
    throw InputError(std::string(who) + ": both sensitive and resistant samples are required");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw InputError(std::string(who) + ": non-finite score");
  }
}

std::vector<double> effective(std::span<const double> scores, Polarity polarity) {
  std::vector<double> e(scores.begin(), scores.end());
  if (polarity == Polarity::lower_sensitive) {
    for (double& v : e) v = -v;
  }
  return e;
}

}  // namespace

double auc_midrank(std::span<const double> scores, std::span<const Outcome> outcomes, Polarity polarity) {
  check_scored(scores, outcomes, "auc_midrank");
  const std::vector<double> s = effective(scores, polarity);
  const std::size_t n = s.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  // Ranks are 1-based; a tie block spanning positions [begin, end) shares
  // the midrank (begin + 1 + end) / 2.
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n && s[order[end]] == s[order[begin]]) ++end;
    const double midrank = 0.5 * static_cast<double>(begin + 1 + end);
    for (std::size_t k = begin; k < end; ++k) {
      if (outcomes[order[k]] == Outcome::sensitive) {
        rank_sum += midrank;
        n_pos += 1.0;
      }
    }
    begin = end;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const Outcome> outcomes,
                                 Polarity polarity) {
  check_scored(scores, outcomes, "roc_points");
  const std::vector<double> s = effective(scores, polarity);
  const std::size_t n = s.size();
  const double n_pos = static_cast<double>(std::ranges::count(outcomes, Outcome::sensitive));
  const double n_neg = static_cast<double>(n) - n_pos;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  const double origin = polarity == Polarity::higher_sensitive ? std::numeric_limits<double>::infinity()
                                                               : -std::numeric_limits<double>::infinity();
  std::vector<RocPoint> points{{origin, 0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin;
    while (end < n && s[order[end]] == s[order[begin]]) {
      if (outcomes[order[end]] == Outcome::sensitive) tp += 1.0;
      else fp += 1.0;
      ++end;
    }
    points.push_back({scores[order[begin]], fp / n_neg, tp / n_pos});
    begin = end;
  }
  return points;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) / 2.0;
  }
  return area;
}

// ---------------------------------------------------------------------------

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxTerms = 100000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("incomplete_beta_reg: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers can supply whichever is
// known without cancellation.
double incomplete_beta_split(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double incomplete_beta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InputError("incomplete_beta_reg: a and b must be positive and finite");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw InputError("incomplete_beta_reg: x must lie in [0, 1]");
  return incomplete_beta_split(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw InputError("student_t_two_sided_p: df must be positive");
  if (std::isnan(t)) throw InputError("student_t_two_sided_p: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(incomplete_beta_split(df / 2.0, 0.5, x, y), 0.0, 1.0);
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, bool pooled_variance) {
  if (a.size() < 2 || b.size() < 2) throw InputError("t-test: each group needs at least 2 values");
  auto mean_var = [](std::span<const double> g) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double ss = 0.0;
    for (double v : g) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(g.size() - 1)};
  };
  const auto [mean_a, var_a] = mean_var(a);
  const auto [mean_b, var_b] = mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  TTestResult r;
  if (var_a == 0.0 && var_b == 0.0) {
    if (mean_a != mean_b) throw InputError("t-test: both groups constant with different means");
    r.df = na + nb - 2.0;
    return r;
  }

  if (pooled_variance) {
    const double pooled = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / (na + nb - 2.0);
    r.t = (mean_a - mean_b) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    r.df = na + nb - 2.0;
  } else {
    const double sa = var_a / na;
    const double sb = var_b / nb;
    r.t = (mean_a - mean_b) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  }
  r.p_two_sided = student_t_two_sided_p(r.t, r.df);
  return r;
}

double mauc(std::span<const double> aucs) {
  if (aucs.empty()) throw InputError("mauc: no AUC values");
  double s = 0.0;
  for (double v : aucs) s += v;
  return s / static_cast<double>(aucs.size());
}

EvalReport evaluate(std::span<const double> scores, std::span<const Outcome> outcomes, Polarity polarity,
                    bool pooled_variance) {
  EvalReport report;
  report.auc = auc_midrank(scores, outcomes, polarity);
  report.roc = roc_points(scores, outcomes, polarity);
  std::vector<double> sensitive;
  std::vector<double> resistant;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (outcomes[i] == Outcome::sensitive ? sensitive : resistant).push_back(scores[i]);
  }
  report.n_sensitive = sensitive.size();
  report.n_resistant = resistant.size();
  report.t_test = welch_t_test(sensitive, resistant, pooled_variance);
  return report;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
  out << "threshold,fpr,tpr\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
}

const char* to_string(Polarity p) {
  return p == Polarity::higher_sensitive ? "higher-sensitive" : "lower-sensitive";
}

const char* to_string(Outcome o) { return o == Outcome::sensitive ? "sensitive" : "resistant"; }

}  // namespace cellsieve
