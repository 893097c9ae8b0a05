#include "cellsieve/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cellsieve/error.hpp"
#include "cellsieve/random.hpp"

namespace cellsieve {

double NormalSource::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = rng_.uniform_open();
  const double u2 = rng_.uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  return r * std::cos(angle);
}

namespace {

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i + 1);
  return buf;
}

void validate(const SynthConfig& c) {
  if (c.m < 2 || c.p < 2 || c.n < 1) throw InputError("synth: need m >= 2, p >= 2, n >= 1");
  if (!(c.noise_fraction >= 0.0 && c.noise_fraction < 1.0)) {
    throw InputError("synth: noise fraction must lie in [0, 1)");
  }
  if (!(c.clean_sigma > 0.0) || !(c.noise_sigma > 0.0)) throw InputError("synth: sigmas must be positive");
  if (!(c.noise_sigma > c.clean_sigma)) throw InputError("synth: noise_sigma must exceed clean_sigma");
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& config) {
  validate(config);
  const std::size_t m = config.m;
  const std::size_t n = config.n;
  const std::size_t p = config.p;
  NormalSource normal(config.seed);

  std::vector<double> w(n);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : w) v = normal.next() * w_scale;

  SynthData data;
  for (std::size_t a = 0; a < n; ++a) data.train.gene_ids.push_back(make_id("g", a));
  data.test.gene_ids = data.train.gene_ids;

  Matrix train(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = train.row(i);
    for (double& v : row) v = normal.next(0.0, config.clean_sigma);
    const double signal = dot(row, w);
    data.train.sample_ids.push_back(make_id("cell", i));
    data.train_y.sample_ids.push_back(data.train.sample_ids.back());
    data.train_y.values.push_back(signal + normal.next(0.0, 0.1));
  }

  // The 1e-9 slack keeps e.g. 0.2 * 200 from rounding up to 41.
  const auto n_corrupt = static_cast<std::size_t>(
      std::ceil(config.noise_fraction * static_cast<double>(m) - 1e-9));
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < n_corrupt; ++k) {
    std::swap(idx[k], idx[k + normal.engine().below(m - k)]);
  }
  data.corrupted.assign(m, false);
  for (std::size_t k = 0; k < n_corrupt; ++k) data.corrupted[idx[k]] = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (!data.corrupted[i]) continue;
    for (double& v : train.row(i)) v += normal.next(0.0, config.noise_sigma);
  }
  data.train.values = std::move(train);

  Matrix test(p, n);
  for (std::size_t i = 0; i < p; ++i) {
    auto row = test.row(i);
    for (double& v : row) v = normal.next(0.0, config.clean_sigma);
    data.test_signal.push_back(dot(row, w));
    data.test.sample_ids.push_back(make_id("patient", i));
  }
  data.test.values = std::move(test);

  std::vector<double> sorted = data.test_signal;
  std::ranges::sort(sorted);
  const double median = p % 2 == 1 ? sorted[p / 2] : 0.5 * (sorted[p / 2 - 1] + sorted[p / 2]);
  data.test_labels.sample_ids = data.test.sample_ids;
  for (double s : data.test_signal) {
    data.test_labels.outcomes.push_back(s < median ? Outcome::sensitive : Outcome::resistant);
  }
  return data;
}

void write_synthetic(const SynthData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  std::ostringstream s;
  write_expression(s, data.train);
  write_file_atomically(path("train_x.csv"), s.str());
  s.str("");
  write_responses(s, data.train_y);
  write_file_atomically(path("train_y.csv"), s.str());
  s.str("");
  write_expression(s, data.test);
  write_file_atomically(path("test_x.csv"), s.str());
  s.str("");
  write_labels(s, data.test_labels);
  write_file_atomically(path("test_labels.csv"), s.str());
  s.str("");
  s << "sample_id,corrupted\n";
  for (std::size_t i = 0; i < data.corrupted.size(); ++i) {
    s << data.train.sample_ids[i] << ',' << (data.corrupted[i] ? 1 : 0) << '\n';
  }
  write_file_atomically(path("noise_flags.csv"), s.str());
}

}  // namespace cellsieve
