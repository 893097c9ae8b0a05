#include "cellsieve/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cellsieve/error.hpp"

namespace cellsieve {

namespace {

std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line, std::size_t column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw InputError(location(source, line, column) + ": non-numeric cell '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw InputError(location(source, line, column) + ": non-finite value '" + cell + "'");
  }
  return v;
}

std::string lowercase(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void check_unique(const std::vector<std::string>& ids, const std::string& what, const std::string& source) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw InputError(source + ": empty " + what + " ID");
    if (!seen.insert(id).second) throw InputError(source + ": duplicate " + what + " ID '" + id + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

// Reads `sample_id,<field>` pairs and hands each field to `consume`.
template <typename Consume>
std::vector<std::string> read_pairs(std::istream& in, const std::string& source, Consume consume) {
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (ids.empty() && line_no == 1 && lowercase(fields[0]) == "sample_id") continue;
    if (fields.size() != 2) {
      throw InputError(location(source, line_no, 1) + ": expected 2 fields, found " +
                       std::to_string(fields.size()));
    }
    ids.push_back(fields[0]);
    consume(fields[1], line_no);
  }
  if (ids.empty()) throw InputError(source + ": no data rows");
  check_unique(ids, "sample", source);
  return ids;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExpressionMatrix read_expression(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw InputError(location(source, 1, 1) + ": header has no gene columns");

  ExpressionMatrix x;
  x.gene_ids.assign(header.begin() + 1, header.end());
  check_unique(x.gene_ids, "gene", source);
  const std::size_t n = x.gene_ids.size();

  std::vector<double> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n + 1) {
      throw InputError(location(source, line_no, 1) + ": expected " + std::to_string(n + 1) +
                       " fields, found " + std::to_string(fields.size()));
    }
    x.sample_ids.push_back(fields[0]);
    for (std::size_t a = 0; a < n; ++a) entries.push_back(parse_cell(fields[a + 1], source, line_no, a + 2));
  }
  if (x.sample_ids.empty()) throw InputError(source + ": no sample rows");
  check_unique(x.sample_ids, "sample", source);
  x.values = Matrix(x.sample_ids.size(), n, std::move(entries));
  return x;
}

ExpressionMatrix load_expression(const std::string& path) {
  auto in = open_input(path);
  return read_expression(in, path);
}

ResponseVector read_responses(std::istream& in, const std::string& source) {
  ResponseVector y;
  y.sample_ids = read_pairs(in, source, [&](const std::string& cell, std::size_t line_no) {
    y.values.push_back(parse_cell(cell, source, line_no, 2));
  });
  return y;
}

ResponseVector load_responses(const std::string& path) {
  auto in = open_input(path);
  return read_responses(in, path);
}

ClinicalLabels read_labels(std::istream& in, const std::string& source) {
  ClinicalLabels labels;
  labels.sample_ids = read_pairs(in, source, [&](const std::string& cell, std::size_t line_no) {
    std::string token = cell;
    if (!token.empty() && token.back() == '\r') token.pop_back();
    const std::string lower = lowercase(token);
    if (lower == "sensitive") labels.outcomes.push_back(Outcome::sensitive);
    else if (lower == "resistant") labels.outcomes.push_back(Outcome::resistant);
    else throw InputError(location(source, line_no, 2) + ": unknown label '" + token + "'");
  });
  return labels;
}

ClinicalLabels load_labels(const std::string& path) {
  auto in = open_input(path);
  return read_labels(in, path);
}

void write_expression(std::ostream& out, const ExpressionMatrix& x) {
  out << "sample_id";
  for (const auto& g : x.gene_ids) out << ',' << g;
  out << '\n';
  for (std::size_t i = 0; i < x.sample_ids.size(); ++i) {
    out << x.sample_ids[i];
    for (double v : x.values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_responses(std::ostream& out, const ResponseVector& y) {
  out << "sample_id,value\n";
  for (std::size_t i = 0; i < y.sample_ids.size(); ++i) {
    out << y.sample_ids[i] << ',' << format_double(y.values[i]) << '\n';
  }
}

void write_labels(std::ostream& out, const ClinicalLabels& labels) {
  out << "sample_id,label\n";
  for (std::size_t i = 0; i < labels.sample_ids.size(); ++i) {
    out << labels.sample_ids[i] << ',' << to_string(labels.outcomes[i]) << '\n';
  }
}

AlignedPair align_genes(const ExpressionMatrix& train, const ExpressionMatrix& test) {
  std::unordered_map<std::string, std::size_t> test_column;
  for (std::size_t a = 0; a < test.gene_ids.size(); ++a) test_column.emplace(test.gene_ids[a], a);

  std::vector<std::size_t> train_cols;
  std::vector<std::size_t> test_cols;
  for (std::size_t a = 0; a < train.gene_ids.size(); ++a) {
    const auto it = test_column.find(train.gene_ids[a]);
    if (it == test_column.end()) continue;
    train_cols.push_back(a);
    test_cols.push_back(it->second);
  }
  if (train_cols.empty()) throw InputError("align_genes: training and test sets share no genes");

  auto restrict = [](const ExpressionMatrix& src, const std::vector<std::size_t>& cols) {
    ExpressionMatrix out;
    out.sample_ids = src.sample_ids;
    for (std::size_t c : cols) out.gene_ids.push_back(src.gene_ids[c]);
    out.values = Matrix(src.values.rows(), cols.size());
    for (std::size_t i = 0; i < src.values.rows(); ++i)
      for (std::size_t k = 0; k < cols.size(); ++k) out.values(i, k) = src.values(i, cols[k]);
    return out;
  };

  AlignedPair out{restrict(train, train_cols), restrict(test, test_cols), {}};
  const double kept = static_cast<double>(train_cols.size());
  auto check_share = [&](const char* side, std::size_t total) {
    if (kept < 0.9 * static_cast<double>(total)) {
      out.warnings.push_back(std::string("only ") + std::to_string(train_cols.size()) + " of " +
                             std::to_string(total) + " " + side + " genes are shared");
    }
  };
  check_share("training", train.gene_ids.size());
  check_share("test", test.gene_ids.size());
  return out;
}

namespace {

template <typename T>
std::vector<T> reorder_by_id(const std::vector<std::string>& ids, const std::vector<T>& values,
                             const std::vector<std::string>& wanted, const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  std::vector<T> out;
  out.reserve(wanted.size());
  for (const auto& id : wanted) {
    const auto it = index.find(id);
    if (it == index.end()) throw InputError(std::string("no ") + what + " for sample '" + id + "'");
    out.push_back(values[it->second]);
  }
  return out;
}

}  // namespace

std::vector<double> responses_for(const ResponseVector& responses, const std::vector<std::string>& sample_ids) {
  return reorder_by_id(responses.sample_ids, responses.values, sample_ids, "response");
}

std::vector<Outcome> outcomes_for(const ClinicalLabels& labels, const std::vector<std::string>& sample_ids) {
  return reorder_by_id(labels.sample_ids, labels.outcomes, sample_ids, "label");
}

ExpressionMatrix select_samples_by_index(const ExpressionMatrix& x, std::span<const std::size_t> rows) {
  ExpressionMatrix out;
  out.gene_ids = x.gene_ids;
  for (std::size_t r : rows) out.sample_ids.push_back(x.sample_ids.at(r));
  out.values = select_rows(x.values, rows);
  return out;
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace cellsieve
