#include "cellsieve/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "cellsieve/error.hpp"

namespace cellsieve {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t parse_count(const std::string& token, const std::string& context) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw InputError("model file: bad count '" + token + "' for " + context);
  }
  return std::stoul(token);
}

double parse_double(const std::string& token, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError("model file: bad number '" + token + "' in " + context);
  }
}

void write_rows(std::ostream& out, const std::vector<double>& coefficients, const Matrix& rows) {
  out << "rows\n";
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    out << fmt(coefficients[i]);
    for (double v : rows.row(i)) out << ' ' << fmt(v);
    out << '\n';
  }
}

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  out << "cellsieve-model " << kFormatVersion << '\n';
  if (const auto* ridge = std::get_if<RidgeModel>(&model)) {
    out << "kind ridge\nkernel linear\n";
    out << "lambda " << fmt(ridge->lambda) << '\n';
    out << "y_mean " << fmt(ridge->y_mean) << '\n';
    out << "q " << ridge->training_rows.rows() << '\n';
    out << "n " << ridge->column_means.size() << '\n';
    out << "column_means";
    for (double v : ridge->column_means) out << ' ' << fmt(v);
    out << '\n';
    write_rows(out, ridge->dual_coefficients, ridge->training_rows);
    return;
  }
  const auto& svr = std::get<SvrModel>(model);
  out << "kind svr\n";
  if (svr.kernel.kind == KernelKind::sigmoid) {
    out << "kernel sigmoid\n";
    out << "gamma " << fmt(svr.kernel.gamma.value_or(0.0)) << '\n';
    out << "coef0 " << fmt(svr.kernel.coef0) << '\n';
  } else {
    out << "kernel linear\n";
  }
  out << "C " << fmt(svr.c) << '\n';
  out << "epsilon " << fmt(svr.epsilon) << '\n';
  out << "bias " << fmt(svr.bias) << '\n';
  out << "q " << svr.support_rows.rows() << '\n';
  out << "n " << svr.support_rows.cols() << '\n';
  write_rows(out, svr.beta, svr.support_rows);
}

Model read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("model file: empty");
  {
    std::istringstream magic(line);
    std::string tag;
    int version = 0;
    if (!(magic >> tag >> version) || tag != "cellsieve-model") {
      throw InputError("model file: missing 'cellsieve-model' header");
    }
    if (version != kFormatVersion) {
      throw InputError("model file: unsupported version " + std::to_string(version));
    }
  }

  std::map<std::string, std::string> header;
  std::vector<double> column_means;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "rows") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "column_means") {
      std::string tok;
      while (ls >> tok) column_means.push_back(parse_double(tok, "column_means"));
      continue;
    }
    std::string value;
    if (!(ls >> value)) throw InputError("model file: line " + std::to_string(line_no) + " has no value");
    header[key] = value;
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw InputError("model file: missing key '" + key + "'");
    return it->second;
  };
  const std::size_t q = parse_count(need("q"), "q");
  const std::size_t n = parse_count(need("n"), "n");

  std::vector<double> coefficients(q);
  std::vector<double> entries;
  entries.reserve(q * n);
  for (std::size_t i = 0; i < q; ++i) {
    if (!std::getline(in, line)) throw InputError("model file: expected " + std::to_string(q) + " rows");
    std::istringstream ls(line);
    std::string tok;
    std::size_t count = 0;
    while (ls >> tok) {
      const double v = parse_double(tok, "row " + std::to_string(i));
      if (count == 0) coefficients[i] = v;
      else entries.push_back(v);
      ++count;
    }
    if (count != n + 1) throw InputError("model file: row " + std::to_string(i) + " has wrong width");
  }
  Matrix rows(q, n, std::move(entries));

  const std::string& kind = need("kind");
  if (kind == "ridge") {
    if (column_means.size() != n) throw InputError("model file: column_means length mismatch");
    RidgeModel m;
    m.dual_coefficients = std::move(coefficients);
    m.training_rows = std::move(rows);
    m.lambda = parse_double(need("lambda"), "lambda");
    m.y_mean = parse_double(need("y_mean"), "y_mean");
    m.column_means = std::move(column_means);
    return m;
  }
  if (kind != "svr") throw InputError("model file: unknown kind '" + kind + "'");
  SvrModel m;
  const std::string& kernel = need("kernel");
  if (kernel == "sigmoid") {
    m.kernel = KernelSpec::sigmoid(parse_double(need("gamma"), "gamma"), parse_double(need("coef0"), "coef0"));
  } else if (kernel == "linear") {
    m.kernel = KernelSpec::linear();
  } else {
    throw InputError("model file: unknown kernel '" + kernel + "'");
  }
  m.beta = std::move(coefficients);
  m.support_rows = std::move(rows);
  m.c = parse_double(need("C"), "C");
  m.epsilon = parse_double(need("epsilon"), "epsilon");
  m.bias = parse_double(need("bias"), "bias");
  return m;
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  write_model(out, model);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_model(in);
}

}  // namespace cellsieve
