#include "serw/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "serw/log.hpp"

namespace serw {

namespace {

double parse_field(const std::string& field, const std::string& path, int line,
                   int column) {
  size_t begin = field.find_first_not_of(" \t\r");
  if (begin == std::string::npos)
    throw std::invalid_argument(path + ":" + std::to_string(line) +
                                ": column " + std::to_string(column) +
                                ": empty field");
  size_t end = field.find_last_not_of(" \t\r");
  const char* first = field.data() + begin;
  const char* last = field.data() + end + 1;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw std::invalid_argument(path + ":" + std::to_string(line) +
                                ": column " + std::to_string(column) +
                                ": not a number: '" +
                                field.substr(begin, end - begin + 1) + "'");
  return value;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    int column = 0;
    while (std::getline(ss, field, ',')) {
      ++column;
      row.push_back(parse_field(field, path, lineno, column));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument(
          path + ":" + std::to_string(lineno) + ": ragged row, expected " +
          std::to_string(rows.front().size()) + " columns, got " +
          std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument(path + ": no data rows");
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_value(const nlohmann::ordered_json& v, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + nlohmann::json(key).dump() + ": ";
        dump_value(value, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(item, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  const auto rows = read_rows(path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return m;
}

Eigen::VectorXd load_vector_csv(const std::string& path) {
  const Eigen::MatrixXd m = load_matrix_csv(path);
  if (m.cols() != 1)
    throw std::invalid_argument(path + ": expected one value per line, got " +
                                std::to_string(m.cols()) + " columns");
  return m.col(0);
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

MmSpace load_space(const std::string& path, const std::string& weights_path) {
  Eigen::MatrixXd points = load_matrix_csv(path);
  Eigen::VectorXd weights;
  if (!weights_path.empty()) {
    weights = load_vector_csv(weights_path);
    if (weights.size() != points.rows())
      throw std::invalid_argument(weights_path + ": " +
                                  std::to_string(weights.size()) +
                                  " weights for " +
                                  std::to_string(points.rows()) + " points");
    if (weights.minCoeff() <= 0.0)
      throw std::invalid_argument(weights_path +
                                  ": weights must be strictly positive");
    const double sum = weights.sum();
    if (std::abs(sum - 1.0) > 1e-6)
      log_info("weights in " + weights_path + " sum to " +
               format_double(sum) + "; renormalizing to 1");
    weights /= sum;
  }
  return MmSpace::euclidean(std::move(points), std::move(weights));
}

std::string dump_json(const nlohmann::ordered_json& value) {
  std::string out;
  dump_value(value, out, 0);
  out += "\n";
  return out;
}

void emit_report(const nlohmann::ordered_json& report,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write report: " + path);
  out << dump_json(report);
}

}  // namespace serw
