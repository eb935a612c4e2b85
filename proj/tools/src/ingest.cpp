#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "sparsecert_cli/cli.hpp"

namespace sparsecert::cli {

namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based character offset
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Field> split(std::string_view line, bool comma) {
  std::vector<Field> out;
  std::size_t pos = 0;
  if (comma) {
    while (true) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      std::size_t a = pos;
      std::size_t b = end;
      while (a < b && is_space(line[a])) ++a;
      while (b > a && is_space(line[b - 1])) --b;
      out.push_back({line.substr(a, b - a), a + 1});
      if (end == line.size()) break;
      pos = end + 1;
    }
    return out;
  }
  while (pos < line.size()) {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos == line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_space(line[end])) ++end;
    out.push_back({line.substr(pos, end - pos), pos + 1});
    pos = end;
  }
  return out;
}

bool blank(std::string_view line) {
  for (char c : line) {
    if (!is_space(c)) return c == '#';
  }
  return true;
}

double to_double(const Field& f, std::size_t line) {
  if (f.text.empty()) throw ParseError(line, f.column, "empty field");
  std::string_view s = f.text;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, f.column, "not a number: '" + std::string(f.text) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, f.column, "non-finite value");
  return value;
}

}  // namespace

Matrix parse_matrix(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::optional<bool> comma;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    if (!comma) comma = line.find(',') != std::string::npos;
    const std::vector<Field> fields = split(line, *comma);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      const std::size_t col = fields.size() > cols ? fields[cols].column : line.size() + 1;
      throw ParseError(line_no, col,
                       "expected " + std::to_string(cols) + " fields, found " +
                           std::to_string(fields.size()));
    }
    for (const Field& f : fields) values.push_back(to_double(f, line_no));
    ++rows;
  }
  if (rows == 0) throw ParseError(line_no + 1, 1, "no data rows");

  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
  }
  return m;
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open input file '" + path + "'");
  return parse_matrix(in);
}

void center_columns(Matrix& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
}

}  // namespace sparsecert::cli
