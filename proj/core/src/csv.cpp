#include "ellipstat/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace ellipstat {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double* value) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  *value = std::strtod(begin, &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end)))
    ++end;
  return end != begin && end && *end == '\0' && std::isfinite(*value);
}

}  // namespace

DataMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);

    std::vector<double> parsed(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_double(fields[j], &parsed[j])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_content_line) {  // header row
        first_content_line = false;
        width = fields.size();
        continue;
      }
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": non-numeric or missing value");
    }
    if (first_content_line) {
      first_content_line = false;
      width = fields.size();
    } else if (fields.size() != width) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " fields, got " +
                        std::to_string(fields.size()));
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");

  DataMatrix out(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

void write_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace ellipstat
