#pragma once

#include <stdexcept>
#include <string>

#include "ellipstat/types.hpp"

namespace ellipstat {

// Usage/config/parse failure; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comma-separated numeric matrix. A single leading header row is detected and
// skipped; missing values, ragged rows, and non-numeric cells are rejected.
DataMatrix read_csv(const std::string& path);

void write_csv(const std::string& path, const Matrix& m);

// Deterministic float formatting shared by every serialized output.
std::string format_double(double x);

}  // namespace ellipstat
