#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ellipstat/elliptical.hpp"
#include "ellipstat/types.hpp"

namespace ellipstat {

struct SigmaStructure {
  enum class Type { Identity, Ar1, Compound, Banded, Spiked };
  Type type = Type::Identity;
  double rho = 0.0;
  Eigen::Index bandwidth = 0;  // banded
  Eigen::Index spikes = 0;     // spiked
  double strength = 0.0;       // spiked
};

// Simulation covariance families; all outputs are verified positive definite.
Matrix build_sigma(const SigmaStructure& structure, Eigen::Index p);

struct DistributionSpec {
  std::string family = "gaussian";  // gaussian | student | mixture
  double nu = 3.0;
  std::vector<double> weights;
  std::vector<double> scales;
};

struct SignalSpec {
  std::string type = "none";  // none | dense_location | sparse_location
  double magnitude = 0.0;
  Eigen::Index count = 1;  // sparse_location
};

struct TestSpec {
  std::string name;
  std::map<std::string, double> options;
};

struct ScenarioConfig {
  DistributionSpec distribution;
  std::optional<Eigen::Index> n;   // one-sample
  std::optional<Eigen::Index> n1;  // two-sample
  std::optional<Eigen::Index> n2;
  Eigen::Index p = 0;
  SigmaStructure sigma_structure;
  SignalSpec signal;
  std::vector<TestSpec> tests;
  int reps = 1;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;

  bool two_sample() const { return n1.has_value(); }
  void validate() const;
};

// Strict JSON parse: unknown keys are rejected at every level.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

// Canonical serialization used for digests and echoing into outputs.
std::string scenario_to_json(const ScenarioConfig& config);

EllipticalSpec make_elliptical_spec(const DistributionSpec& dist, const Vector& mu,
                                    const Matrix& sigma);

Vector signal_location(const SignalSpec& signal, Eigen::Index p);

bool is_two_sample_test(const std::string& name);

// Dispatch a named test with per-test options on the given data.
TestResult run_named_test(const std::string& name,
                          const std::map<std::string, double>& options,
                          const DataMatrix& d1, const DataMatrix* d2);

std::vector<std::string> known_test_names();

}  // namespace ellipstat
