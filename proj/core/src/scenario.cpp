#include "ellipstat/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ellipstat/csv.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/linalg.hpp"
#include "ellipstat/location_tests.hpp"
#include "ellipstat/matrix_tests.hpp"

namespace ellipstat {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(context + ": unknown key '" + it.key() + "'");
  }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw ConfigError(context + ": missing numeric field '" + key + "'");
  return obj[key].get<double>();
}

}  // namespace

Matrix build_sigma(const SigmaStructure& s, Eigen::Index p) {
  require(p >= 1, ErrorCode::InvalidInput, "p must be positive");
  Matrix out;
  switch (s.type) {
    case SigmaStructure::Type::Identity:
      out = Matrix::Identity(p, p);
      break;
    case SigmaStructure::Type::Ar1: {
      require(std::abs(s.rho) < 1.0, ErrorCode::InvalidInput, "ar1 needs |rho| < 1");
      out.resize(p, p);
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
          out(i, j) = std::pow(s.rho, std::abs(static_cast<double>(i - j)));
      break;
    }
    case SigmaStructure::Type::Compound: {
      require(s.rho > -1.0 / static_cast<double>(p - 1) && s.rho < 1.0,
              ErrorCode::InvalidInput, "compound rho outside the PD range");
      out = (1.0 - s.rho) * Matrix::Identity(p, p) +
            s.rho * Matrix::Ones(p, p);
      break;
    }
    case SigmaStructure::Type::Banded: {
      require(std::abs(s.rho) < 1.0, ErrorCode::InvalidInput,
              "banded needs |rho| < 1");
      SigmaStructure ar1{SigmaStructure::Type::Ar1, s.rho, 0, 0, 0.0};
      out = band(build_sigma(ar1, p), s.bandwidth);
      break;
    }
    case SigmaStructure::Type::Spiked: {
      require(s.spikes >= 1 && s.spikes < p, ErrorCode::InvalidInput,
              "spiked needs 1 <= K < p");
      require(s.strength > 0.0, ErrorCode::InvalidInput,
              "spike strength must be positive");
      // Deterministic orthonormal directions from the DCT-II basis.
      out = Matrix::Identity(p, p);
      for (Eigen::Index k = 1; k <= s.spikes; ++k) {
        Vector v(p);
        for (Eigen::Index i = 0; i < p; ++i)
          v(i) = std::sqrt(2.0 / static_cast<double>(p)) *
                 std::cos(M_PI * (2.0 * static_cast<double>(i) + 1.0) *
                          static_cast<double>(k) / (2.0 * static_cast<double>(p)));
        out += s.strength * v * v.transpose();
      }
      break;
    }
  }
  EigenSystem es = sym_eigen(out);
  require(es.eigenvalues.minCoeff() > 0.0, ErrorCode::InvalidInput,
          "structure parameters produce a non-PD matrix");
  return out;
}

void ScenarioConfig::validate() const {
  if (p < 1) throw ConfigError("p must be >= 1");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (n.has_value() == n1.has_value())
    throw ConfigError("exactly one of 'n' or ('n1','n2') must be given");
  if (n1.has_value() != n2.has_value())
    throw ConfigError("'n1' and 'n2' must be given together");
  if (tests.empty()) throw ConfigError("at least one test must be listed");
  for (const TestSpec& t : tests) {
    if (is_two_sample_test(t.name) != two_sample())
      throw ConfigError("test '" + t.name + "' does not match the sample layout");
  }
  if (distribution.family != "gaussian" && distribution.family != "student" &&
      distribution.family != "mixture")
    throw ConfigError("unknown distribution family '" + distribution.family + "'");
  if (signal.type != "none" && signal.type != "dense_location" &&
      signal.type != "sparse_location")
    throw ConfigError("unknown signal type '" + signal.type + "'");
}

namespace {

SigmaStructure parse_sigma(const json& obj) {
  reject_unknown_keys(obj, {"type", "rho", "k", "K", "strength"}, "sigma_structure");
  if (!obj.contains("type") || !obj["type"].is_string())
    throw ConfigError("sigma_structure: missing 'type'");
  const std::string type = obj["type"].get<std::string>();
  SigmaStructure out;
  if (type == "identity") {
    out.type = SigmaStructure::Type::Identity;
  } else if (type == "ar1") {
    out.type = SigmaStructure::Type::Ar1;
    out.rho = require_number(obj, "rho", "sigma_structure");
  } else if (type == "compound") {
    out.type = SigmaStructure::Type::Compound;
    out.rho = require_number(obj, "rho", "sigma_structure");
  } else if (type == "banded") {
    out.type = SigmaStructure::Type::Banded;
    out.rho = require_number(obj, "rho", "sigma_structure");
    out.bandwidth =
        static_cast<Eigen::Index>(require_number(obj, "k", "sigma_structure"));
  } else if (type == "spiked") {
    out.type = SigmaStructure::Type::Spiked;
    out.spikes =
        static_cast<Eigen::Index>(require_number(obj, "K", "sigma_structure"));
    out.strength = require_number(obj, "strength", "sigma_structure");
  } else {
    throw ConfigError("sigma_structure: unknown type '" + type + "'");
  }
  return out;
}

DistributionSpec parse_distribution(const json& obj) {
  reject_unknown_keys(obj, {"family", "nu", "weights", "scales"}, "distribution");
  DistributionSpec out;
  if (!obj.contains("family") || !obj["family"].is_string())
    throw ConfigError("distribution: missing 'family'");
  out.family = obj["family"].get<std::string>();
  if (obj.contains("nu")) out.nu = obj["nu"].get<double>();
  if (obj.contains("weights"))
    out.weights = obj["weights"].get<std::vector<double>>();
  if (obj.contains("scales")) out.scales = obj["scales"].get<std::vector<double>>();
  return out;
}

SignalSpec parse_signal(const json& obj) {
  reject_unknown_keys(obj, {"type", "magnitude", "count"}, "signal");
  SignalSpec out;
  if (obj.contains("type")) out.type = obj["type"].get<std::string>();
  if (obj.contains("magnitude")) out.magnitude = obj["magnitude"].get<double>();
  if (obj.contains("count"))
    out.count = static_cast<Eigen::Index>(obj["count"].get<double>());
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root,
                      {"distribution", "n", "n1", "n2", "p", "sigma_structure",
                       "signal", "tests", "reps", "alpha", "seed", "threads"},
                      "config");

  ScenarioConfig cfg;
  if (!root.contains("distribution"))
    throw ConfigError("config: missing 'distribution'");
  cfg.distribution = parse_distribution(root["distribution"]);
  if (root.contains("n"))
    cfg.n = static_cast<Eigen::Index>(require_number(root, "n", "config"));
  if (root.contains("n1"))
    cfg.n1 = static_cast<Eigen::Index>(require_number(root, "n1", "config"));
  if (root.contains("n2"))
    cfg.n2 = static_cast<Eigen::Index>(require_number(root, "n2", "config"));
  cfg.p = static_cast<Eigen::Index>(require_number(root, "p", "config"));
  if (root.contains("sigma_structure"))
    cfg.sigma_structure = parse_sigma(root["sigma_structure"]);
  if (root.contains("signal")) cfg.signal = parse_signal(root["signal"]);

  if (!root.contains("tests") || !root["tests"].is_array())
    throw ConfigError("config: 'tests' must be an array");
  for (const json& t : root["tests"]) {
    if (!t.is_object()) throw ConfigError("tests: entries must be objects");
    reject_unknown_keys(t, {"name", "options"}, "tests");
    TestSpec spec;
    if (!t.contains("name") || !t["name"].is_string())
      throw ConfigError("tests: missing 'name'");
    spec.name = t["name"].get<std::string>();
    if (t.contains("options")) {
      if (!t["options"].is_object())
        throw ConfigError("tests: 'options' must be an object");
      for (auto it = t["options"].begin(); it != t["options"].end(); ++it) {
        if (!it.value().is_number())
          throw ConfigError("tests: option '" + it.key() + "' must be numeric");
        spec.options[it.key()] = it.value().get<double>();
      }
    }
    cfg.tests.push_back(std::move(spec));
  }

  if (root.contains("reps")) cfg.reps = static_cast<int>(require_number(root, "reps", "config"));
  if (root.contains("alpha")) cfg.alpha = require_number(root, "alpha", "config");
  if (root.contains("seed"))
    cfg.seed = static_cast<std::uint64_t>(require_number(root, "seed", "config"));
  if (root.contains("threads"))
    cfg.threads = static_cast<int>(require_number(root, "threads", "config"));

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json root;
  root["distribution"]["family"] = cfg.distribution.family;
  if (cfg.distribution.family == "student")
    root["distribution"]["nu"] = cfg.distribution.nu;
  if (cfg.distribution.family == "mixture") {
    root["distribution"]["weights"] = cfg.distribution.weights;
    root["distribution"]["scales"] = cfg.distribution.scales;
  }
  if (cfg.n) root["n"] = static_cast<long>(*cfg.n);
  if (cfg.n1) root["n1"] = static_cast<long>(*cfg.n1);
  if (cfg.n2) root["n2"] = static_cast<long>(*cfg.n2);
  root["p"] = static_cast<long>(cfg.p);
  switch (cfg.sigma_structure.type) {
    case SigmaStructure::Type::Identity:
      root["sigma_structure"]["type"] = "identity";
      break;
    case SigmaStructure::Type::Ar1:
      root["sigma_structure"]["type"] = "ar1";
      root["sigma_structure"]["rho"] = cfg.sigma_structure.rho;
      break;
    case SigmaStructure::Type::Compound:
      root["sigma_structure"]["type"] = "compound";
      root["sigma_structure"]["rho"] = cfg.sigma_structure.rho;
      break;
    case SigmaStructure::Type::Banded:
      root["sigma_structure"]["type"] = "banded";
      root["sigma_structure"]["rho"] = cfg.sigma_structure.rho;
      root["sigma_structure"]["k"] = static_cast<long>(cfg.sigma_structure.bandwidth);
      break;
    case SigmaStructure::Type::Spiked:
      root["sigma_structure"]["type"] = "spiked";
      root["sigma_structure"]["K"] = static_cast<long>(cfg.sigma_structure.spikes);
      root["sigma_structure"]["strength"] = cfg.sigma_structure.strength;
      break;
  }
  root["signal"]["type"] = cfg.signal.type;
  if (cfg.signal.type != "none") {
    root["signal"]["magnitude"] = cfg.signal.magnitude;
    if (cfg.signal.type == "sparse_location")
      root["signal"]["count"] = static_cast<long>(cfg.signal.count);
  }
  root["tests"] = json::array();
  for (const TestSpec& t : cfg.tests) {
    json entry;
    entry["name"] = t.name;
    if (!t.options.empty()) entry["options"] = t.options;
    root["tests"].push_back(entry);
  }
  root["reps"] = cfg.reps;
  root["alpha"] = cfg.alpha;
  root["seed"] = cfg.seed;
  root["threads"] = cfg.threads;
  return root.dump(2);
}

EllipticalSpec make_elliptical_spec(const DistributionSpec& dist, const Vector& mu,
                                    const Matrix& sigma) {
  if (dist.family == "gaussian") return EllipticalSpec::gaussian(mu, sigma);
  if (dist.family == "student") return EllipticalSpec::student(dist.nu, mu, sigma);
  if (dist.family == "mixture")
    return EllipticalSpec::scale_mixture(dist.weights, dist.scales, mu, sigma);
  throw ConfigError("unknown distribution family '" + dist.family + "'");
}

Vector signal_location(const SignalSpec& signal, Eigen::Index p) {
  Vector mu = Vector::Zero(p);
  if (signal.type == "dense_location") {
    mu.setConstant(signal.magnitude);
  } else if (signal.type == "sparse_location") {
    const Eigen::Index k = std::min<Eigen::Index>(signal.count, p);
    for (Eigen::Index j = 0; j < k; ++j) mu(j) = signal.magnitude;
  }
  return mu;
}

bool is_two_sample_test(const std::string& name) {
  return name == "cq_two_sample" || name == "sst_two_sample" ||
         name == "rank_two_sample" || name == "proportionality" ||
         name == "sscm_equality";
}

std::vector<std::string> known_test_names() {
  return {"one_sample_sign",  "inst",
          "weighted_sum",     "max_sign",
          "weighted_max",     "maxsum",
          "sphericity_sign",  "sphericity_rank_spearman",
          "sphericity_rank_kendall", "sphericity_max",
          "sphericity_adaptive", "cq_two_sample",
          "sst_two_sample",   "rank_two_sample",
          "proportionality",  "sscm_equality"};
}

TestResult run_named_test(const std::string& name,
                          const std::map<std::string, double>& options,
                          const DataMatrix& d1, const DataMatrix* d2) {
  auto opt = [&](const std::string& key, double fallback) {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  };
  const bool two = is_two_sample_test(name);
  if (two && d2 == nullptr)
    throw ConfigError("test '" + name + "' needs a second sample");
  if (!two && d2 != nullptr)
    throw ConfigError("test '" + name + "' takes a single sample");

  if (!two) {
    Vector mu0 = Vector::Constant(d1.cols(), opt("mu0", 0.0));
    if (name == "one_sample_sign")
      return one_sample_sign_test(d1, mu0, opt("exact", 0.0) != 0.0);
    if (name == "inst") return inst_test(d1, mu0);
    if (name == "weighted_sum") return weighted_sum_test(d1, mu0, opt("m", 0.0));
    if (name == "max_sign") return max_sign_test(d1, mu0);
    if (name == "weighted_max") return weighted_max_test(d1, mu0, opt("m", 0.0));
    if (name == "maxsum") return maxsum_test(d1, mu0, opt("m", 0.0));
    if (name == "sphericity_sign") return sphericity_sign_test(d1).result;
    if (name == "sphericity_rank_spearman") return sphericity_rank_spearman(d1);
    if (name == "sphericity_rank_kendall") return sphericity_rank_kendall(d1);
    if (name == "sphericity_max") return sphericity_max_test(d1);
    if (name == "sphericity_adaptive") return sphericity_adaptive(d1);
  } else {
    if (name == "cq_two_sample") return cq_two_sample(d1, *d2);
    if (name == "sst_two_sample") return sst_two_sample(d1, *d2);
    if (name == "rank_two_sample")
      return rank_two_sample(d1, *d2, opt("exact", 0.0) != 0.0);
    if (name == "proportionality") return proportionality_test(d1, *d2);
    if (name == "sscm_equality") return sscm_equality_test(d1, *d2);
  }
  std::string all;
  for (const std::string& t : known_test_names()) all += " " + t;
  throw ConfigError("unknown test '" + name + "'; available:" + all);
}

}  // namespace ellipstat
