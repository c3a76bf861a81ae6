#include "ellipstat/simulate.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ellipstat/csv.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/rng.hpp"

namespace ellipstat {

namespace {

std::string digest_of(const std::string& text) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (char c : text) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RepOutcome {
  double pvalue = 1.0;
  double statistic = 0.0;
  bool failed = false;
};

}  // namespace

DataMatrix simulate_sample_one(const ScenarioConfig& cfg, int rep) {
  Matrix sigma = build_sigma(cfg.sigma_structure, cfg.p);
  Vector mu = signal_location(cfg.signal, cfg.p);
  EllipticalSpec spec = make_elliptical_spec(cfg.distribution, mu, sigma);
  return sample_elliptical(spec, *cfg.n,
                           derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 1));
}

void simulate_sample_two(const ScenarioConfig& cfg, int rep, DataMatrix* d1,
                         DataMatrix* d2) {
  Matrix sigma = build_sigma(cfg.sigma_structure, cfg.p);
  Vector zero = Vector::Zero(cfg.p);
  Vector mu2 = signal_location(cfg.signal, cfg.p);
  EllipticalSpec spec1 = make_elliptical_spec(cfg.distribution, zero, sigma);
  EllipticalSpec spec2 = make_elliptical_spec(cfg.distribution, mu2, sigma);
  *d1 = sample_elliptical(spec1, *cfg.n1,
                          derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 1));
  *d2 = sample_elliptical(spec2, *cfg.n2,
                          derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 2));
}

SimulationOutput run_simulation(const ScenarioConfig& cfg, int threads_override) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  int threads = threads_override > 0 ? threads_override : cfg.threads;
  threads = std::max(1, std::min<int>(threads, cfg.reps));

  const std::size_t n_tests = cfg.tests.size();
  std::vector<std::vector<RepOutcome>> outcomes(
      n_tests, std::vector<RepOutcome>(static_cast<std::size_t>(cfg.reps)));
  std::vector<double> test_seconds(n_tests, 0.0);

  auto worker = [&](int first, int last) {
    for (int rep = first; rep < last; ++rep) {
      DataMatrix d1, d2;
      if (cfg.two_sample()) {
        simulate_sample_two(cfg, rep, &d1, &d2);
      } else {
        d1 = simulate_sample_one(cfg, rep);
      }
      for (std::size_t t = 0; t < n_tests; ++t) {
        RepOutcome& slot = outcomes[t][static_cast<std::size_t>(rep)];
        try {
          TestResult res = run_named_test(cfg.tests[t].name, cfg.tests[t].options,
                                          d1, cfg.two_sample() ? &d2 : nullptr);
          slot.pvalue = res.pvalue;
          slot.statistic = res.statistic;
        } catch (const StatError&) {
          slot.failed = true;
        }
      }
    }
  };

  if (threads == 1) {
    worker(0, cfg.reps);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.reps + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(cfg.reps, first + chunk);
      if (first >= last) break;
      pool.emplace_back(worker, first, last);
    }
    for (std::thread& th : pool) th.join();
  }

  SimulationOutput out;
  out.digest = digest_of(scenario_to_json(cfg));
  for (std::size_t t = 0; t < n_tests; ++t) {
    ResultRow row;
    row.test = cfg.tests[t].name;
    row.scenario_digest = out.digest;
    int completed = 0, failed = 0, rejected = 0;
    double stat_sum = 0.0;
    for (const RepOutcome& o : outcomes[t]) {  // fixed order => deterministic sums
      if (o.failed) {
        ++failed;
        continue;
      }
      ++completed;
      stat_sum += o.statistic;
      if (o.pvalue < cfg.alpha) ++rejected;
    }
    row.reps_completed = completed;
    row.reps_failed = failed;
    if (completed > 0) {
      row.rejection_rate = static_cast<double>(rejected) / completed;
      row.std_error = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) /
                                completed);
      row.mean_statistic = stat_sum / completed;
    }
    out.rows.push_back(std::move(row));
  }

  out.total_wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  for (ResultRow& row : out.rows)
    row.wall_time_sec = out.total_wall_time_sec / static_cast<double>(n_tests);
  return out;
}

std::string results_to_csv(const SimulationOutput& output) {
  std::ostringstream os;
  os << "test,scenario,rejection_rate,std_error,mean_statistic,reps_completed,"
        "reps_failed\n";
  for (const ResultRow& r : output.rows) {
    os << r.test << ',' << r.scenario_digest << ',' << format_double(r.rejection_rate)
       << ',' << format_double(r.std_error) << ',' << format_double(r.mean_statistic)
       << ',' << r.reps_completed << ',' << r.reps_failed << '\n';
  }
  return os.str();
}

std::string results_to_json(const SimulationOutput& output,
                            const ScenarioConfig& config) {
  nlohmann::json root;
  root["scenario"] = nlohmann::json::parse(scenario_to_json(config));
  root["digest"] = output.digest;
  root["results"] = nlohmann::json::array();
  for (const ResultRow& r : output.rows) {
    nlohmann::json row;
    row["test"] = r.test;
    row["rejection_rate"] = r.rejection_rate;
    row["std_error"] = r.std_error;
    row["mean_statistic"] = r.mean_statistic;
    row["reps_completed"] = r.reps_completed;
    row["reps_failed"] = r.reps_failed;
    root["results"].push_back(row);
  }
  return root.dump(2) + "\n";
}

std::string results_to_markdown(const SimulationOutput& output) {
  std::ostringstream os;
  os << "# Simulation report\n\n";
  os << "Scenario digest: `" << output.digest << "`\n\n";
  os << "| test | rejection rate | std. error | mean statistic | completed | "
        "failed |\n";
  os << "|------|----------------|------------|----------------|-----------|"
        "--------|\n";
  for (const ResultRow& r : output.rows) {
    os << "| " << r.test << " | " << format_double(r.rejection_rate) << " | "
       << format_double(r.std_error) << " | " << format_double(r.mean_statistic)
       << " | " << r.reps_completed << " | " << r.reps_failed << " |\n";
  }
  return os.str();
}

}  // namespace ellipstat
