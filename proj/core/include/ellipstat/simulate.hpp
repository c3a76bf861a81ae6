#pragma once

#include <string>
#include <vector>

#include "ellipstat/scenario.hpp"

namespace ellipstat {

struct ResultRow {
  std::string test;
  std::string scenario_digest;
  double rejection_rate = 0.0;
  double std_error = 0.0;  // binomial standard error of the rejection rate
  double mean_statistic = 0.0;
  int reps_completed = 0;
  int reps_failed = 0;
  double wall_time_sec = 0.0;  // reported to the console, never serialized
};

struct SimulationOutput {
  std::vector<ResultRow> rows;
  std::string digest;
  double total_wall_time_sec = 0.0;
};

// Runs every replication on per-rep substreams of the master seed. The
// partition of replications over threads never affects the serialized output;
// results are gathered by replication index.
SimulationOutput run_simulation(const ScenarioConfig& config,
                                int threads_override = 0);

// Deterministic payloads (no timing fields).
std::string results_to_csv(const SimulationOutput& output);
std::string results_to_json(const SimulationOutput& output,
                            const ScenarioConfig& config);
std::string results_to_markdown(const SimulationOutput& output);

// Draw the replication-r datasets exactly as the simulation loop does.
DataMatrix simulate_sample_one(const ScenarioConfig& config, int rep);
void simulate_sample_two(const ScenarioConfig& config, int rep, DataMatrix* d1,
                         DataMatrix* d2);

}  // namespace ellipstat
