// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "istn/config.hpp"
#include "istn/pipeline.hpp"

namespace istn {

// Experiment driver. Tasks are (sweep point, seed) pairs; every method inside
// one task consumes the same channel draws. The OpenMP path and the serial
// reference fill identical per-task slots and aggregate in fixed index order,
// so outputs are byte-identical regardless of the worker count.

struct CellRecord {
  int seed = 0;
  int cell = 0;
  bool feasible = true;
  bool sensing_fail = false;
  double istn = 0.0, terr = 0.0, sat = 0.0, sut = 0.0;
  double min_scnr_db = 0.0;  // realized (rate methods) or achieved max-min (failure probes)
  std::vector<double> rate_tut;  // per-entity detail for the metrics dump
  std::vector<double> scnr_db;
};

struct DiagRow {
  double sweep_value = 0.0;
  int seed = 0, cell = 0;
  std::string method, stage;
  bool converged = false, infeasible = false;
  int iterations = 0;
  double objective = 0.0, sut_slack = 0.0, scnr_slack_db = 0.0, power_slack = 0.0;
  std::string assoc;
};

struct MethodPointResult {
  std::string method;
  double sweep_value = 0.0;
  int seed_count = 0;
  double istn_sum_rate = 0.0, terr_sum_rate = 0.0, sat_sum_rate = 0.0;
  double min_scnr_db = 0.0, sut_rate = 0.0;
  double failure_prob = 0.0, feasible_frac = 0.0;
  std::vector<CellRecord> records;  // one per (seed, cell); drives in-process audits
};

struct ResultTable {
  std::vector<MethodPointResult> rows;  // ordered (sweep point, method)
  std::vector<DiagRow> diagnostics;
};

std::vector<double> sweep_values(const SweepAxis& axis, const SystemParams& base);
std::vector<std::string> default_methods(const std::string& experiment);
bool is_failure_experiment(const std::string& experiment);

/// Evaluates one method on one prepared trial. `failure_probe` switches to
/// the sensing-feasibility experiment (no rate optimization).
std::vector<CellRecord> evaluate_method(const MethodSpec& spec, const SystemParams& params,
                                        const SeedContext& ctx, uint64_t master_seed,
                                        uint64_t seed_index, bool failure_probe,
                                        bool parallel_cells, std::vector<DiagRow>* diags);

/// OpenMP-parallel driver; workers = 0 uses all hardware threads,
/// workers = 1 delegates to the serial reference.
ResultTable run_experiment(const ExperimentSpec& spec, const SystemParams& base, int workers = 0);

/// Plain-loop reference implementation kept for testing and benchmarking;
/// produces bit-identical tables.
ResultTable run_experiment_serial(const ExperimentSpec& spec, const SystemParams& base);

void write_results_csv(const ResultTable& table, const ExperimentSpec& spec, std::ostream& os);
void write_diagnostics_csv(const ResultTable& table, const ExperimentSpec& spec, std::ostream& os);

/// one row per (sweep point, method, seed, cell, entity); entities are
/// tut<k>, sut, and target<i>
void write_metrics_csv(const ResultTable& table, const ExperimentSpec& spec, std::ostream& os);

}  // namespace istn
