// SPDX-License-Identifier: Apache-2.0
//
// Benchmark: OpenMP experiment driver against the serial reference on a small
// workload, verifying identical result tables.

#include <omp.h>

#include <chrono>
#include <iostream>
#include <sstream>

#include "istn/experiment.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string table_csv(const istn::ResultTable& t, const istn::ExperimentSpec& spec) {
  std::ostringstream os;
  istn::write_results_csv(t, spec, os);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  int seeds = 24;
  if (argc > 1) seeds = std::atoi(argv[1]);

  istn::SystemParams p;
  p.N_TX = 8;
  p.K = 3;
  p.N_tar = 2;
  p.N_rad = 4;
  p.N_RX = 4;
  p.N_cl = 2;
  p.N_cluster = 4;
  p.N_ray = 2;
  p.M = 1;
  p.P_BS = 1.0;
  p.R_min_S = 3.0;
  p.eps_grid_size = 12;

  istn::ExperimentSpec spec;
  spec.name = "sumrate_vs_pbs";
  spec.sweep = {"P_BS", 1.0, 4.0, 2, istn::SweepAxis::Scale::log};
  spec.methods = {"proposed", "interference_free", "greedy"};
  spec.seeds = seeds;
  spec.master_seed = 11;

  std::cout << "benchmark: " << spec.seeds << " seeds x " << spec.sweep.points
            << " sweep points, methods = proposed/interference_free/greedy\n";

  const auto t0 = Clock::now();
  const istn::ResultTable serial = istn::run_experiment_serial(spec, p);
  const double t_serial = seconds_since(t0);
  std::cout << "serial reference: " << t_serial << " s\n";

  const int threads = omp_get_max_threads();
  const auto t1 = Clock::now();
  const istn::ResultTable parallel = istn::run_experiment(spec, p, 0);
  const double t_parallel = seconds_since(t1);
  std::cout << "openmp (" << threads << " threads): " << t_parallel << " s\n";
  std::cout << "speedup: " << t_serial / t_parallel << "x\n";

  if (table_csv(serial, spec) != table_csv(parallel, spec)) {
    std::cout << "MISMATCH: parallel results differ from the serial reference\n";
    return 1;
  }
  std::cout << "results identical across drivers\n";
  return 0;
}
