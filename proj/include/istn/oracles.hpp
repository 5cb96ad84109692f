// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "istn/experiment.hpp"
#include "istn/qcqp.hpp"
#include "istn/waterfill.hpp"

namespace istn::oracles {

// Independent re-derivations of quantities the library computes, used to
// cross-check implementations. Expected values here are always produced by a
// different route than the code under test (term-by-term expressions, brute
// force, first-order methods, grid search).

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Suites: channel, metrics, convex, wmmse, association, or all.
std::vector<Check> run_suite(const std::string& name);

/// Projected gradient with Dykstra projections onto each quadratic set;
/// single-block problems only. Returns the objective after `iters` steps.
double pg_qcqp_oracle(const QcqpProblem& prob, long iters);

/// Virtual-link SINR by direct term assembly: desired and interference
/// amplitudes are re-derived here from raw channel pieces.
double virtual_sinr_oracle(const Beamformer& F, const CellChannelSet& ch,
                           const Association& assoc, double p_sat, int i, const SystemParams& p,
                           const Eigen::RowVectorXcd& w);

/// Max attainable SCNR over receive filters via the generalized eigenproblem.
double max_scnr_oracle(const Beamformer& F, const CellChannelSet& ch, const Association& assoc,
                       double p_sat, int i, const SystemParams& p);

/// Two-stage simplex grid for the merge problem.
Eigen::VectorXd merge_grid_oracle(const MergeProblem& prob, int coarse_steps, int refine_steps);

/// Shared small scenario for randomized cross-checks.
SystemParams small_params();
CellChannelSet random_cell(const SystemParams& p, uint64_t seed);
Beamformer random_beamformer(const SystemParams& p, uint64_t seed, double power_frac = 1.0);

}  // namespace istn::oracles
