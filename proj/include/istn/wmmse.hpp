// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "istn/metrics.hpp"
#include "istn/qcqp.hpp"

namespace istn {

// QoS-constrained WMMSE for the joint terrestrial-beamforming / satellite
// spot-beam power problem. The satellite power enters through its amplitude
// q = sqrt(p); with filters and weights fixed, every MSE is then a convex
// quadratic in (F, q) and the transmitter step is a convex QCQP.

struct Weights {
  Eigen::VectorXd mu_tut;  // K
  double mu_sut = 1.0;
  Eigen::VectorXd mu_tar;  // N_tar (bookkeeping; the sensing links are constraints)
};

struct WmmseOptions {
  bool joint_sat_power = true;  // optimize q (pre-optimization); false freezes p_sat_fixed
  double p_sat_fixed = 0.0;     // W, used when joint_sat_power == false
  double p_cap = 0.0;           // per-beam satellite power cap (P_LEO) in joint mode
  double p_init = -1.0;         // starting satellite power in joint mode; < 0 = p_cap / M
  double tol = 1e-5;
  int max_iters = 200;
  double qcqp_tol = 1e-6;
  bool sut_qos = true;
  bool scnr_qos = true;
  int infeasible_retries = 6;
  const Beamformer* init_f = nullptr;  // start beams (default: matched filters)
};

struct SolveReport {
  bool converged = false;
  bool infeasible = false;
  int iterations = 0;
  double objective = 0.0;  // final surrogate value
  double sut_rate_slack = 0.0;      // R_S - R_min (bps/Hz)
  double min_scnr_slack_db = 0.0;   // min_i SCNR_i - SCNR_min (dB)
  double power_slack = 0.0;         // P_BS - tr(F^H F) (W)
  std::vector<std::string> violated;
  std::vector<double> objective_traj;
};

struct WmmseOutcome {
  Beamformer F;
  double p_sat = 0.0;
  ReceiveFilters W;
  Weights mu;
  SolveReport report;
};

/// Step 1: MMSE filters at the current transmit state.
inline ReceiveFilters receiver_update(const Beamformer& F, double p_sat, const CellChannelSet& ch,
                                      const Association& assoc, const SystemParams& p) {
  return mmse_filters(F, ch, assoc, p_sat, p);
}

/// Step 2: rate weights mu = (1 - w * signal)^-1; throws if a signal term
/// reached or passed unity (impossible at an MMSE point).
Weights weight_update(const Beamformer& F, double p_sat, const ReceiveFilters& W,
                      const CellChannelSet& ch, const Association& assoc, const SystemParams& p);

struct TxResult {
  bool feasible = false;
  Beamformer F;
  double q = 0.0;
  double objective = 0.0;  // weighted-MSE value of the QCQP optimum
  double phase1_violation = 0.0;
  int newton_iters = 0;
  bool certified = false;
};

/// Step 3: convex QCQP over (F, q) (or F alone) under the reformulated
/// maximum-MSE constraints and the power budgets.
TxResult transmitter_update(const ReceiveFilters& W, const Weights& mu, const CellChannelSet& ch,
                            const Association& assoc, const SystemParams& p,
                            const WmmseOptions& opts, const Beamformer* warm_f = nullptr,
                            double warm_q = 0.0);

/// Matched-filter start: conjugate channel beams for TUTs, transmit steering
/// for targets, equal per-stream power at the full budget.
Beamformer matched_init(const CellChannelSet& ch, const Association& assoc, const SystemParams& p);

/// Block-coordinate surrogate sum_k (mu eps - ln mu) over the rate-carrying
/// links; non-increasing across full iterations.
double surrogate_objective(const Beamformer& F, double p_sat, const ReceiveFilters& W,
                           const Weights& mu, const CellChannelSet& ch, const Association& assoc,
                           const SystemParams& p);

WmmseOutcome wmmse_solve(const CellChannelSet& ch, const Association& assoc,
                         const SystemParams& p, const WmmseOptions& opts);

/// One minimax step of the sensing feasibility probe: with receive filters
/// fixed, minimizes the worst target-MSE violation over the sensing columns
/// alone (communication columns pinned at zero) subject to the TBS power
/// budget. Returns the full-width beamformer and the signed violation
/// max_i (eps_i - bound).
struct SensingMinimax {
  Beamformer F;
  double violation = 0.0;
};
SensingMinimax sensing_minimax_step(const ReceiveFilters& W, const CellChannelSet& ch,
                                    const Association& assoc, const SystemParams& p, double p_sat,
                                    const Beamformer* warm = nullptr);

/// Pre-optimization: joint (F, p) with the per-beam cap p <= P_LEO.
WmmseOutcome solve_p1(const CellChannelSet& ch, const Association& assoc, const SystemParams& p);

/// Refinement: F alone under the fixed satellite power p_bar; `init_f`
/// seeds the iteration with the pre-optimization beams when available.
WmmseOutcome solve_p3(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                      double p_bar, const Beamformer* init_f = nullptr);

}  // namespace istn
