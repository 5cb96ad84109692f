// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "istn/baselines.hpp"
#include "istn/channel.hpp"
#include "istn/geometry.hpp"
#include "istn/metrics.hpp"
#include "istn/wmmse.hpp"

namespace istn {

/// All channel randomness of one Monte Carlo trial, drawn once and shared by
/// every method evaluated on that trial (paired-draw discipline). Holds the
/// two terrestrial small-scale snapshots: tau0 - dtau (pre-optimization) and
/// tau0 (refinement); large-scale state, satellite links and sensing channels
/// are frozen across the pair.
struct SeedContext {
  Geometry geom;
  std::vector<CellLargeScale> ls;                          // per cell
  std::vector<std::vector<TerrestrialSmallScale>> ss0;     // per cell, tau0 - dtau
  std::vector<std::vector<TerrestrialSmallScale>> ss1;     // per cell, tau0
};

enum class Snapshot { preopt, refine };
enum class SatCsi { predicted, truth };

SeedContext prepare_seed(const SystemParams& p, uint64_t master_seed, uint64_t seed_index);

/// Variant with a caller-adjusted geometry (monostatic transform relocates
/// the receiver before the channels are drawn).
SeedContext prepare_seed_with_geometry(const SystemParams& p, uint64_t master_seed,
                                       uint64_t seed_index, Geometry geom);

/// Materializes the channel view of one cell at one stage.
CellChannelSet cell_view(const SeedContext& ctx, const SystemParams& p, int m, Snapshot snap,
                         SatCsi sat);

struct CellOutcome {
  Association assoc;
  Beamformer F;
  ReceiveFilters W;
  double p_bar = 0.0;    // pre-optimized per-beam guideline
  double p_final = 0.0;  // merged power actually transmitted
  bool feasible = true;
  bool sensing_ok = true;  // pre-check: SCNR attainable with the full budget
  SolveReport rep_p1, rep_p3;
};

struct CooperationRun {
  std::vector<CellOutcome> cells;
  Eigen::VectorXd p_merged;  // M
};

/// Three-stage cooperation: per-cell association + P1 on the pre-optimization
/// snapshot with predicted satellite CSI, centralized merge, per-cell P3 on
/// the refinement snapshot at the merged power. Infeasible cells are flagged
/// and keep their minimum-violation beamformers. `parallel_cells` gates the
/// in-run OpenMP loop (off inside the already-parallel experiment driver).
CooperationRun run_cooperation(const SeedContext& ctx, const SystemParams& p,
                               bool parallel_cells = true);

/// Phase-1 style sensing feasibility: does any F within the TBS power budget
/// (communication columns free to be zero) reach SCNR_min on every target
/// under satellite power p_sat? Alternates MVDR filters with a minimax MSE
/// solve; also reports the achieved max-min SCNR.
bool sensing_feasible(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                      double p_sat, double* violation = nullptr, double* minscnr_db = nullptr);

}  // namespace istn
