// SPDX-License-Identifier: Apache-2.0
#include "istn/pipeline.hpp"

#include <cmath>

#include "istn/waterfill.hpp"

namespace istn {

SeedContext prepare_seed(const SystemParams& p, uint64_t master_seed, uint64_t seed_index) {
  const StreamKey seed_key = master_key(master_seed).child(seed_index);
  // geometry derives from its own sub-key so that per-seed layouts are
  // independent of everything else
  return prepare_seed_with_geometry(
      p, master_seed, seed_index,
      generate_geometry(p, mix64(seed_key.state ^ tag(StreamTag::geometry))));
}

SeedContext prepare_seed_with_geometry(const SystemParams& p, uint64_t master_seed,
                                       uint64_t seed_index, Geometry geom) {
  SeedContext ctx;
  ctx.geom = std::move(geom);
  const StreamKey seed_key = master_key(master_seed).child(seed_index);
  ctx.ls.reserve(p.M);
  ctx.ss0.reserve(p.M);
  ctx.ss1.reserve(p.M);
  for (int m = 0; m < p.M; ++m) {
    const StreamKey cell_key = seed_key.child(static_cast<uint64_t>(m));
    ctx.ls.push_back(draw_cell_large_scale(ctx.geom.cells[m], p, cell_key));
    RngStream s0(cell_key.child({tag(StreamTag::small_scale), 0}));
    RngStream s1(cell_key.child({tag(StreamTag::small_scale), 1}));
    ctx.ss0.push_back(draw_small_scale(p, s0));
    // refinement-time small scale: correlated redraw (rho = 1 freezes aging)
    ctx.ss1.push_back(evolve_small_scale(ctx.ss0.back(), p.csi_aging_rho, s1));
  }
  return ctx;
}

CellChannelSet cell_view(const SeedContext& ctx, const SystemParams& p, int m, Snapshot snap,
                         SatCsi sat) {
  CellChannelSet ch;
  const CellLargeScale& ls = ctx.ls[m];
  ch.terr = assemble_terrestrial(ls, snap == Snapshot::preopt ? ctx.ss0[m] : ctx.ss1[m], p);
  ch.sat = sat == SatCsi::predicted ? ls.sat_pred : ls.sat_true;
  ch.sens = ls.sens;
  return ch;
}

bool sensing_feasible(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                      double p_sat, double* violation, double* minscnr_db) {
  if (!p.scnr_qos_enabled() || ch.sens.n_tar == 0) {
    if (violation) *violation = -1.0;
    if (minscnr_db) *minscnr_db = std::numeric_limits<double>::infinity();
    return true;
  }

  // start from steering beams at the full budget
  Beamformer f = matched_init(ch, assoc, p);
  f.leftCols(p.K).setZero();
  const double tr = f.squaredNorm();
  if (tr > 0) f *= std::sqrt(p.P_BS / tr);

  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 40; ++it) {
    const ReceiveFilters w = mmse_filters(f, ch, assoc, p_sat, p);
    const SensingMinimax step = sensing_minimax_step(w, ch, assoc, p, p_sat, &f);
    f = step.F;
    if (step.violation < best - 1e-9 * std::max(1.0, std::abs(best))) {
      best = step.violation;
    } else {
      best = std::min(best, step.violation);
      break;  // alternation stalled
    }
    if (best <= -1e-4) break;  // comfortably feasible
  }
  if (violation) *violation = best;
  if (minscnr_db) {
    const ReceiveFilters w = mmse_filters(f, ch, assoc, p_sat, p);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ch.sens.n_tar; ++i)
      lo = std::min(lo, scnr(f, w, ch, assoc, p_sat, i, p));
    *minscnr_db = lin_to_db(std::max(lo, 1e-300));
  }
  return best <= p.qcqp_tol;
}

namespace {

Association associate_cell(const SeedContext& ctx, const SystemParams& p, int m,
                           const CellChannelSet& ch) {
  return associate_proposed(ch.sens.alpha_tar, ctx.geom.cells[m].theta_r_tar,
                            ctx.geom.cells[m].theta_sat_rad, p.delta_sat, p.delta_tar);
}

}  // namespace

CooperationRun run_cooperation(const SeedContext& ctx, const SystemParams& p,
                               bool parallel_cells) {
  CooperationRun run;
  run.cells.resize(p.M);
  Eigen::VectorXd p_bar(p.M), g_pred(p.M), denom(p.M);

  // P1: distributed pre-optimization on the aged snapshot with predicted
  // satellite CSI; cells are independent
#pragma omp parallel for schedule(dynamic) if (parallel_cells)
  for (int m = 0; m < p.M; ++m) {
    CellOutcome& cell = run.cells[m];
    const CellChannelSet ch0 = cell_view(ctx, p, m, Snapshot::preopt, SatCsi::predicted);
    cell.assoc = associate_cell(ctx, p, m, ch0);
    cell.sensing_ok = sensing_feasible(ch0, cell.assoc, p, p.P_LEO / p.M);

    if (!cell.sensing_ok) {
      cell.feasible = false;
      cell.F = matched_init(ch0, cell.assoc, p);
      cell.p_bar = p.P_LEO / p.M;
    } else {
      const WmmseOutcome p1 = solve_p1(ch0, cell.assoc, p);
      cell.rep_p1 = p1.report;
      cell.F = p1.F;
      cell.p_bar = p1.p_sat;
      if (p1.report.infeasible) cell.feasible = false;
    }

    p_bar(m) = cell.p_bar;
    g_pred(m) = ch0.sat.g_sut;
    denom(m) = p.sigma2_sut() + (ch0.terr.h_sut * cell.F).squaredNorm();
  }

  // P2: centralized merge of the per-beam guidelines
  run.p_merged = solve_merge({p_bar, g_pred, denom, p.P_LEO});

  // P3: refinement at tau0 under the merged satellite powers
#pragma omp parallel for schedule(dynamic) if (parallel_cells)
  for (int m = 0; m < p.M; ++m) {
    CellOutcome& cell = run.cells[m];
    cell.p_final = run.p_merged(m);
    if (!cell.sensing_ok) continue;
    const CellChannelSet ch1 = cell_view(ctx, p, m, Snapshot::refine, SatCsi::predicted);
    const WmmseOutcome p3 = solve_p3(ch1, cell.assoc, p, cell.p_final, &cell.F);
    cell.rep_p3 = p3.report;
    cell.F = p3.F;
    if (p3.report.infeasible) cell.feasible = false;
  }

  // realized receive filters on the true refinement-time channels
  for (int m = 0; m < p.M; ++m) {
    const CellChannelSet ch_true = cell_view(ctx, p, m, Snapshot::refine, SatCsi::truth);
    run.cells[m].W = mmse_filters(run.cells[m].F, ch_true, run.cells[m].assoc,
                                  run.cells[m].p_final, p);
  }
  return run;
}

}  // namespace istn
