// SPDX-License-Identifier: Apache-2.0
#include "istn/wmmse.hpp"

#include <cmath>

namespace istn {

namespace {

double re(const cplx& z) { return z.real(); }

struct TxLayout {
  QcqpProblem prob;   // layout only; forms filled by the assembler
  int n_streams = 0;
  int q_block = -1;   // -1 when the satellite power is frozen
};

TxLayout make_layout(const SystemParams& p, bool joint) {
  TxLayout l;
  l.n_streams = p.streams();
  l.prob.block_sizes.assign(l.n_streams, 2 * p.N_TX);
  if (joint) {
    l.prob.block_sizes.push_back(1);
    l.q_block = l.n_streams;
  }
  return l;
}

/// eps_tut_k as a quadratic in (F, q); `weight` scales every term.
void add_mse_tut(QuadForm& f, const TxLayout& l, int k, cplx w, const CellChannelSet& ch,
                 const SystemParams& p, double q_fixed, double weight) {
  const Eigen::RowVectorXcd wh = w * ch.terr.h_tut.row(k);
  for (int j = 0; j < l.n_streams; ++j)
    add_abs2_affine(f, l.prob, j, wh, j == k ? cplx{1.0, 0.0} : cplx{0.0, 0.0}, weight);
  const double sat_coef = std::norm(w) * ch.sat.g_tut(k);
  if (l.q_block >= 0)
    add_scalar_quad(f, l.prob, l.q_block, weight * sat_coef, 0.0, 0.0);
  else
    f.c += weight * sat_coef * q_fixed * q_fixed;
  f.c += weight * p.sigma2_tut() * std::norm(w);
}

void add_mse_sut(QuadForm& f, const TxLayout& l, cplx w, const CellChannelSet& ch,
                 const SystemParams& p, double q_fixed, double weight) {
  const Eigen::RowVectorXcd wh = w * ch.terr.h_sut;
  for (int j = 0; j < l.n_streams; ++j) add_abs2_affine(f, l.prob, j, wh, cplx{0.0, 0.0}, weight);
  const double root_g = std::sqrt(ch.sat.g_sut);
  if (l.q_block >= 0) {
    // |1 - w sqrt(g) q|^2 = 1 - 2 Re(w) sqrt(g) q + |w|^2 g q^2
    add_scalar_quad(f, l.prob, l.q_block, weight * std::norm(w) * ch.sat.g_sut,
                    -2.0 * weight * re(w) * root_g, weight * 1.0);
  } else {
    f.c += weight * std::norm(cplx{1.0, 0.0} - w * root_g * q_fixed);
  }
  f.c += weight * p.sigma2_sut() * std::norm(w);
}

void add_mse_target(QuadForm& f, const TxLayout& l, int i, const Eigen::RowVectorXcd& w,
                    const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                    double q_fixed, double weight) {
  const int n = assoc(i);
  const int col_i = l.n_streams - ch.sens.n_tar + i;
  add_abs2_affine(f, l.prob, col_i, w * ch.sens.g_tar[i][n], cplx{1.0, 0.0}, weight);
  for (int j = 0; j < ch.sens.n_tar; ++j)
    if (j != i) add_abs2_affine(f, l.prob, col_i, w * ch.sens.g_tar[j][n], cplx{0.0, 0.0}, weight);
  for (int lc = 0; lc < ch.sens.n_cl_total; ++lc) {
    const Eigen::RowVectorXcd wg = w * ch.sens.g_cl[lc][n];
    for (int j = 0; j < l.n_streams; ++j) add_abs2_affine(f, l.prob, j, wg, cplx{0.0, 0.0}, weight);
  }
  const Eigen::RowVectorXcd wg = w * ch.sens.g_sum[n];
  for (int j = 0; j < l.n_streams; ++j)
    if (j != col_i) add_abs2_affine(f, l.prob, j, wg, cplx{0.0, 0.0}, weight);
  const double sat_coef = std::norm((w * ch.sat.g_rad_vec.col(n))(0));
  if (l.q_block >= 0)
    add_scalar_quad(f, l.prob, l.q_block, weight * sat_coef, 0.0, 0.0);
  else
    f.c += weight * sat_coef * q_fixed * q_fixed;
  f.c += weight * p.sigma2_rad() * w.squaredNorm();
}

}  // namespace

Weights weight_update(const Beamformer& F, double p_sat, const ReceiveFilters& W,
                      const CellChannelSet& ch, const Association& assoc, const SystemParams& p) {
  (void)p;
  Weights mu;
  const int k = static_cast<int>(ch.terr.h_tut.rows());
  mu.mu_tut.resize(k);
  auto invert = [](double one_minus) {
    if (one_minus <= 1e-14) throw istn_error("weight_update: non-positive 1 - w h f");
    return 1.0 / one_minus;
  };
  for (int kk = 0; kk < k; ++kk)
    mu.mu_tut(kk) = invert(1.0 - re(W.w_tut(kk) * (ch.terr.h_tut.row(kk) * F.col(kk))(0)));
  mu.mu_sut = invert(1.0 - re(W.w_sut * std::sqrt(ch.sat.g_sut * p_sat)));
  mu.mu_tar.resize(ch.sens.n_tar);
  for (int i = 0; i < ch.sens.n_tar; ++i) {
    const int col_i = static_cast<int>(F.cols()) - ch.sens.n_tar + i;
    mu.mu_tar(i) =
        invert(1.0 - re((W.w_tar.row(i) * ch.sens.g_tar[i][assoc(i)] * F.col(col_i))(0)));
  }
  return mu;
}

TxResult transmitter_update(const ReceiveFilters& W, const Weights& mu, const CellChannelSet& ch,
                            const Association& assoc, const SystemParams& p,
                            const WmmseOptions& opts, const Beamformer* warm_f, double warm_q) {
  TxLayout l = make_layout(p, opts.joint_sat_power);
  const double q_fixed = opts.joint_sat_power ? 0.0 : std::sqrt(std::max(0.0, opts.p_sat_fixed));
  const int k = static_cast<int>(ch.terr.h_tut.rows());
  const bool sut_qos = opts.sut_qos && p.sut_qos_enabled();
  const bool scnr_qos = opts.scnr_qos && p.scnr_qos_enabled() && ch.sens.n_tar > 0;

  l.prob.objective = l.prob.make_form();
  for (int kk = 0; kk < k; ++kk)
    add_mse_tut(l.prob.objective, l, kk, W.w_tut(kk), ch, p, q_fixed, mu.mu_tut(kk));
  add_mse_sut(l.prob.objective, l, W.w_sut, ch, p, q_fixed, mu.mu_sut);

  if (sut_qos) {
    QuadForm g = l.prob.make_form();
    add_mse_sut(g, l, W.w_sut, ch, p, q_fixed, 1.0);
    g.c -= std::pow(2.0, -p.R_min_S);
    l.prob.constraints.push_back(std::move(g));
    l.prob.hard.push_back(0);
  }
  if (scnr_qos) {
    const double bound = 1.0 / (p.scnr_min_lin() + 1.0);
    for (int i = 0; i < ch.sens.n_tar; ++i) {
      QuadForm g = l.prob.make_form();
      add_mse_target(g, l, i, W.w_tar.row(i), ch, assoc, p, q_fixed, 1.0);
      g.c -= bound;
      l.prob.constraints.push_back(std::move(g));
      l.prob.hard.push_back(0);
    }
  }
  {
    QuadForm g = l.prob.make_form();
    for (int j = 0; j < l.n_streams; ++j) add_scaled_identity(g, l.prob, j, 1.0);
    g.c -= p.P_BS;
    l.prob.constraints.push_back(std::move(g));
    l.prob.hard.push_back(1);
  }
  if (opts.joint_sat_power) {
    QuadForm g = l.prob.make_form();
    add_scalar_quad(g, l.prob, l.q_block, 1.0, 0.0, -opts.p_cap);
    l.prob.constraints.push_back(std::move(g));
    l.prob.hard.push_back(1);
  }

  QcqpOptions qopts;
  qopts.tol = opts.qcqp_tol;
  qopts.validate_psd = false;  // PSD by construction from the atom helpers
  Eigen::VectorXd warm;
  if (warm_f) {
    warm = Eigen::VectorXd::Zero(l.prob.dim());
    for (int j = 0; j < l.n_streams; ++j) set_complex_block(warm, l.prob, j, warm_f->col(j));
    if (l.q_block >= 0) warm(l.prob.dim() - 1) = warm_q;
    qopts.warm_start = &warm;
  }

  const QcqpResult sol = solve_qcqp(l.prob, qopts);

  TxResult out;
  out.feasible = sol.feasible;
  out.objective = sol.objective;
  out.phase1_violation = sol.phase1_violation;
  out.newton_iters = sol.newton_iters;
  out.certified = sol.certified;
  out.F.resize(p.N_TX, l.n_streams);
  for (int j = 0; j < l.n_streams; ++j) out.F.col(j) = complex_block(sol.x, l.prob, j);
  out.q = opts.joint_sat_power ? std::abs(sol.x(l.prob.dim() - 1)) : q_fixed;
  return out;
}

Beamformer matched_init(const CellChannelSet& ch, const Association& assoc, const SystemParams& p) {
  const int n_streams = p.streams();
  Beamformer F(p.N_TX, n_streams);
  for (int kk = 0; kk < p.K; ++kk) {
    Eigen::VectorXcd dir = ch.terr.h_tut.row(kk).adjoint();
    const double nrm = dir.norm();
    F.col(kk) = nrm > 0 ? Eigen::VectorXcd(dir / nrm) : Eigen::VectorXcd::Zero(p.N_TX);
  }
  for (int i = 0; i < ch.sens.n_tar; ++i) {
    // dominant right singular vector of a rank-one sensing channel is its
    // transmit steering column
    const Eigen::MatrixXcd& g = ch.sens.g_tar[i][assoc(i)];
    Eigen::VectorXcd dir = g.row(0).adjoint();
    for (int r = 1; r < g.rows(); ++r)
      if (g.row(r).norm() > dir.norm()) dir = g.row(r).adjoint();
    const double nrm = dir.norm();
    F.col(p.K + i) = nrm > 0 ? Eigen::VectorXcd(dir / nrm) : Eigen::VectorXcd::Zero(p.N_TX);
  }
  // project every beam off the SUT row so the first transmitter step starts
  // from a point that already respects the SUT rate floor
  if (p.sut_qos_enabled() && ch.terr.h_sut.squaredNorm() > 0) {
    const Eigen::VectorXcd u = ch.terr.h_sut.adjoint().normalized();
    F -= u * (u.adjoint() * F);
    for (int j = 0; j < n_streams; ++j) {
      const double nrm = F.col(j).norm();
      if (nrm > 1e-12) F.col(j) /= nrm;
    }
  }
  F *= std::sqrt(p.P_BS / n_streams);
  return F;
}

double surrogate_objective(const Beamformer& F, double p_sat, const ReceiveFilters& W,
                           const Weights& mu, const CellChannelSet& ch, const Association& assoc,
                           const SystemParams& p) {
  (void)assoc;
  double phi = 0.0;
  for (int kk = 0; kk < static_cast<int>(ch.terr.h_tut.rows()); ++kk)
    phi += mu.mu_tut(kk) * mse_tut(F, W.w_tut(kk), ch, p_sat, kk, p) - std::log(mu.mu_tut(kk));
  phi += mu.mu_sut * mse_sut(F, W.w_sut, ch, p_sat, p) - std::log(mu.mu_sut);
  return phi;
}

WmmseOutcome wmmse_solve(const CellChannelSet& ch, const Association& assoc,
                         const SystemParams& p, const WmmseOptions& opts_in) {
  WmmseOptions opts = opts_in;
  opts.sut_qos = opts.sut_qos && p.sut_qos_enabled();
  opts.scnr_qos = opts.scnr_qos && p.scnr_qos_enabled() && ch.sens.n_tar > 0;

  WmmseOutcome out;
  Beamformer cur_f = opts.init_f && opts.init_f->rows() == p.N_TX &&
                             opts.init_f->cols() == p.streams()
                         ? *opts.init_f
                         : matched_init(ch, assoc, p);
  double cur_p = opts.joint_sat_power
                     ? (opts.p_init >= 0.0 ? std::min(opts.p_init, opts.p_cap)
                                           : opts.p_cap / std::max(1, p.M))
                     : opts.p_sat_fixed;
  Beamformer best_f = cur_f;
  double best_p = cur_p;

  double prev_phi = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  int consecutive_infeasible = 0;

  for (int it = 1; it <= opts.max_iters; ++it) {
    out.W = receiver_update(cur_f, cur_p, ch, assoc, p);
    out.mu = weight_update(cur_f, cur_p, out.W, ch, assoc, p);

    // warm start strictly inside the power budgets
    Beamformer warm_f = cur_f;
    const double tr = warm_f.squaredNorm();
    if (tr > 0.95 * p.P_BS) warm_f *= std::sqrt(0.95 * p.P_BS / tr);
    double warm_q = std::sqrt(std::max(0.0, cur_p));
    if (opts.joint_sat_power && cur_p > 0.95 * opts.p_cap) warm_q = std::sqrt(0.95 * opts.p_cap);

    TxResult tx = transmitter_update(out.W, out.mu, ch, assoc, p, opts, &warm_f, warm_q);

    if (!tx.feasible) {
      cur_f = tx.F;  // minimum-violation point; refresh filters and retry
      if (opts.joint_sat_power) cur_p = tx.q * tx.q;
      if (++consecutive_infeasible > opts.infeasible_retries) {
        out.report.infeasible = true;
        out.report.iterations = it;
        break;
      }
      continue;
    }

    // the previous feasible point stays feasible under the refreshed filters;
    // never accept an inner solve that lost to it (uncertified numerics)
    const double phi_candidate =
        surrogate_objective(tx.F, tx.q * tx.q, out.W, out.mu, ch, assoc, p);
    const double phi_stay =
        have_feasible ? surrogate_objective(cur_f, cur_p, out.W, out.mu, ch, assoc, p)
                      : std::numeric_limits<double>::infinity();
    if (phi_candidate <= phi_stay) {
      cur_f = tx.F;
      if (opts.joint_sat_power) cur_p = tx.q * tx.q;
    }
    consecutive_infeasible = 0;
    have_feasible = true;
    best_f = cur_f;
    best_p = cur_p;

    const double phi = std::min(phi_candidate, phi_stay);
    out.report.objective_traj.push_back(phi);
    out.report.objective = phi;
    out.report.iterations = it;
    if (std::abs(prev_phi - phi) < opts.tol * std::max(1.0, std::abs(phi))) {
      out.report.converged = true;
      break;
    }
    prev_phi = phi;
  }
  out.F = have_feasible ? best_f : cur_f;
  out.p_sat = have_feasible ? best_p : cur_p;
  if (!have_feasible) out.report.infeasible = true;

  // realized slacks at the final point (MMSE receivers)
  out.W = receiver_update(out.F, out.p_sat, ch, assoc, p);
  const CellMetrics m = evaluate_cell(out.F, out.W, ch, assoc, out.p_sat, p);
  out.report.sut_rate_slack = m.rate_sut - std::max(0.0, p.R_min_S);
  out.report.min_scnr_slack_db =
      ch.sens.n_tar > 0 && opts.scnr_qos ? m.min_scnr_db() - p.SCNR_min : 0.0;
  out.report.power_slack = p.P_BS - out.F.squaredNorm();
  if (out.report.infeasible) {
    if (opts.sut_qos && out.report.sut_rate_slack < -1e-9) out.report.violated.push_back("R_min_S");
    if (opts.scnr_qos && out.report.min_scnr_slack_db < -1e-9)
      out.report.violated.push_back("SCNR_min");
    if (out.report.power_slack < -1e-9) out.report.violated.push_back("P_BS");
  }
  return out;
}

SensingMinimax sensing_minimax_step(const ReceiveFilters& W, const CellChannelSet& ch,
                                    const Association& assoc, const SystemParams& p, double p_sat,
                                    const Beamformer* warm) {
  const int n_tar = ch.sens.n_tar;
  TxLayout l;
  l.n_streams = n_tar;
  l.prob.block_sizes.assign(n_tar, 2 * p.N_TX);
  l.q_block = -1;
  const double q_fixed = std::sqrt(std::max(0.0, p_sat));

  l.prob.objective = l.prob.make_form();  // pure feasibility: zero objective
  const double bound = 1.0 / (p.scnr_min_lin() + 1.0);
  for (int i = 0; i < n_tar; ++i) {
    QuadForm g = l.prob.make_form();
    add_mse_target(g, l, i, W.w_tar.row(i), ch, assoc, p, q_fixed, 1.0);
    g.c -= bound;
    l.prob.constraints.push_back(std::move(g));
    l.prob.hard.push_back(0);
  }
  {
    QuadForm g = l.prob.make_form();
    for (int j = 0; j < n_tar; ++j) add_scaled_identity(g, l.prob, j, 1.0);
    g.c -= p.P_BS;
    l.prob.constraints.push_back(std::move(g));
    l.prob.hard.push_back(1);
  }

  QcqpOptions qopts;
  qopts.tol = p.qcqp_tol;
  qopts.validate_psd = false;
  qopts.phase1_target = std::numeric_limits<double>::infinity();  // full minimax
  Eigen::VectorXd warm_x;
  if (warm) {
    warm_x = Eigen::VectorXd::Zero(l.prob.dim());
    for (int i = 0; i < n_tar; ++i) {
      Eigen::VectorXcd col = warm->col(p.K + i);
      const double tr = warm->squaredNorm();
      if (tr > 0.95 * p.P_BS) col *= std::sqrt(0.95 * p.P_BS / tr);
      set_complex_block(warm_x, l.prob, i, col);
    }
    qopts.warm_start = &warm_x;
  }
  const QcqpResult sol = solve_qcqp(l.prob, qopts);

  SensingMinimax out;
  out.violation = sol.phase1_violation;
  out.F = Beamformer::Zero(p.N_TX, p.streams());
  for (int i = 0; i < n_tar; ++i) out.F.col(p.K + i) = complex_block(sol.x, l.prob, i);
  return out;
}

WmmseOutcome solve_p1(const CellChannelSet& ch, const Association& assoc_in, const SystemParams& p_in) {
  // plan the SUT rate with headroom so the refinement stage, which must meet
  // the true floor on fresh terrestrial CSI at the committed satellite power,
  // keeps a feasible interior
  SystemParams p = p_in;
  if (p.sut_qos_enabled()) p.R_min_S += p.sut_rate_margin;
  const Association& assoc = assoc_in;
  WmmseOptions opts;
  opts.joint_sat_power = true;
  opts.p_cap = p.P_LEO;
  opts.tol = p.wmmse_tol;
  opts.max_iters = p.wmmse_max_iters;
  opts.qcqp_tol = p.qcqp_tol;

  // WMMSE reaches stationary points; the satellite amplitude has two basins
  // (satellite-dominant vs terrestrial-dominant), so start from both a low
  // power meeting the SUT rate floor and the uniform split, and keep the
  // better realized cell objective
  const double sigma2 = p.sigma2_sut();
  double p_lo = ch.sat.g_sut > 0.0
                    ? 1.15 * (std::pow(2.0, std::max(1.0, p.R_min_S)) - 1.0) * sigma2 / ch.sat.g_sut
                    : 0.0;
  p_lo = std::min(p_lo, opts.p_cap);

  WmmseOutcome best;
  bool have = false;
  double best_rate = -1.0;
  for (const double p0 : {p_lo, opts.p_cap / std::max(1, p.M)}) {
    opts.p_init = p0;
    WmmseOutcome out = wmmse_solve(ch, assoc, p, opts);
    const CellMetrics met = evaluate_cell(out.F, out.W, ch, assoc, out.p_sat, p);
    const double rate = met.istn_sum();
    const bool better =
        !have ||
        (!out.report.infeasible && best.report.infeasible) ||
        (out.report.infeasible == best.report.infeasible && rate > best_rate);
    if (better) {
      best = std::move(out);
      best_rate = rate;
      have = true;
    }
  }
  return best;
}

WmmseOutcome solve_p3(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                      double p_bar, const Beamformer* init_f) {
  WmmseOptions opts;
  opts.joint_sat_power = false;
  opts.p_sat_fixed = p_bar;
  opts.tol = p.wmmse_tol;
  opts.max_iters = p.wmmse_max_iters;
  opts.qcqp_tol = p.qcqp_tol;

  // fresh matched start always; the carried-over pre-optimization beams are a
  // second start (they win when the CSI barely aged, lose badly when it did)
  WmmseOutcome best = wmmse_solve(ch, assoc, p, opts);
  if (init_f && init_f->rows() == p.N_TX && init_f->cols() == p.streams()) {
    opts.init_f = init_f;
    WmmseOutcome warm = wmmse_solve(ch, assoc, p, opts);
    const double r_best =
        evaluate_cell(best.F, best.W, ch, assoc, best.p_sat, p).istn_sum();
    const double r_warm =
        evaluate_cell(warm.F, warm.W, ch, assoc, warm.p_sat, p).istn_sum();
    const bool warm_wins =
        (!warm.report.infeasible && best.report.infeasible) ||
        (warm.report.infeasible == best.report.infeasible && r_warm > r_best);
    if (warm_wins) best = std::move(warm);
  }
  return best;
}

}  // namespace istn
