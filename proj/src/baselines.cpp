// SPDX-License-Identifier: Apache-2.0
#include "istn/baselines.hpp"

#include <cmath>

#include "istn/waterfill.hpp"

namespace istn {

MethodSpec method_spec(const std::string& name) {
  MethodSpec m;
  m.name = name;
  if (name == "proposed") {
    m.bf = MethodSpec::Bf::wmmse;
    m.tbs_power = MethodSpec::TbsPower::wmmse_implicit;
    m.sat_power = MethodSpec::SatPower::wmmse_joint_merge;
    m.assoc = AssocRule::proposed;
  } else if (name == "interference_free") {
    m.toggles = {false, false};
  } else if (name == "zf_eps") {
    m.sat_power = MethodSpec::SatPower::eps;
  } else if (name == "greedy") {
    m.design_ignores_sat = true;
  } else if (name == "uniform") {
    m.tbs_power = MethodSpec::TbsPower::scnr_then_uniform;
    m.design_ignores_sat = true;
  } else if (name == "coop_uniform") {
    m.bf = MethodSpec::Bf::wmmse;
    m.tbs_power = MethodSpec::TbsPower::wmmse_implicit;
    m.sat_power = MethodSpec::SatPower::uniform;
    m.assoc = AssocRule::proposed;
    m.fixed_sat_power = true;
  } else if (name == "assoc_proposed" || name == "assoc_nearest" || name == "assoc_greedy" ||
             name == "assoc_random") {
    m.bf = MethodSpec::Bf::wmmse;
    m.tbs_power = MethodSpec::TbsPower::wmmse_implicit;
    m.sat_power = MethodSpec::SatPower::uniform;
    m.fixed_sat_power = true;
    m.assoc = name == "assoc_proposed" ? AssocRule::proposed
              : name == "assoc_nearest" ? AssocRule::nearest
              : name == "assoc_greedy"  ? AssocRule::greedy
                                        : AssocRule::random;
  } else if (name == "satellite_free") {
    m.bf = MethodSpec::Bf::wmmse;
    m.satellite_free = true;
    m.assoc = AssocRule::proposed;
  } else if (name == "monostatic") {
    m.bf = MethodSpec::Bf::wmmse;
    m.monostatic = true;
    m.fixed_sat_power = true;
    m.assoc = AssocRule::proposed;
  } else {
    throw istn_error("unknown method: " + name);
  }
  return m;
}

namespace {

/// SCNR of target i with an MMSE receive filter at the given transmit state.
double scnr_with_mmse(const Beamformer& F, const CellChannelSet& ch, const Association& assoc,
                      double p_sat, int i, const SystemParams& p, InterferenceToggles t) {
  const int n = assoc(i);
  const int col_i = static_cast<int>(F.cols()) - ch.sens.n_tar + i;
  const Eigen::VectorXcd a_d = ch.sens.g_tar[i][n] * F.col(col_i);
  if (a_d.squaredNorm() <= 0.0) return 0.0;
  const Eigen::MatrixXcd r = virtual_sensing_covariance(F, ch, assoc, p_sat, i, p, t);
  ReceiveFilters w;
  w.w_tut = Eigen::VectorXcd::Zero(ch.terr.h_tut.rows());
  w.w_tar = Eigen::MatrixXcd::Zero(ch.sens.n_tar, a_d.size());
  w.w_tar.row(i) = r.llt().solve(a_d).adjoint();
  return scnr(F, w, ch, assoc, p_sat, i, p, t);
}


/// Precomputes, per target, the virtual-link covariance pieces of every
/// stream direction so SCNR(power vector) needs only scaled accumulation.
class ZfScnrEvaluator {
 public:
  ZfScnrEvaluator(const Eigen::MatrixXcd& dirs, const CellChannelSet& ch,
                  const Association& assoc, const SystemParams& p, double p_sat,
                  InterferenceToggles t)
      : n_tar_(ch.sens.n_tar), n_streams_(static_cast<int>(dirs.cols())), sigma2_(p.sigma2_rad()) {
    const int n_rx = static_cast<int>(ch.sat.g_rad_vec.rows());
    base_.assign(n_tar_, Eigen::MatrixXcd::Zero(n_rx, n_rx));
    own_.assign(n_tar_, Eigen::MatrixXcd::Zero(n_rx, n_rx));
    desired_.assign(n_tar_, Eigen::VectorXcd::Zero(n_rx));
    per_stream_.assign(n_tar_, std::vector<Eigen::MatrixXcd>(n_streams_));
    for (int i = 0; i < n_tar_; ++i) {
      const int n = assoc(i);
      const int col_i = n_streams_ - n_tar_ + i;
      desired_[i] = ch.sens.g_tar[i][n] * dirs.col(col_i);
      Eigen::MatrixXcd own = desired_[i] * desired_[i].adjoint();
      for (int j = 0; j < n_tar_; ++j)
        if (j != i) {
          const Eigen::VectorXcd v = ch.sens.g_tar[j][n] * dirs.col(col_i);
          own += v * v.adjoint();
        }
      own_[i] = own;
      Eigen::MatrixXcd base = sigma2_ * Eigen::MatrixXcd::Identity(n_rx, n_rx);
      if (t.sat_to_terr)
        base += p_sat * ch.sat.g_rad_vec.col(n) * ch.sat.g_rad_vec.col(n).adjoint();
      base_[i] = base;
      for (int j = 0; j < n_streams_; ++j) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_rx, n_rx);
        for (int l = 0; l < ch.sens.n_cl_total; ++l) {
          const Eigen::VectorXcd v = ch.sens.g_cl[l][n] * dirs.col(j);
          m += v * v.adjoint();
        }
        if (j != col_i) {
          const Eigen::VectorXcd v = ch.sens.g_sum[n] * dirs.col(j);
          m += v * v.adjoint();
        }
        per_stream_[i][j] = m;
      }
    }
  }

  /// max-SCNR of target i under per-stream powers pw (MVDR receive filter)
  double scnr(int i, const Eigen::VectorXd& pw) const {
    const double rho = pw(n_streams_ - n_tar_ + i);
    if (rho <= 0.0) return 0.0;
    Eigen::MatrixXcd r = base_[i] + rho * own_[i];
    for (int j = 0; j < n_streams_; ++j)
      if (pw(j) > 0.0) r += pw(j) * per_stream_[i][j];
    const Eigen::VectorXcd a = std::sqrt(rho) * desired_[i];
    const double whitened = a.dot(r.llt().solve(a)).real();
    // SCNR from the MMSE quotient: a^H R^{-1} a with R including the signal
    return whitened / std::max(1e-300, 1.0 - whitened);
  }

 private:
  int n_tar_, n_streams_;
  double sigma2_;
  std::vector<Eigen::MatrixXcd> base_, own_;
  std::vector<Eigen::VectorXcd> desired_;
  std::vector<std::vector<Eigen::MatrixXcd>> per_stream_;
};

Eigen::MatrixXcd zf_directions(const CellChannelSet& ch, const Association& assoc,
                               const SystemParams& p) {
  const int n_streams = p.streams();
  if (n_streams > p.N_TX) throw istn_error("zf_beamformer: K + N_tar exceeds N_TX");
  Eigen::MatrixXcd rows(n_streams, p.N_TX);
  for (int k = 0; k < p.K; ++k) rows.row(k) = ch.terr.h_tut.row(k).normalized();
  for (int i = 0; i < ch.sens.n_tar; ++i) {
    // the first radar antenna has unit response, so row 0 of the rank-one
    // sensing channel is exactly (amp * transmit steering)^H-row
    const Eigen::RowVectorXcd steer = ch.sens.g_tar[i][assoc(i)].row(0);
    rows.row(p.K + i) = steer.normalized();
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(rows);
  Eigen::MatrixXcd pinv = cod.pseudoInverse();  // N_TX x n_streams
  for (int j = 0; j < n_streams; ++j) {
    const double nrm = pinv.col(j).norm();
    if (nrm > 0) pinv.col(j) /= nrm;
  }
  return pinv;
}

Beamformer with_powers(const Eigen::MatrixXcd& dirs, const Eigen::VectorXd& pw) {
  Beamformer F = dirs;
  for (int j = 0; j < F.cols(); ++j) F.col(j) *= std::sqrt(std::max(0.0, pw(j)));
  return F;
}

}  // namespace

ZfDesign zf_beamformer(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                       double p_sat_design, double p_budget, MethodSpec::TbsPower tbs_power,
                       InterferenceToggles toggles) {
  const int n_streams = p.streams();
  const Eigen::MatrixXcd dirs = zf_directions(ch, assoc, p);
  Eigen::VectorXd pw = Eigen::VectorXd::Zero(n_streams);
  ZfDesign out;

  const bool want_scnr = p.scnr_qos_enabled() && ch.sens.n_tar > 0;
  const ZfScnrEvaluator scnr_eval(dirs, ch, assoc, p, p_sat_design, toggles);
  // slight overshoot so the realized SCNR clears the constraint after the
  // comm/sensing coupling settles
  const double target = want_scnr ? p.scnr_min_lin() * 1.002 : 0.0;

  auto fill_comm = [&](double residual) {
    if (tbs_power == MethodSpec::TbsPower::scnr_then_uniform) {
      for (int k = 0; k < p.K; ++k) pw(k) = residual / p.K;
    } else {
      Eigen::VectorXd gain(p.K), denom(p.K), caps(p.K);
      for (int k = 0; k < p.K; ++k) {
        gain(k) = std::norm((ch.terr.h_tut.row(k) * dirs.col(k))(0));
        denom(k) = p.sigma2_tut();
        if (toggles.sat_to_terr) denom(k) += ch.sat.g_tut(k) * p_sat_design;
        caps(k) = std::numeric_limits<double>::infinity();
      }
      pw.head(p.K) = capped_waterfill(gain, denom, residual, caps);
    }
  };

  // alternate sensing bisections and the residual comm split until the
  // realized SCNRs settle; clutter couples every stream, so one pass is
  // not enough
  const int rounds = want_scnr ? 6 : 1;
  for (int round = 0; round < rounds; ++round) {
    if (want_scnr) {
      for (int i = 0; i < ch.sens.n_tar; ++i) {
        // the sensing claim is bounded by the budget minus the other radar
        // beams; the comm side refills from whatever remains afterwards
        const double budget_left =
            std::max(0.0, p_budget - pw.tail(ch.sens.n_tar).sum() + pw(p.K + i));
        auto scnr_at = [&](double rho) {
          Eigen::VectorXd trial = pw;
          trial(p.K + i) = rho;
          return scnr_eval.scnr(i, trial);
        };
        if (budget_left <= 0.0 || scnr_at(budget_left) < target) {
          pw(p.K + i) = budget_left;
          continue;
        }
        double lo = 0.0, hi = budget_left;
        for (int it = 0; it < 34; ++it) {
          const double mid = 0.5 * (lo + hi);
          (scnr_at(mid) < target ? lo : hi) = mid;
        }
        pw(p.K + i) = hi;
      }
    }
    fill_comm(std::max(0.0, p_budget - pw.tail(ch.sens.n_tar).sum()));

    if (!want_scnr) break;
    bool settled = true;
    for (int i = 0; i < ch.sens.n_tar; ++i)
      if (scnr_eval.scnr(i, pw) < p.scnr_min_lin()) settled = false;
    if (settled) break;
  }

  out.F = with_powers(dirs, pw);
  out.stream_power = pw;
  if (want_scnr) {
    // honest verdict at the final operating point, via the direct route
    for (int i = 0; i < ch.sens.n_tar; ++i)
      if (scnr_with_mmse(out.F, ch, assoc, p_sat_design, i, p, toggles) <
          p.scnr_min_lin() * (1.0 - 1e-3))
        out.scnr_feasible = false;
  }
  return out;
}

std::pair<double, double> eps_satellite_power(const CellChannelSet& ch, const Association& assoc,
                                              const SystemParams& p, int grid_size) {
  if (grid_size < 2) throw istn_error("eps_satellite_power: grid_size must be >= 2");
  auto log_grid = [&](double top) {
    std::vector<double> g{0.0};
    const int n_pts = grid_size - 1;
    const double lo = 1e-4 * top;
    for (int i = 0; i < n_pts; ++i)
      g.push_back(n_pts == 1 ? top
                             : lo * std::pow(top / lo, static_cast<double>(i) / (n_pts - 1)));
    return g;
  };
  const auto sat_grid = log_grid(p.P_LEO);
  const auto tbs_grid = log_grid(p.P_BS);

  // the search targets the same problem as the optimizer: among grid points
  // meeting the SCNR and SUT-rate floors, maximize the ISTN sum rate; points
  // violating a floor only win over other violating points
  double best_rate = -1.0, best_sat = 0.0, best_tbs = 0.0;
  int best_level = -1;  // 2 = all floors met, 1 = SCNR only, 0 = none
  for (double ps : sat_grid) {
    for (double pt : tbs_grid) {
      const ZfDesign d = zf_beamformer(ch, assoc, p, ps, pt);
      const ReceiveFilters w = mmse_filters(d.F, ch, assoc, ps, p);
      const CellMetrics m = evaluate_cell(d.F, w, ch, assoc, ps, p);
      const double rate = m.istn_sum();
      const bool sut_ok = !p.sut_qos_enabled() || m.rate_sut >= p.R_min_S - 1e-9;
      const int level = (d.scnr_feasible ? 1 : 0) + (d.scnr_feasible && sut_ok ? 1 : 0);
      if (level > best_level || (level == best_level && rate > best_rate)) {
        best_rate = rate;
        best_sat = ps;
        best_tbs = pt;
        best_level = level;
      }
    }
  }
  return {best_sat, best_tbs};
}

SystemParams monostatic_config(const SystemParams& p) {
  SystemParams out = p;
  const long total = static_cast<long>(p.N_rad) * p.N_RX;
  if (total > p.monostatic_antenna_cap)
    throw istn_error("monostatic_config: N_rad * N_RX exceeds monostatic_antenna_cap");
  out.N_RX = static_cast<int>(total);
  out.N_rad = 1;
  return out;
}

}  // namespace istn
