// SPDX-License-Identifier: Apache-2.0
#include "istn/metrics.hpp"

#include <limits>

namespace istn {

namespace {
double abs2(const cplx& z) { return std::norm(z); }
}

double sinr_tut(const Beamformer& F, const CellChannelSet& ch, double p_sat, int k,
                const SystemParams& p, InterferenceToggles t) {
  const Eigen::RowVectorXcd h = ch.terr.h_tut.row(k);
  const Eigen::RowVectorXcd hf = h * F;
  const double sig = abs2(hf(k));
  double denom = p.sigma2_tut();
  for (int j = 0; j < hf.size(); ++j)
    if (j != k) denom += abs2(hf(j));
  if (t.sat_to_terr) denom += ch.sat.g_tut(k) * p_sat;
  return sig / denom;
}

double sinr_sut(const Beamformer& F, const CellChannelSet& ch, double p_sat,
                const SystemParams& p, InterferenceToggles t) {
  double denom = p.sigma2_sut();
  if (t.terr_to_sat) denom += (ch.terr.h_sut * F).squaredNorm();
  return ch.sat.g_sut * p_sat / denom;
}

InterferenceSplit sensing_interference(const Beamformer& F, const Eigen::RowVectorXcd& w,
                                       const CellChannelSet& ch, const Association& assoc,
                                       double p_sat, int i, InterferenceToggles t) {
  const int n = assoc(i);
  const int k_total = static_cast<int>(F.cols());
  const int col_i = k_total - ch.sens.n_tar + i;
  InterferenceSplit s;
  for (int j = 0; j < ch.sens.n_tar; ++j)
    if (j != i) s.i1 += abs2((w * ch.sens.g_tar[j][n] * F.col(col_i))(0));
  for (int l = 0; l < ch.sens.n_cl_total; ++l) s.i2 += (w * ch.sens.g_cl[l][n] * F).squaredNorm();
  const Eigen::RowVectorXcd wg = w * ch.sens.g_sum[n];
  for (int j = 0; j < k_total; ++j)
    if (j != col_i) s.i3 += abs2((wg * F.col(j))(0));
  if (t.sat_to_terr) s.i4 = abs2((w * ch.sat.g_rad_vec.col(n))(0)) * p_sat;
  return s;
}

double scnr(const Beamformer& F, const ReceiveFilters& W, const CellChannelSet& ch,
            const Association& assoc, double p_sat, int i, const SystemParams& p,
            InterferenceToggles t, InterferenceSplit* split) {
  const int n = assoc(i);
  const int col_i = static_cast<int>(F.cols()) - ch.sens.n_tar + i;
  const Eigen::RowVectorXcd w = W.w_tar.row(i);
  const double sig = abs2((w * ch.sens.g_tar[i][n] * F.col(col_i))(0));
  const InterferenceSplit s = sensing_interference(F, w, ch, assoc, p_sat, i, t);
  if (split) *split = s;
  return sig / (s.total() + w.squaredNorm() * p.sigma2_rad());
}

double mse_tut(const Beamformer& F, cplx w, const CellChannelSet& ch, double p_sat, int k,
               const SystemParams& p, InterferenceToggles t) {
  const Eigen::RowVectorXcd hf = ch.terr.h_tut.row(k) * F;
  double eps = abs2(1.0 - w * hf(k));
  for (int j = 0; j < hf.size(); ++j)
    if (j != k) eps += abs2(w * hf(j));
  if (t.sat_to_terr) eps += abs2(w) * ch.sat.g_tut(k) * p_sat;
  return eps + p.sigma2_tut() * abs2(w);
}

double mse_sut(const Beamformer& F, cplx w, const CellChannelSet& ch, double p_sat,
               const SystemParams& p, InterferenceToggles t) {
  double eps = abs2(1.0 - w * std::sqrt(ch.sat.g_sut * p_sat));
  if (t.terr_to_sat) eps += abs2(w) * (ch.terr.h_sut * F).squaredNorm();
  return eps + p.sigma2_sut() * abs2(w);
}

double mse_target(const Beamformer& F, const Eigen::RowVectorXcd& w, const CellChannelSet& ch,
                  const Association& assoc, double p_sat, int i, const SystemParams& p,
                  InterferenceToggles t) {
  const int n = assoc(i);
  const int col_i = static_cast<int>(F.cols()) - ch.sens.n_tar + i;
  const InterferenceSplit s = sensing_interference(F, w, ch, assoc, p_sat, i, t);
  return abs2(1.0 - (w * ch.sens.g_tar[i][n] * F.col(col_i))(0)) + s.total() +
         p.sigma2_rad() * w.squaredNorm();
}

Eigen::MatrixXcd virtual_sensing_covariance(const Beamformer& F, const CellChannelSet& ch,
                                            const Association& assoc, double p_sat, int i,
                                            const SystemParams& p, InterferenceToggles t) {
  const int n = assoc(i);
  const int n_rx = static_cast<int>(ch.sens.g_tar[i][n].rows());
  const int k_total = static_cast<int>(F.cols());
  const int col_i = k_total - ch.sens.n_tar + i;

  Eigen::MatrixXcd r = p.sigma2_rad() * Eigen::MatrixXcd::Identity(n_rx, n_rx);
  auto add = [&r](const Eigen::VectorXcd& a) { r += a * a.adjoint(); };

  add(ch.sens.g_tar[i][n] * F.col(col_i));  // desired echo
  for (int j = 0; j < ch.sens.n_tar; ++j)
    if (j != i) add(ch.sens.g_tar[j][n] * F.col(col_i));
  for (int l = 0; l < ch.sens.n_cl_total; ++l)
    for (int j = 0; j < k_total; ++j) add(ch.sens.g_cl[l][n] * F.col(j));
  for (int j = 0; j < k_total; ++j)
    if (j != col_i) add(ch.sens.g_sum[n] * F.col(j));
  if (t.sat_to_terr) r += p_sat * ch.sat.g_rad_vec.col(n) * ch.sat.g_rad_vec.col(n).adjoint();
  return r;
}

ReceiveFilters mmse_filters(const Beamformer& F, const CellChannelSet& ch, const Association& assoc,
                            double p_sat, const SystemParams& p, InterferenceToggles t) {
  ReceiveFilters w;
  const int k = static_cast<int>(ch.terr.h_tut.rows());
  w.w_tut.resize(k);
  for (int kk = 0; kk < k; ++kk) {
    const Eigen::RowVectorXcd hf = ch.terr.h_tut.row(kk) * F;
    double r = hf.squaredNorm() + p.sigma2_tut();
    if (t.sat_to_terr) r += ch.sat.g_tut(kk) * p_sat;
    w.w_tut(kk) = std::conj(hf(kk)) / r;
  }

  {
    const double s = std::sqrt(ch.sat.g_sut * p_sat);
    double r = s * s + p.sigma2_sut();
    if (t.terr_to_sat) r += (ch.terr.h_sut * F).squaredNorm();
    w.w_sut = s / r;
  }

  const int n_tar = ch.sens.n_tar;
  const int n_rx = static_cast<int>(ch.sat.g_rad_vec.rows());
  w.w_tar.resize(n_tar, n_rx);
  for (int i = 0; i < n_tar; ++i) {
    const int n = assoc(i);
    const int col_i = static_cast<int>(F.cols()) - n_tar + i;
    const Eigen::VectorXcd a_d = ch.sens.g_tar[i][n] * F.col(col_i);
    const Eigen::MatrixXcd r = virtual_sensing_covariance(F, ch, assoc, p_sat, i, p, t);
    w.w_tar.row(i) = r.llt().solve(a_d).adjoint();
  }
  return w;
}

CellMetrics evaluate_cell(const Beamformer& F, const ReceiveFilters& W, const CellChannelSet& ch,
                          const Association& assoc, double p_sat, const SystemParams& p,
                          InterferenceToggles t) {
  CellMetrics m;
  const int k = static_cast<int>(ch.terr.h_tut.rows());
  m.rate_tut.resize(k);
  for (int kk = 0; kk < k; ++kk) m.rate_tut(kk) = rate_bps_hz(sinr_tut(F, ch, p_sat, kk, p, t));
  m.rate_sut = rate_bps_hz(sinr_sut(F, ch, p_sat, p, t));
  m.scnr_lin.resize(ch.sens.n_tar);
  for (int i = 0; i < ch.sens.n_tar; ++i) m.scnr_lin(i) = scnr(F, W, ch, assoc, p_sat, i, p, t);
  return m;
}

}  // namespace istn
