// SPDX-License-Identifier: Apache-2.0
#include "istn/channel.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace istn {

Eigen::VectorXcd array_response(double theta_deg, int n_elem) {
  if (std::abs(theta_deg) > 90.0 + 1e-12)
    throw istn_error("array_response: angle out of [-90, 90] deg");
  Eigen::VectorXcd a(n_elem);
  const double s = std::sin(deg_to_rad(theta_deg));
  for (int p = 0; p < n_elem; ++p) {
    const double phase = kPi * p * s;
    a(p) = cplx{std::cos(phase), std::sin(phase)};
  }
  return a;
}

double beam_pattern(double phi_deg, double phi_3db_deg) {
  const double x = phi_deg / phi_3db_deg;
  return std::pow(10.0, -0.3 * x * x);
}

double sut_rx_gain_lin(double offaxis_deg, const SystemParams& p) {
  return std::abs(offaxis_deg) <= p.phi_th ? p.g_main_lin() : p.g_side_lin();
}

double satellite_attenuation(double dist_m, double rx_gain_lin, double phi_deg, double xi_lin,
                             const SystemParams& p) {
  const double lam_term = p.c / (2.0 * kPi * p.f_c);
  return lam_term * lam_term * p.g_s_lin() * rx_gain_lin / (dist_m * dist_m) *
         beam_pattern(phi_deg, p.phi_3dB) * xi_lin;
}

// --- TR 38.901 UMa, outdoor UE ---

double uma_los_probability(double d2d_m, double h_ut_m) {
  if (d2d_m <= 18.0) return 1.0;
  double p = 18.0 / d2d_m + std::exp(-d2d_m / 63.0) * (1.0 - 18.0 / d2d_m);
  if (h_ut_m > 13.0) {
    const double ch = std::pow((h_ut_m - 13.0) / 10.0, 1.5);
    p *= 1.0 + ch * 1.25 * std::pow(d2d_m / 100.0, 3.0) * std::exp(-d2d_m / 150.0);
  }
  return std::min(p, 1.0);
}

namespace {
double uma_d3d(double d2d, double h_bs, double h_ut) {
  const double dz = h_bs - h_ut;
  return std::sqrt(d2d * d2d + dz * dz);
}
}  // namespace

double uma_pathloss_los_db(double d2d_m, double h_bs_m, double h_ut_m, double f_c_hz, double c) {
  const double d2d = std::max(d2d_m, 10.0);  // model validity floor
  const double d3d = uma_d3d(d2d, h_bs_m, h_ut_m);
  const double f_ghz = f_c_hz / 1e9;
  const double hb = h_bs_m - 1.0, hu = h_ut_m - 1.0;  // effective heights
  const double d_bp = 4.0 * hb * hu * f_c_hz / c;
  if (d2d <= d_bp) return 28.0 + 22.0 * std::log10(d3d) + 20.0 * std::log10(f_ghz);
  return 28.0 + 40.0 * std::log10(d3d) + 20.0 * std::log10(f_ghz) -
         9.0 * std::log10(d_bp * d_bp + (h_bs_m - h_ut_m) * (h_bs_m - h_ut_m));
}

double uma_pathloss_nlos_db(double d2d_m, double h_bs_m, double h_ut_m, double f_c_hz, double c) {
  const double d2d = std::max(d2d_m, 10.0);
  const double d3d = uma_d3d(d2d, h_bs_m, h_ut_m);
  const double f_ghz = f_c_hz / 1e9;
  const double pl = 13.54 + 39.08 * std::log10(d3d) + 20.0 * std::log10(f_ghz) -
                    0.6 * (h_ut_m - 1.5);
  return std::max(pl, uma_pathloss_los_db(d2d_m, h_bs_m, h_ut_m, f_c_hz, c));
}

namespace {

constexpr double kShadowLosDb = 4.0;   // TR 38.901 UMa LOS shadow-fading std
constexpr double kShadowNlosDb = 6.0;  // NLOS
constexpr double kClusterSpreadDeg = 20.0;
constexpr double kRaySpreadDeg = 3.0;

/// map any angle to [-90, 90] preserving sin(theta) (ULA front-back fold)
double fold_to_broadside(double theta_deg) {
  return rad_to_deg(std::asin(std::sin(deg_to_rad(theta_deg))));
}

TerrestrialLargeScale draw_link_large_scale(double d2d, double aod_los_deg, double extra_gain_lin,
                                            const SystemParams& p, RngStream& rng) {
  TerrestrialLargeScale ls;
  ls.los = rng.bernoulli(uma_los_probability(d2d, p.tut_height));
  const double pl_los = uma_pathloss_los_db(d2d, p.tbs_height, p.tut_height, p.f_c, p.c);
  const double pl_nlos = uma_pathloss_nlos_db(d2d, p.tbs_height, p.tut_height, p.f_c, p.c);
  const double sf_los = kShadowLosDb * rng.normal();
  const double sf_nlos = kShadowNlosDb * rng.normal();
  ls.beta_l = extra_gain_lin * db_to_lin(-(pl_los + sf_los));
  ls.beta_n = extra_gain_lin * db_to_lin(-(pl_nlos + sf_nlos));
  ls.aod_los_deg = aod_los_deg;
  ls.aod_nlos_deg.resize(p.N_cluster, p.N_ray);
  for (int i = 0; i < p.N_cluster; ++i) {
    const double center = aod_los_deg + kClusterSpreadDeg * rng.normal();
    for (int j = 0; j < p.N_ray; ++j)
      ls.aod_nlos_deg(i, j) = fold_to_broadside(center + kRaySpreadDeg * rng.normal());
  }
  return ls;
}

}  // namespace

SatelliteLinks draw_satellite_links(const CellGeometry& cell, const SystemParams& p, RngStream rng) {
  SatelliteLinks links;
  auto shadow = [&]() { return db_to_lin(p.sigma_xi * rng.normal()); };

  links.xi_sut = shadow();
  links.g_sut = satellite_attenuation(cell.d_sat_sut, sut_rx_gain_lin(0.0, p), cell.phi_sut,
                                      links.xi_sut, p);

  const int k = static_cast<int>(cell.tut.size());
  links.g_tut.resize(k);
  links.xi_tut.resize(k);
  for (int i = 0; i < k; ++i) {
    links.xi_tut(i) = shadow();
    links.g_tut(i) = satellite_attenuation(cell.d_sat_tut(i), p.g_victim_lin(), cell.phi_tut(i),
                                           links.xi_tut(i), p);
  }

  const int n_rad = static_cast<int>(cell.radar.size());
  links.g_rad.resize(n_rad);
  links.xi_rad.resize(n_rad);
  links.g_rad_vec.resize(p.N_RX, n_rad);
  for (int n = 0; n < n_rad; ++n) {
    links.xi_rad(n) = shadow();
    links.g_rad(n) = satellite_attenuation(cell.d_sat_rad(n), p.g_victim_lin(), cell.phi_rad(n),
                                           links.xi_rad(n), p);
    links.g_rad_vec.col(n) = std::sqrt(links.g_rad(n)) * array_response(cell.theta_sat_rad(n), p.N_RX);
  }
  return links;
}

SatelliteLinks perturb_satellite_links(const SatelliteLinks& links, double err_std_db, RngStream rng) {
  if (err_std_db <= 0.0) return links;
  SatelliteLinks out = links;
  auto perturb = [&](double g) { return g * db_to_lin(err_std_db * rng.normal()); };
  out.g_sut = perturb(out.g_sut);
  for (int i = 0; i < out.g_tut.size(); ++i) out.g_tut(i) = perturb(out.g_tut(i));
  for (int n = 0; n < out.g_rad.size(); ++n) {
    const double g_new = perturb(out.g_rad(n));
    out.g_rad_vec.col(n) *= std::sqrt(g_new / out.g_rad(n));
    out.g_rad(n) = g_new;
  }
  return out;
}

double sensing_path_gain(double lambda_m, double rcs_m2, double d_tx_m, double d_rx_m) {
  const double four_pi_cubed = 64.0 * kPi * kPi * kPi;
  return lambda_m * lambda_m * rcs_m2 / (four_pi_cubed * d_tx_m * d_tx_m * d_rx_m * d_rx_m);
}

Eigen::MatrixXcd sensing_channel_matrix(cplx amp, double theta_r_deg, double theta_t_deg,
                                        int n_rx, int n_tx) {
  return amp * (array_response(theta_r_deg, n_rx) * array_response(theta_t_deg, n_tx).adjoint());
}

SensingChannels draw_sensing_channels(const CellGeometry& cell, const SystemParams& p, RngStream rng) {
  SensingChannels s;
  s.n_tar = static_cast<int>(cell.target.size());
  s.n_rad = static_cast<int>(cell.radar.size());
  s.n_cl_total = static_cast<int>(cell.clutter.size());
  const double lam = p.wavelength();

  s.alpha_tar.resize(s.n_tar, s.n_rad);
  s.rcs_tar.resize(s.n_tar, s.n_rad);
  s.g_tar.assign(s.n_tar, std::vector<Eigen::MatrixXcd>(s.n_rad));
  for (int i = 0; i < s.n_tar; ++i) {
    for (int n = 0; n < s.n_rad; ++n) {
      s.rcs_tar(i, n) = db_to_lin(p.rcs_mean_dbsm + p.rcs_std_db * rng.normal());
      s.alpha_tar(i, n) = sensing_path_gain(lam, s.rcs_tar(i, n), cell.d_tx_tar(i), cell.d_rx_tar(i, n));
      // the path-gain law is a power ratio; the channel amplitude is its root
      // with a uniform echo phase
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      const cplx amp = std::sqrt(s.alpha_tar(i, n)) * cplx{std::cos(phase), std::sin(phase)};
      s.g_tar[i][n] = sensing_channel_matrix(amp, cell.theta_r_tar(i, n), cell.theta_t_tar(i), p.N_RX, p.N_TX);
    }
  }

  s.alpha_cl.resize(s.n_cl_total, s.n_rad);
  s.g_cl.assign(s.n_cl_total, std::vector<Eigen::MatrixXcd>(s.n_rad));
  for (int l = 0; l < s.n_cl_total; ++l) {
    for (int n = 0; n < s.n_rad; ++n) {
      const double rcs = db_to_lin(p.rcs_mean_dbsm + p.clutter_rcs_offset_db + p.rcs_std_db * rng.normal());
      s.alpha_cl(l, n) = sensing_path_gain(lam, rcs, cell.d_tx_cl(l), cell.d_rx_cl(l, n));
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      const cplx amp = std::sqrt(s.alpha_cl(l, n)) * cplx{std::cos(phase), std::sin(phase)};
      s.g_cl[l][n] = sensing_channel_matrix(amp, cell.theta_r_cl(l, n), cell.theta_t_cl(l), p.N_RX, p.N_TX);
    }
  }

  s.g_sum.assign(s.n_rad, Eigen::MatrixXcd::Zero(p.N_RX, p.N_TX));
  s.g_bar.assign(s.n_rad, Eigen::MatrixXcd::Zero(p.N_RX, p.N_TX));
  for (int n = 0; n < s.n_rad; ++n) {
    for (int i = 0; i < s.n_tar; ++i) s.g_sum[n] += s.g_tar[i][n];
    s.g_bar[n] = s.g_sum[n];
    for (int l = 0; l < s.n_cl_total; ++l) s.g_bar[n] += s.g_cl[l][n];
  }
  return s;
}

CellLargeScale draw_cell_large_scale(const CellGeometry& cell, const SystemParams& p, StreamKey key) {
  CellLargeScale ls;
  RngStream terr_rng(key.child(tag(StreamTag::large_scale)));
  const int k = static_cast<int>(cell.tut.size());
  ls.terr.resize(k + 1);
  for (int i = 0; i < k; ++i)
    ls.terr[i] = draw_link_large_scale(cell.d2d_tut(i), cell.theta_aod_tut(i), 1.0, p, terr_rng);
  // the SUT sees the TBS through its own antenna pattern
  const double g_sut_rx = sut_rx_gain_lin(cell.sut_offaxis_tbs, p);
  ls.terr[k] = draw_link_large_scale(cell.d2d_sut, cell.theta_aod_sut, g_sut_rx, p, terr_rng);

  ls.sat_true = draw_satellite_links(cell, p, RngStream(key.child(tag(StreamTag::shadowing))));
  ls.sat_pred = perturb_satellite_links(ls.sat_true, p.sat_prediction_err_db,
                                        RngStream(key.child(tag(StreamTag::prediction))));
  ls.sens = draw_sensing_channels(cell, p, RngStream(key.child(tag(StreamTag::sensing))));
  return ls;
}

std::vector<TerrestrialSmallScale> draw_small_scale(const SystemParams& p, RngStream rng) {
  std::vector<TerrestrialSmallScale> ss(p.K + 1);
  for (auto& link : ss) {
    link.alpha_los = rng.cnormal();
    link.alpha_nlos.resize(p.N_cluster, p.N_ray);
    for (int i = 0; i < p.N_cluster; ++i)
      for (int j = 0; j < p.N_ray; ++j) link.alpha_nlos(i, j) = rng.cnormal();
  }
  return ss;
}

std::vector<TerrestrialSmallScale> evolve_small_scale(const std::vector<TerrestrialSmallScale>& prev,
                                                      double rho, RngStream rng) {
  const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::vector<TerrestrialSmallScale> out(prev.size());
  for (size_t u = 0; u < prev.size(); ++u) {
    out[u].alpha_los = rho * prev[u].alpha_los + mix * rng.cnormal();
    out[u].alpha_nlos.resize(prev[u].alpha_nlos.rows(), prev[u].alpha_nlos.cols());
    for (int i = 0; i < prev[u].alpha_nlos.rows(); ++i)
      for (int j = 0; j < prev[u].alpha_nlos.cols(); ++j)
        out[u].alpha_nlos(i, j) = rho * prev[u].alpha_nlos(i, j) + mix * rng.cnormal();
  }
  return out;
}

namespace {

Eigen::RowVectorXcd assemble_link(const TerrestrialLargeScale& ls, const TerrestrialSmallScale& ss,
                                  int n_tx) {
  Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Zero(n_tx);
  if (ls.los && ls.beta_l > 0.0)
    h += std::sqrt(ls.beta_l) * ss.alpha_los * array_response(ls.aod_los_deg, n_tx).adjoint();
  const int n_cluster = static_cast<int>(ls.aod_nlos_deg.rows());
  const int n_ray = static_cast<int>(ls.aod_nlos_deg.cols());
  const double norm = std::sqrt(ls.beta_n / (n_cluster * n_ray));
  for (int i = 0; i < n_cluster; ++i)
    for (int j = 0; j < n_ray; ++j)
      h += norm * ss.alpha_nlos(i, j) * array_response(ls.aod_nlos_deg(i, j), n_tx).adjoint();
  return h;
}

}  // namespace

TerrestrialChannels assemble_terrestrial(const CellLargeScale& ls,
                                         const std::vector<TerrestrialSmallScale>& ss,
                                         const SystemParams& p) {
  TerrestrialChannels ch;
  ch.h_tut.resize(p.K, p.N_TX);
  for (int k = 0; k < p.K; ++k) ch.h_tut.row(k) = assemble_link(ls.terr[k], ss[k], p.N_TX);
  ch.h_sut = assemble_link(ls.terr[p.K], ss[p.K], p.N_TX);
  return ch;
}

// --- hexfloat text dump (bit-exact round trip) ---

namespace {

void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf << '\n';
}
void put(std::ostream& os, const cplx& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%a %a", v.real(), v.imag());
  os << buf << '\n';
}
double get_d(std::istream& is) {
  std::string t;
  is >> t;
  return std::strtod(t.c_str(), nullptr);
}
cplx get_c(std::istream& is) {
  const double re = get_d(is);
  const double im = get_d(is);
  return {re, im};
}

void put_mat(std::ostream& os, const Eigen::MatrixXcd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) put(os, m(r, c));
}
Eigen::MatrixXcd get_mat(std::istream& is) {
  int r, c;
  is >> r >> c;
  Eigen::MatrixXcd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = get_c(is);
  return m;
}
void put_vec(std::ostream& os, const Eigen::VectorXd& v) {
  os << v.size() << '\n';
  for (int i = 0; i < v.size(); ++i) put(os, v(i));
}
Eigen::VectorXd get_vec(std::istream& is) {
  int n;
  is >> n;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = get_d(is);
  return v;
}
void put_matd(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) put(os, m(r, c));
}
Eigen::MatrixXd get_matd(std::istream& is) {
  int r, c;
  is >> r >> c;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = get_d(is);
  return m;
}

}  // namespace

void dump_channels(const CellChannelSet& ch, std::ostream& os) {
  os << "istn-channels v1\n";
  put_mat(os, ch.terr.h_tut);
  put_mat(os, ch.terr.h_sut);
  put(os, ch.sat.g_sut);
  put(os, ch.sat.xi_sut);
  put_vec(os, ch.sat.g_tut);
  put_vec(os, ch.sat.xi_tut);
  put_vec(os, ch.sat.g_rad);
  put_vec(os, ch.sat.xi_rad);
  put_mat(os, ch.sat.g_rad_vec);
  os << ch.sens.n_tar << ' ' << ch.sens.n_rad << ' ' << ch.sens.n_cl_total << '\n';
  put_matd(os, ch.sens.alpha_tar);
  put_matd(os, ch.sens.alpha_cl);
  put_matd(os, ch.sens.rcs_tar);
  for (const auto& row : ch.sens.g_tar)
    for (const auto& m : row) put_mat(os, m);
  for (const auto& row : ch.sens.g_cl)
    for (const auto& m : row) put_mat(os, m);
}

CellChannelSet load_channels(std::istream& is) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "istn-channels" || version != "v1") throw istn_error("bad channel dump header");
  CellChannelSet ch;
  ch.terr.h_tut = get_mat(is);
  ch.terr.h_sut = get_mat(is);
  ch.sat.g_sut = get_d(is);
  ch.sat.xi_sut = get_d(is);
  ch.sat.g_tut = get_vec(is);
  ch.sat.xi_tut = get_vec(is);
  ch.sat.g_rad = get_vec(is);
  ch.sat.xi_rad = get_vec(is);
  ch.sat.g_rad_vec = get_mat(is);
  is >> ch.sens.n_tar >> ch.sens.n_rad >> ch.sens.n_cl_total;
  ch.sens.alpha_tar = get_matd(is);
  ch.sens.alpha_cl = get_matd(is);
  ch.sens.rcs_tar = get_matd(is);
  ch.sens.g_tar.assign(ch.sens.n_tar, std::vector<Eigen::MatrixXcd>(ch.sens.n_rad));
  for (auto& row : ch.sens.g_tar)
    for (auto& m : row) m = get_mat(is);
  ch.sens.g_cl.assign(ch.sens.n_cl_total, std::vector<Eigen::MatrixXcd>(ch.sens.n_rad));
  for (auto& row : ch.sens.g_cl)
    for (auto& m : row) m = get_mat(is);
  const int n_rx = ch.sens.n_rad > 0 && ch.sens.n_tar > 0 ? static_cast<int>(ch.sens.g_tar[0][0].rows())
                                                          : static_cast<int>(ch.sat.g_rad_vec.rows());
  const int n_tx = static_cast<int>(ch.terr.h_tut.cols());
  ch.sens.g_sum.assign(ch.sens.n_rad, Eigen::MatrixXcd::Zero(n_rx, n_tx));
  ch.sens.g_bar.assign(ch.sens.n_rad, Eigen::MatrixXcd::Zero(n_rx, n_tx));
  for (int n = 0; n < ch.sens.n_rad; ++n) {
    for (int i = 0; i < ch.sens.n_tar; ++i) ch.sens.g_sum[n] += ch.sens.g_tar[i][n];
    ch.sens.g_bar[n] = ch.sens.g_sum[n];
    for (int l = 0; l < ch.sens.n_cl_total; ++l) ch.sens.g_bar[n] += ch.sens.g_cl[l][n];
  }
  return ch;
}

}  // namespace istn
