// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "istn/geometry.hpp"
#include "istn/params.hpp"
#include "istn/rng.hpp"

namespace istn {

// Conventions (fixed once, used everywhere):
//  * array_response returns unit-modulus entries exp(j*pi*p*sin(theta)) for a
//    half-wavelength ULA, so |a|^2 = n_elem;
//  * row channels act on beamforming columns from the left, with transmit
//    steering entering conjugated (h ~ a_t^H), so a matched beam is
//    f = a_t(theta) and the sensing channel is amp * a_r * a_t^H;
//  * channel synthesis folds the sqrt(N_TX) prefactor against the 1/sqrt(N_TX)
//    array normalization so that E|h|^2 = N_TX (P_LOS beta_L + beta_N).

Eigen::VectorXcd array_response(double theta_deg, int n_elem);

/// Spot-beam gain toward an angular offset phi from the beam center.
double beam_pattern(double phi_deg, double phi_3db_deg);

/// Rectangular SUT receive pattern: main lobe iff |offaxis| <= phi_th.
double sut_rx_gain_lin(double offaxis_deg, const SystemParams& p);

/// Free-space satellite link attenuation with beam pattern and shadowing.
double satellite_attenuation(double dist_m, double rx_gain_lin, double phi_deg, double xi_lin,
                             const SystemParams& p);

// --- 3GPP TR 38.901 UMa statistics (closed form) ---
double uma_los_probability(double d2d_m, double h_ut_m);
double uma_pathloss_los_db(double d2d_m, double h_bs_m, double h_ut_m, double f_c_hz, double c);
double uma_pathloss_nlos_db(double d2d_m, double h_bs_m, double h_ut_m, double f_c_hz, double c);

struct SatelliteLinks {
  double g_sut = 0.0;          // linear attenuation to the SUT
  Eigen::VectorXd g_tut;       // K
  Eigen::VectorXd g_rad;       // N_rad, scalar attenuations
  Eigen::MatrixXcd g_rad_vec;  // N_RX x N_rad, column n = sqrt(g_rad) * a_r(theta_sat)
  double xi_sut = 1.0;
  Eigen::VectorXd xi_tut, xi_rad;  // shadowing draws (linear)
};

/// Frozen large-scale state of one terrestrial link.
struct TerrestrialLargeScale {
  bool los = true;
  double beta_l = 0.0;            // linear LOS large-scale gain
  double beta_n = 0.0;            // linear NLOS large-scale gain
  double aod_los_deg = 0.0;
  Eigen::MatrixXd aod_nlos_deg;   // N_cluster x N_ray
};

/// Small-scale complex gains; redrawn (or correlated-redrawn) per snapshot.
struct TerrestrialSmallScale {
  cplx alpha_los{0.0, 0.0};
  Eigen::MatrixXcd alpha_nlos;  // N_cluster x N_ray
};

struct TerrestrialChannels {
  Eigen::MatrixXcd h_tut;      // K x N_TX, row k is the k-th TUT channel
  Eigen::RowVectorXcd h_sut;   // 1 x N_TX
};

struct SensingChannels {
  std::vector<std::vector<Eigen::MatrixXcd>> g_tar;  // [N_tar][N_rad], each N_RX x N_TX
  std::vector<std::vector<Eigen::MatrixXcd>> g_cl;   // [N_tar*N_cl][N_rad]
  Eigen::MatrixXd alpha_tar;  // N_tar x N_rad, two-hop power path gains
  Eigen::MatrixXd alpha_cl;   // (N_tar*N_cl) x N_rad
  Eigen::MatrixXd rcs_tar;    // N_tar x N_rad, linear m^2
  std::vector<Eigen::MatrixXcd> g_sum;  // per radar: sum of target channels
  std::vector<Eigen::MatrixXcd> g_bar;  // per radar: g_sum + clutter sum
  int n_tar = 0, n_rad = 0, n_cl_total = 0;
};

/// All channel state of one cell at one instant.
struct CellChannelSet {
  TerrestrialChannels terr;
  SatelliteLinks sat;
  SensingChannels sens;
};

/// Everything frozen across the pre-optimization/refinement snapshots.
struct CellLargeScale {
  std::vector<TerrestrialLargeScale> terr;  // K entries then the SUT at index K
  SatelliteLinks sat_true;
  SatelliteLinks sat_pred;  // true gains with the prediction perturbation applied
  SensingChannels sens;     // deterministic LoS geometry + frozen RCS/phases
};

CellLargeScale draw_cell_large_scale(const CellGeometry& cell, const SystemParams& p, StreamKey key);

std::vector<TerrestrialSmallScale> draw_small_scale(const SystemParams& p, RngStream rng);
std::vector<TerrestrialSmallScale> evolve_small_scale(const std::vector<TerrestrialSmallScale>& prev,
                                                      double rho, RngStream rng);

TerrestrialChannels assemble_terrestrial(const CellLargeScale& ls,
                                         const std::vector<TerrestrialSmallScale>& ss,
                                         const SystemParams& p);

/// amp * a_r(theta_r) * a_t(theta_t)^H, rank one by construction.
Eigen::MatrixXcd sensing_channel_matrix(cplx amp, double theta_r_deg, double theta_t_deg,
                                        int n_rx, int n_tx);

/// Two-hop radar-equation power path gain.
double sensing_path_gain(double lambda_m, double rcs_m2, double d_tx_m, double d_rx_m);

SensingChannels draw_sensing_channels(const CellGeometry& cell, const SystemParams& p, RngStream rng);

SatelliteLinks draw_satellite_links(const CellGeometry& cell, const SystemParams& p, RngStream rng);
SatelliteLinks perturb_satellite_links(const SatelliteLinks& links, double err_std_db, RngStream rng);

// Regression-fixture dump; hexfloat text, round-trips bit exactly.
void dump_channels(const CellChannelSet& ch, std::ostream& os);
CellChannelSet load_channels(std::istream& is);

}  // namespace istn
