// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "istn/common.hpp"

namespace istn {

/// Every scalar constant of the scenario. Angles in degrees, gains in dBi,
/// powers in watts, distances in meters unless noted otherwise. dB values are
/// converted to linear scale exactly once, inside the accessors below.
struct SystemParams {
  // carrier and receiver noise
  double f_c = 15e9;             // Hz
  double bandwidth = 100e6;      // Hz
  double c = 299792458.0;        // m/s
  double noise_figure = 8.0;     // dB
  double noise_density = -174.0; // dBm/Hz

  // satellite segment
  double sat_altitude = 500e3;
  double sat_elevation_min = 60.0;  // deg; elevation drawn uniformly in [min, max]
  double sat_elevation_max = 90.0;
  double spotbeam_radius = 10e3;
  double G_s = 38.0;      // satellite antenna gain, dBi
  double G_main = 34.2;   // SUT main-lobe gain, dBi
  double G_side = 21.2;   // SUT side-lobe gain, dBi
  double phi_th = 5.0;    // SUT main-lobe threshold, deg
  double phi_3dB = 1.0;   // spot-beam 3 dB angle, deg
  double G_victim = 17.0; // TUT/radar receive gain toward the satellite, dBi
  double sigma_xi = 4.0;  // satellite shadowing std, dB
  double P_LEO = 200.0;   // total satellite power, W
  int M = 1;              // spot beams / cells

  // terrestrial segment
  int K = 5;          // TUTs per cell
  int N_TX = 30;      // TBS antennas
  int N_RX = 4;       // antennas per radar receiver
  int N_tar = 4;      // sensing targets per cell
  int N_rad = 4;      // radar receivers per cell
  int N_cl = 3;       // clutters per target
  int N_cluster = 10; // NLOS clusters per channel
  int N_ray = 4;      // rays per cluster
  double cell_radius = 200.0;
  double r_sens = 50.0;
  double tbs_height = 10.0;
  double tut_height = 1.5;
  double P_BS = 3.16227766016838;  // per-TBS power, W (35 dBm)

  // QoS and association thresholds
  double R_min_S = 5.0;     // minimum SUT rate, bps/Hz; <= 0 disables the constraint
  double SCNR_min = -10.0;  // dB; <= -300 disables the constraint
  double delta_sat = 5.0;   // deg
  double delta_tar = 5.0;   // deg

  uint64_t rng_seed = 1;

  // model knobs (defaults documented in README)
  double clutter_annulus_min = 5.0;   // m, around each target
  double clutter_annulus_max = 15.0;  // m
  double rcs_mean_dbsm = 0.0;         // target RCS, log-normal
  double rcs_std_db = 3.0;
  double clutter_rcs_offset_db = -10.0;
  double csi_aging_rho = 0.0;         // temporal correlation of small-scale fading; 1 = frozen
  double sat_prediction_err_db = 0.0; // std of log-normal perturbation on predicted satellite gain
  // extra SUT rate headroom the pre-optimization plans for, so the refinement
  // stage keeps a feasible interior after the terrestrial CSI moved
  double sut_rate_margin = 0.1;       // bps/Hz
  // SUT placement annulus around the TBS, in units of cell_radius
  double sut_annulus_min = 3.0;
  double sut_annulus_max = 5.0;
  double wmmse_tol = 1e-5;
  int wmmse_max_iters = 200;
  double qcqp_tol = 1e-6;
  int eps_grid_size = 50;
  int monostatic_antenna_cap = 64;

  // derived quantities
  double wavelength() const { return c / f_c; }
  double noise_power_w() const {
    return dbm_to_watt(noise_density + 10.0 * std::log10(bandwidth) + noise_figure);
  }
  double sigma2_tut() const { return noise_power_w(); }
  double sigma2_sut() const { return noise_power_w(); }
  double sigma2_rad() const { return noise_power_w(); }
  double g_s_lin() const { return db_to_lin(G_s); }
  double g_main_lin() const { return db_to_lin(G_main); }
  double g_side_lin() const { return db_to_lin(G_side); }
  double g_victim_lin() const { return db_to_lin(G_victim); }
  double scnr_min_lin() const { return db_to_lin(SCNR_min); }
  bool scnr_qos_enabled() const { return SCNR_min > -300.0 && N_tar > 0; }
  bool sut_qos_enabled() const { return R_min_S > 0.0; }
  int streams() const { return K + N_tar; }
};

/// Returns one message per violated invariant, each naming the offending
/// field; empty means the parameter set is usable.
std::vector<std::string> validate_params(const SystemParams& p);

}  // namespace istn
