// SPDX-License-Identifier: Apache-2.0
#include "istn/params.hpp"

#include <cmath>

namespace istn {

std::vector<std::string> validate_params(const SystemParams& p) {
  std::vector<std::string> issues;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  };

  require(p.f_c > 0, "f_c must be positive");
  require(p.bandwidth > 0, "bandwidth must be positive");
  require(p.c > 0, "c must be positive");
  require(std::isfinite(p.noise_figure), "noise_figure must be finite");
  require(std::isfinite(p.noise_density), "noise_density must be finite");
  require(p.sat_altitude > 0, "sat_altitude must be positive");
  require(p.sat_elevation_min > 0 && p.sat_elevation_min <= p.sat_elevation_max,
          "sat_elevation_min must be in (0, sat_elevation_max]");
  require(p.sat_elevation_max <= 90.0, "sat_elevation_max must not exceed 90");
  require(p.spotbeam_radius > 0, "spotbeam_radius must be positive");
  require(p.phi_3dB > 0, "phi_3dB must be positive");
  require(p.phi_th > 0, "phi_th must be positive");
  require(std::isfinite(p.G_victim), "G_victim must be finite");
  require(p.sigma_xi >= 0, "sigma_xi must be non-negative");
  require(p.P_LEO > 0, "P_LEO must be positive");
  require(p.P_BS > 0, "P_BS must be positive");
  require(p.M >= 1, "M must be at least 1");
  require(p.K >= 1, "K must be positive");
  require(p.N_TX >= 1, "N_TX must be positive");
  require(p.N_RX >= 1, "N_RX must be positive");
  require(p.N_rad >= 1, "N_rad must be positive");
  // N_tar = 0 / N_cl = 0 are accepted to allow sensing-free and clutter-free
  // scenarios; everything downstream handles the empty sets.
  require(p.N_tar >= 0, "N_tar must be non-negative");
  require(p.N_cl >= 0, "N_cl must be non-negative");
  require(p.N_tar <= p.N_rad, "N_tar exceeds N_rad");
  require(p.N_cluster >= 1, "N_cluster must be positive");
  require(p.N_ray >= 1, "N_ray must be positive");
  require(p.cell_radius > 0, "cell_radius must be positive");
  require(p.r_sens > 0, "r_sens must be positive");
  require(p.tbs_height > 0, "tbs_height must be positive");
  require(p.tut_height > 0, "tut_height must be positive");
  require(p.delta_sat >= 0, "delta_sat must be non-negative");
  require(p.delta_tar >= 0, "delta_tar must be non-negative");
  require(p.clutter_annulus_min > 0 && p.clutter_annulus_min <= p.clutter_annulus_max,
          "clutter_annulus_min must be in (0, clutter_annulus_max]");
  require(p.rcs_std_db >= 0, "rcs_std_db must be non-negative");
  require(p.csi_aging_rho >= 0.0 && p.csi_aging_rho <= 1.0, "csi_aging_rho must be in [0, 1]");
  require(p.sat_prediction_err_db >= 0, "sat_prediction_err_db must be non-negative");
  require(p.sut_rate_margin >= 0, "sut_rate_margin must be non-negative");
  require(p.sut_annulus_min > 0 && p.sut_annulus_min <= p.sut_annulus_max,
          "sut_annulus_min must be in (0, sut_annulus_max]");
  require(p.wmmse_tol > 0, "wmmse_tol must be positive");
  require(p.wmmse_max_iters >= 1, "wmmse_max_iters must be positive");
  require(p.qcqp_tol > 0, "qcqp_tol must be positive");
  require(p.eps_grid_size >= 2, "eps_grid_size must be at least 2");
  require(p.monostatic_antenna_cap >= 1, "monostatic_antenna_cap must be positive");

  const double sigma2 = p.noise_power_w();
  require(std::isfinite(sigma2) && sigma2 > 0, "derived noise power must be finite and positive");

  return issues;
}

}  // namespace istn
