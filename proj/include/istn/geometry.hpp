// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "istn/params.hpp"
#include "istn/rng.hpp"

namespace istn {

// Coordinate convention: flat-earth local tangent plane per cell, TBS at the
// horizontal origin, z up. All ULAs (TBS and radar receivers) lie along the
// x axis, so the angle of any link relative to array broadside is
// asin(u_x) of the unit direction vector, which is always in [-90, 90] deg.

/// Angle from broadside (deg) of the direction `from -> to` for an x-axis ULA.
double angle_from_broadside_deg(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

struct CellGeometry {
  Eigen::Vector3d tbs, sut, satellite;
  std::vector<Eigen::Vector3d> tut;      // K
  std::vector<Eigen::Vector3d> target;   // N_tar
  std::vector<Eigen::Vector3d> radar;    // N_rad
  std::vector<Eigen::Vector3d> clutter;  // N_tar * N_cl, target-major

  // satellite link geometry
  double elevation_deg = 90.0;
  double d_sat_sut = 0.0;
  Eigen::VectorXd d_sat_tut;       // K
  Eigen::VectorXd d_sat_rad;       // N_rad
  double phi_sut = 0.0;            // angular separation from beam center, deg
  Eigen::VectorXd phi_tut;         // K
  Eigen::VectorXd phi_rad;         // N_rad
  Eigen::VectorXd theta_sat_rad;   // satellite AOA at each radar, deg
  double sut_offaxis_tbs = 0.0;    // SUT boresight offset toward the TBS, deg

  // terrestrial link geometry
  Eigen::VectorXd d2d_tut, d3d_tut;  // K
  double d2d_sut = 0.0, d3d_sut = 0.0;
  Eigen::VectorXd theta_aod_tut;     // LOS AOD at the TBS, deg
  double theta_aod_sut = 0.0;

  // sensing geometry
  Eigen::VectorXd d_tx_tar;    // TBS -> target, N_tar
  Eigen::MatrixXd d_rx_tar;    // target -> radar, N_tar x N_rad
  Eigen::VectorXd theta_t_tar; // AOD at the TBS, N_tar
  Eigen::MatrixXd theta_r_tar; // AOA at each radar, N_tar x N_rad
  Eigen::VectorXd d_tx_cl;     // N_tar*N_cl
  Eigen::MatrixXd d_rx_cl;     // (N_tar*N_cl) x N_rad
  Eigen::VectorXd theta_t_cl;
  Eigen::MatrixXd theta_r_cl;
};

struct Geometry {
  std::vector<CellGeometry> cells;
};

/// Deterministic for a fixed (params, seed) pair. Radar receivers sit at the
/// four axis positions r_sens/2 from the TBS when N_rad == 4, uniformly on
/// that circle otherwise.
Geometry generate_geometry(const SystemParams& params, uint64_t seed);

/// Recomputes the derived distance/angle fields of a cell from its positions;
/// used by generate_geometry and by the monostatic transform.
void recompute_cell_links(CellGeometry& cell, const SystemParams& params);

}  // namespace istn
