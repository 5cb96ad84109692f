// SPDX-License-Identifier: Apache-2.0
#include "istn/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace istn {

double angle_from_broadside_deg(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d u = (to - from).normalized();
  const double ux = std::clamp(u.x(), -1.0, 1.0);
  return rad_to_deg(std::asin(ux));
}

namespace {

Eigen::Vector3d uniform_disk(RngStream& rng, double radius, double height) {
  // inverse-CDF radius for a uniform disk
  const double r = radius * std::sqrt(rng.uniform());
  const double ang = rng.uniform(0.0, 2.0 * kPi);
  return {r * std::cos(ang), r * std::sin(ang), height};
}

double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double cosv = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return rad_to_deg(std::acos(cosv));
}

}  // namespace

void recompute_cell_links(CellGeometry& cell, const SystemParams& params) {
  const int k = static_cast<int>(cell.tut.size());
  const int n_tar = static_cast<int>(cell.target.size());
  const int n_rad = static_cast<int>(cell.radar.size());
  const int n_cl = static_cast<int>(cell.clutter.size());
  (void)params;

  cell.d_sat_sut = (cell.satellite - cell.sut).norm();
  const Eigen::Vector3d beam_axis = cell.sut - cell.satellite;  // beam centered on the SUT

  cell.d_sat_tut.resize(k);
  cell.phi_tut.resize(k);
  cell.d2d_tut.resize(k);
  cell.d3d_tut.resize(k);
  cell.theta_aod_tut.resize(k);
  for (int i = 0; i < k; ++i) {
    cell.d_sat_tut(i) = (cell.satellite - cell.tut[i]).norm();
    cell.phi_tut(i) = angle_between_deg(beam_axis, cell.tut[i] - cell.satellite);
    const Eigen::Vector3d d = cell.tut[i] - cell.tbs;
    cell.d2d_tut(i) = std::hypot(d.x(), d.y());
    cell.d3d_tut(i) = d.norm();
    cell.theta_aod_tut(i) = angle_from_broadside_deg(cell.tbs, cell.tut[i]);
  }

  cell.phi_sut = 0.0;  // the spot beam is centered on its SUT
  {
    const Eigen::Vector3d d = cell.sut - cell.tbs;
    cell.d2d_sut = std::hypot(d.x(), d.y());
    cell.d3d_sut = d.norm();
    cell.theta_aod_sut = angle_from_broadside_deg(cell.tbs, cell.sut);
    cell.sut_offaxis_tbs = angle_between_deg(cell.satellite - cell.sut, cell.tbs - cell.sut);
  }

  cell.d_sat_rad.resize(n_rad);
  cell.phi_rad.resize(n_rad);
  cell.theta_sat_rad.resize(n_rad);
  for (int n = 0; n < n_rad; ++n) {
    cell.d_sat_rad(n) = (cell.satellite - cell.radar[n]).norm();
    cell.phi_rad(n) = angle_between_deg(beam_axis, cell.radar[n] - cell.satellite);
    cell.theta_sat_rad(n) = angle_from_broadside_deg(cell.radar[n], cell.satellite);
  }

  cell.d_tx_tar.resize(n_tar);
  cell.theta_t_tar.resize(n_tar);
  cell.d_rx_tar.resize(n_tar, n_rad);
  cell.theta_r_tar.resize(n_tar, n_rad);
  for (int i = 0; i < n_tar; ++i) {
    cell.d_tx_tar(i) = (cell.target[i] - cell.tbs).norm();
    cell.theta_t_tar(i) = angle_from_broadside_deg(cell.tbs, cell.target[i]);
    for (int n = 0; n < n_rad; ++n) {
      cell.d_rx_tar(i, n) = (cell.target[i] - cell.radar[n]).norm();
      cell.theta_r_tar(i, n) = angle_from_broadside_deg(cell.radar[n], cell.target[i]);
    }
  }

  cell.d_tx_cl.resize(n_cl);
  cell.theta_t_cl.resize(n_cl);
  cell.d_rx_cl.resize(n_cl, n_rad);
  cell.theta_r_cl.resize(n_cl, n_rad);
  for (int l = 0; l < n_cl; ++l) {
    cell.d_tx_cl(l) = (cell.clutter[l] - cell.tbs).norm();
    cell.theta_t_cl(l) = angle_from_broadside_deg(cell.tbs, cell.clutter[l]);
    for (int n = 0; n < n_rad; ++n) {
      cell.d_rx_cl(l, n) = (cell.clutter[l] - cell.radar[n]).norm();
      cell.theta_r_cl(l, n) = angle_from_broadside_deg(cell.radar[n], cell.clutter[l]);
    }
  }
}

Geometry generate_geometry(const SystemParams& params, uint64_t seed) {
  Geometry geom;
  geom.cells.resize(params.M);

  for (int m = 0; m < params.M; ++m) {
    RngStream rng = make_stream(seed, {tag(StreamTag::geometry), static_cast<uint64_t>(m)});
    CellGeometry& cell = geom.cells[m];

    cell.tbs = {0.0, 0.0, params.tbs_height};

    cell.tut.resize(params.K);
    for (auto& pos : cell.tut) pos = uniform_disk(rng, params.cell_radius, params.tut_height);

    // the SUT lives in the spot-beam footprint near, but outside, the dense
    // cell: uniform over a configurable annulus around the TBS
    {
      const double r1 = params.sut_annulus_min * params.cell_radius,
                   r2 = params.sut_annulus_max * params.cell_radius;
      const double r = std::sqrt(rng.uniform(r1 * r1, r2 * r2));
      const double ang = rng.uniform(0.0, 2.0 * kPi);
      cell.sut = {r * std::cos(ang), r * std::sin(ang), params.tut_height};
    }

    cell.target.resize(params.N_tar);
    for (auto& pos : cell.target) pos = uniform_disk(rng, params.r_sens, 0.0);

    // clutters in an annulus around their target so clutter echoes stay
    // angularly correlated with the target
    cell.clutter.resize(static_cast<size_t>(params.N_tar) * params.N_cl);
    for (int i = 0; i < params.N_tar; ++i) {
      for (int l = 0; l < params.N_cl; ++l) {
        const double lo2 = params.clutter_annulus_min * params.clutter_annulus_min;
        const double hi2 = params.clutter_annulus_max * params.clutter_annulus_max;
        const double r = std::sqrt(rng.uniform(lo2, hi2));
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        cell.clutter[static_cast<size_t>(i) * params.N_cl + l] =
            cell.target[i] + Eigen::Vector3d{r * std::cos(ang), r * std::sin(ang), 0.0};
      }
    }

    cell.radar.resize(params.N_rad);
    const double rr = params.r_sens / 2.0;
    if (params.N_rad == 4) {
      cell.radar[0] = {rr, 0.0, params.tut_height};
      cell.radar[1] = {0.0, rr, params.tut_height};
      cell.radar[2] = {-rr, 0.0, params.tut_height};
      cell.radar[3] = {0.0, -rr, params.tut_height};
    } else {
      for (int n = 0; n < params.N_rad; ++n) {
        const double ang = 2.0 * kPi * n / params.N_rad;
        cell.radar[n] = {rr * std::cos(ang), rr * std::sin(ang), params.tut_height};
      }
    }

    cell.elevation_deg = rng.uniform(params.sat_elevation_min, params.sat_elevation_max);
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const double horiz = params.sat_altitude / std::tan(deg_to_rad(cell.elevation_deg));
    cell.satellite = {horiz * std::cos(az), horiz * std::sin(az), params.sat_altitude};

    recompute_cell_links(cell, params);
  }
  return geom;
}

}  // namespace istn
