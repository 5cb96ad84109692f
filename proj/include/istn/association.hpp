// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "istn/rng.hpp"

namespace istn {

/// Target-to-receiver map for one cell. Total by construction: every target
/// carries exactly one receiver index. `fallback[i]` marks targets whose
/// satellite-angle exclusion had to be ignored to keep the map total.
struct Association {
  std::vector<int> receiver_of;             // N_tar
  std::vector<uint8_t> fallback;            // N_tar
  std::vector<std::pair<int, int>> surviving;  // candidate pairs left at exit, for audit

  int operator()(int target) const { return receiver_of[target]; }
  int size() const { return static_cast<int>(receiver_of.size()); }
};

/// Satellite- and inter-target-aware matching:
/// 1) drop pairs whose target AOA is within delta_sat of the satellite AOA,
/// 2) match in descending path gain,
/// 3) after a match, drop co-angular rivals (within delta_tar) at that receiver.
/// Targets whose candidate set empties take their best receiver ignoring the
/// satellite rule and are flagged. Ties break toward the lower receiver index.
Association associate_proposed(const Eigen::MatrixXd& alpha_tar, const Eigen::MatrixXd& theta_r_deg,
                               const Eigen::VectorXd& theta_sat_deg, double delta_sat_deg,
                               double delta_tar_deg);

/// Per-target argmax of path gain; receivers may repeat.
Association associate_nearest(const Eigen::MatrixXd& alpha_tar);

/// Sequential argmax with at most one target per receiver. Requires
/// N_tar <= N_rad.
Association associate_greedy(const Eigen::MatrixXd& alpha_tar);

/// Uniform one-to-one map drawn from the given stream.
Association associate_random(int n_tar, int n_rad, RngStream& rng);

}  // namespace istn
