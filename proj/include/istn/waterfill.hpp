// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace istn {

/// maximize sum_i log2(1 + g_i p_i / d_i)
///   s.t.   sum_i p_i <= budget,  0 <= p_i <= cap_i
/// Closed-form inner solution with bisection on the water level. Entries with
/// g_i <= 0 receive zero power. caps may be +inf.
Eigen::VectorXd capped_waterfill(const Eigen::VectorXd& gain, const Eigen::VectorXd& denom,
                                 double budget, const Eigen::VectorXd& caps);

/// Centralized spot-beam power merge: per-beam caps from pre-optimization,
/// SUT gains and frozen interference-plus-noise denominators, total budget.
struct MergeProblem {
  Eigen::VectorXd p_bar;   // caps, W
  Eigen::VectorXd g_sut;   // linear attenuations
  Eigen::VectorXd denom;   // interference + noise per SUT, W
  double p_leo = 0.0;
};

Eigen::VectorXd solve_merge(const MergeProblem& prob);

}  // namespace istn
