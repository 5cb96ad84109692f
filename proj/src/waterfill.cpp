// SPDX-License-Identifier: Apache-2.0
#include "istn/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "istn/common.hpp"

namespace istn {

Eigen::VectorXd capped_waterfill(const Eigen::VectorXd& gain, const Eigen::VectorXd& denom,
                                 double budget, const Eigen::VectorXd& caps) {
  const int n = static_cast<int>(gain.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  if (n == 0 || budget <= 0.0) return p;

  auto alloc_at = [&](double inv_nu, int i) {
    if (gain(i) <= 0.0) return 0.0;
    return std::clamp(inv_nu - denom(i) / gain(i), 0.0, caps(i));
  };

  double total_caps = 0.0;
  bool caps_finite = true;
  for (int i = 0; i < n; ++i) {
    if (gain(i) <= 0.0) continue;
    if (std::isinf(caps(i))) caps_finite = false;
    total_caps += caps(i);
  }
  if (caps_finite && total_caps <= budget) {
    for (int i = 0; i < n; ++i) p(i) = gain(i) > 0.0 ? caps(i) : 0.0;
    return p;
  }

  // total allocation is non-decreasing in 1/nu; bracket then bisect
  double lo = 0.0, hi = 1.0;
  auto total = [&](double inv_nu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += alloc_at(inv_nu, i);
    return s;
  };
  while (total(hi) < budget && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < budget ? lo : hi) = mid;
  }
  const double inv_nu = 0.5 * (lo + hi);
  for (int i = 0; i < n; ++i) p(i) = alloc_at(inv_nu, i);

  // tidy the bisection residue onto unconstrained entries
  double used = p.sum();
  if (used > 0.0 && used > budget) p *= budget / used;
  return p;
}

Eigen::VectorXd solve_merge(const MergeProblem& prob) {
  if (prob.p_bar.size() != prob.g_sut.size() || prob.p_bar.size() != prob.denom.size())
    throw istn_error("solve_merge: dimension mismatch");
  return capped_waterfill(prob.g_sut, prob.denom, prob.p_leo, prob.p_bar);
}

}  // namespace istn
