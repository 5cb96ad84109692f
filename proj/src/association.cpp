// SPDX-License-Identifier: Apache-2.0
#include "istn/association.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "istn/common.hpp"

namespace istn {

Association associate_proposed(const Eigen::MatrixXd& alpha_tar, const Eigen::MatrixXd& theta_r_deg,
                               const Eigen::VectorXd& theta_sat_deg, double delta_sat_deg,
                               double delta_tar_deg) {
  const int n_tar = static_cast<int>(alpha_tar.rows());
  const int n_rad = static_cast<int>(alpha_tar.cols());

  std::vector<std::vector<bool>> alive(n_tar, std::vector<bool>(n_rad, true));

  // satellite-angle pruning
  for (int i = 0; i < n_tar; ++i)
    for (int n = 0; n < n_rad; ++n)
      if (std::abs(theta_r_deg(i, n) - theta_sat_deg(n)) < delta_sat_deg) alive[i][n] = false;

  // pairs in descending path gain; ties toward lower receiver then target index
  struct Pair {
    int i, n;
    double a;
  };
  std::vector<Pair> order;
  order.reserve(static_cast<size_t>(n_tar) * n_rad);
  for (int i = 0; i < n_tar; ++i)
    for (int n = 0; n < n_rad; ++n) order.push_back({i, n, alpha_tar(i, n)});
  std::stable_sort(order.begin(), order.end(), [](const Pair& x, const Pair& y) {
    if (x.a != y.a) return x.a > y.a;
    if (x.n != y.n) return x.n < y.n;
    return x.i < y.i;
  });

  Association assoc;
  assoc.receiver_of.assign(n_tar, -1);
  assoc.fallback.assign(n_tar, 0);

  for (const Pair& pr : order) {
    if (assoc.receiver_of[pr.i] >= 0 || !alive[pr.i][pr.n]) continue;
    const int i = pr.i, n_star = pr.n;
    assoc.receiver_of[i] = n_star;
    for (int n = 0; n < n_rad; ++n)
      if (n != n_star) alive[i][n] = false;
    // co-angular exclusion at the matched receiver
    for (int j = 0; j < n_tar; ++j)
      if (j != i && std::abs(theta_r_deg(i, n_star) - theta_r_deg(j, n_star)) < delta_tar_deg)
        alive[j][n_star] = false;
  }

  // fallback: pruning emptied some target's candidate set
  for (int i = 0; i < n_tar; ++i) {
    if (assoc.receiver_of[i] >= 0) continue;
    int best = 0;
    for (int n = 1; n < n_rad; ++n)
      if (alpha_tar(i, n) > alpha_tar(i, best)) best = n;
    assoc.receiver_of[i] = best;
    assoc.fallback[i] = 1;
  }

  for (int i = 0; i < n_tar; ++i)
    for (int n = 0; n < n_rad; ++n)
      if (alive[i][n]) assoc.surviving.emplace_back(i, n);
  return assoc;
}

Association associate_nearest(const Eigen::MatrixXd& alpha_tar) {
  const int n_tar = static_cast<int>(alpha_tar.rows());
  const int n_rad = static_cast<int>(alpha_tar.cols());
  Association assoc;
  assoc.receiver_of.assign(n_tar, 0);
  assoc.fallback.assign(n_tar, 0);
  for (int i = 0; i < n_tar; ++i) {
    int best = 0;
    for (int n = 1; n < n_rad; ++n)
      if (alpha_tar(i, n) > alpha_tar(i, best)) best = n;
    assoc.receiver_of[i] = best;
  }
  return assoc;
}

Association associate_greedy(const Eigen::MatrixXd& alpha_tar) {
  const int n_tar = static_cast<int>(alpha_tar.rows());
  const int n_rad = static_cast<int>(alpha_tar.cols());
  if (n_tar > n_rad) throw istn_error("associate_greedy: N_tar exceeds N_rad");
  Association assoc;
  assoc.receiver_of.assign(n_tar, -1);
  assoc.fallback.assign(n_tar, 0);
  std::vector<bool> used(n_rad, false);
  for (int i = 0; i < n_tar; ++i) {
    int best = -1;
    for (int n = 0; n < n_rad; ++n)
      if (!used[n] && (best < 0 || alpha_tar(i, n) > alpha_tar(i, best))) best = n;
    assoc.receiver_of[i] = best;
    used[best] = true;
  }
  return assoc;
}

Association associate_random(int n_tar, int n_rad, RngStream& rng) {
  if (n_tar > n_rad) throw istn_error("associate_random: N_tar exceeds N_rad");
  std::vector<int> perm(n_rad);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n_rad - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  Association assoc;
  assoc.receiver_of.assign(perm.begin(), perm.begin() + n_tar);
  assoc.fallback.assign(n_tar, 0);
  return assoc;
}

}  // namespace istn
