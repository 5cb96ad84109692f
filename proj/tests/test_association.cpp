// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "istn/association.hpp"
#include "istn/oracles.hpp"

using namespace istn;

TEST_CASE("single pair with no satellite conflict") {
  Eigen::MatrixXd alpha(1, 1), theta_r(1, 1);
  alpha << 1.0;
  theta_r << 30.0;
  Eigen::VectorXd theta_sat(1);
  theta_sat << -40.0;
  const Association a = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);
  CHECK(a.receiver_of[0] == 0);
  CHECK(!a.fallback[0]);
}

TEST_CASE("satellite pruning forces the second-best receiver") {
  // hand-enumerated 2x2: target 0's best pair sits within delta_sat of the
  // satellite AOA at receiver 0, so it must settle for receiver 1
  Eigen::MatrixXd alpha(2, 2), theta_r(2, 2);
  alpha << 1.0, 0.5, 0.4, 0.3;
  theta_r << 3.0, 50.0, 20.0, 10.0;
  Eigen::VectorXd theta_sat(2);
  theta_sat << 0.0, 30.0;
  const Association a = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);
  CHECK(a.receiver_of[0] == 1);
  CHECK(a.receiver_of[1] == 0);
  CHECK(!a.fallback[0]);
  CHECK(!a.fallback[1]);
}

TEST_CASE("co-angular exclusion moves the rival target") {
  // both targets arrive at receiver 0 within delta_tar of each other; the
  // stronger one keeps it, the other must go to receiver 1
  Eigen::MatrixXd alpha(2, 2), theta_r(2, 2);
  alpha << 1.0, 0.2, 0.9, 0.1;
  theta_r << 10.0, 40.0, 12.0, -30.0;
  Eigen::VectorXd theta_sat(2);
  theta_sat << 80.0, 80.0;
  const Association a = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);
  CHECK(a.receiver_of[0] == 0);
  CHECK(a.receiver_of[1] == 1);
}

TEST_CASE("emptied candidate set falls back flagged") {
  Eigen::MatrixXd alpha(1, 2), theta_r(1, 2);
  alpha << 1.0, 0.5;
  theta_r << 10.0, 20.0;
  Eigen::VectorXd theta_sat(2);
  theta_sat << 10.0, 20.0;  // both receivers blocked
  const Association a = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);
  CHECK(a.receiver_of[0] == 0);  // best path gain, satellite rule ignored
  CHECK(a.fallback[0] == 1);
}

TEST_CASE("totality for every rule") {
  RngStream rng(master_key(55).child(1));
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Random(3, 4).cwiseAbs();
    Eigen::MatrixXd theta_r = 80.0 * Eigen::MatrixXd::Random(3, 4);
    Eigen::VectorXd theta_sat = 30.0 * Eigen::VectorXd::Random(4);
    for (const Association& a :
         {associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0), associate_nearest(alpha),
          associate_greedy(alpha), associate_random(3, 4, rng)}) {
      REQUIRE(a.size() == 3);
      for (int i = 0; i < 3; ++i) {
        CHECK(a.receiver_of[i] >= 0);
        CHECK(a.receiver_of[i] < 4);
      }
    }
  }
}

TEST_CASE("nearest allows repetition, greedy does not") {
  Eigen::MatrixXd alpha(3, 4);
  alpha << 9, 1, 1, 1, 8, 1, 1, 1, 7, 1, 1, 1;  // everyone loves receiver 0
  const Association near = associate_nearest(alpha);
  CHECK(near.receiver_of == std::vector<int>{0, 0, 0});
  const Association greedy = associate_greedy(alpha);
  CHECK(greedy.receiver_of[0] == 0);
  CHECK(greedy.receiver_of[1] != greedy.receiver_of[0]);
  CHECK(greedy.receiver_of[2] != greedy.receiver_of[1]);
  CHECK(greedy.receiver_of[2] != greedy.receiver_of[0]);
}

TEST_CASE("greedy rejects more targets than receivers") {
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Ones(5, 4);
  CHECK_THROWS_AS(associate_greedy(alpha), istn_error);
}

TEST_CASE("random association is a reproducible one-to-one map") {
  RngStream a(master_key(7).child(3)), b(master_key(7).child(3));
  const Association x = associate_random(4, 4, a);
  const Association y = associate_random(4, 4, b);
  CHECK(x.receiver_of == y.receiver_of);
  auto sorted = x.receiver_of;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("pruning soundness: only flagged pairs violate the satellite margin") {
  RngStream rng(master_key(91).child(2));
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd alpha(4, 4), theta_r(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int n = 0; n < 4; ++n) {
        alpha(i, n) = rng.uniform(0.1, 2.0);
        theta_r(i, n) = rng.uniform(-85.0, 85.0);
      }
    Eigen::VectorXd theta_sat(4);
    for (int n = 0; n < 4; ++n) theta_sat(n) = rng.uniform(-40.0, 40.0);
    const Association a = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);
    for (int i = 0; i < 4; ++i) {
      const int n = a.receiver_of[i];
      if (!a.fallback[i]) CHECK(std::abs(theta_r(i, n) - theta_sat(n)) >= 5.0);
    }
  }
}

TEST_CASE("order invariance under target relabeling") {
  RngStream rng(master_key(92).child(4));
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd alpha(4, 4), theta_r(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int n = 0; n < 4; ++n) {
        alpha(i, n) = rng.uniform(0.1, 2.0);
        theta_r(i, n) = rng.uniform(-85.0, 85.0);
      }
    Eigen::VectorXd theta_sat = Eigen::VectorXd::Zero(4);
    const Association base = associate_proposed(alpha, theta_r, theta_sat, 5.0, 5.0);

    const std::vector<int> perm = {2, 0, 3, 1};
    Eigen::MatrixXd alpha_p(4, 4), theta_p(4, 4);
    for (int i = 0; i < 4; ++i) {
      alpha_p.row(i) = alpha.row(perm[i]);
      theta_p.row(i) = theta_r.row(perm[i]);
    }
    const Association permuted = associate_proposed(alpha_p, theta_p, theta_sat, 5.0, 5.0);
    for (int i = 0; i < 4; ++i) CHECK(permuted.receiver_of[i] == base.receiver_of[perm[i]]);
  }
}

TEST_CASE("proposed association beats random on min-SCNR (brute-force audit)") {
  for (const auto& c : oracles::run_suite("association")) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
}
