// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "istn/oracles.hpp"
#include "istn/wmmse.hpp"

using namespace istn;

namespace {
const SystemParams p = oracles::small_params();
}

TEST_CASE("noise-dominated MMSE filters vanish") {
  SystemParams loud = p;
  loud.noise_figure = 150.0;  // absurd noise floor
  const CellChannelSet ch = oracles::random_cell(loud, 600);
  const Beamformer f = oracles::random_beamformer(loud, 601);
  const Association assoc = associate_nearest(ch.sens.alpha_tar);
  const ReceiveFilters w = receiver_update(f, 1.0, ch, assoc, loud);
  CHECK(w.w_tut.norm() < 1e-6);
  CHECK(w.w_tar.norm() < 1e-3);
}

TEST_CASE("scalar MMSE reduces to the matched form without interference") {
  SystemParams p1 = p;
  p1.K = 1;
  p1.N_tar = 0;
  const CellChannelSet ch = oracles::random_cell(p1, 602);
  Beamformer f(p1.N_TX, 1);
  f.col(0) = ch.terr.h_tut.row(0).adjoint().normalized();
  const Association assoc{{}, {}, {}};
  const ReceiveFilters w = receiver_update(f, 0.0, ch, assoc, p1);
  const cplx hf = (ch.terr.h_tut.row(0) * f.col(0))(0);
  const cplx expect = std::conj(hf) / (std::norm(hf) + p1.sigma2_tut());
  CHECK(std::abs(w.w_tut(0) - expect) < 1e-15);
}

TEST_CASE("weights: zero channel gives unit weight, SINR of one gives two") {
  SystemParams p1 = p;
  p1.K = 1;
  p1.N_tar = 0;
  CellChannelSet ch = oracles::random_cell(p1, 603);
  ch.sat.g_sut = 0.0;  // dead satellite link: mu_sut = 1
  Beamformer f = Beamformer::Zero(p1.N_TX, 1);
  const Association assoc{{}, {}, {}};
  ReceiveFilters w = receiver_update(f, 0.0, ch, assoc, p1);
  Weights mu = weight_update(f, 0.0, w, ch, assoc, p1);
  CHECK(mu.mu_tut(0) == doctest::Approx(1.0));
  CHECK(mu.mu_sut == doctest::Approx(1.0));

  // scale the aligned beam so that |hf|^2 = sigma^2  =>  SINR = 1, mu = 2
  const Eigen::RowVectorXcd h = ch.terr.h_tut.row(0);
  f.col(0) = h.adjoint() * std::sqrt(p1.sigma2_tut()) / h.squaredNorm();
  w = receiver_update(f, 0.0, ch, assoc, p1);
  mu = weight_update(f, 0.0, w, ch, assoc, p1);
  CHECK(mu.mu_tut(0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("unconstrained transmitter step matches the closed form") {
  // K = 1, no targets, dead satellite: minimize mu*eps(f) under the power
  // budget alone has the regularized matched-filter solution
  SystemParams p1 = p;
  p1.K = 1;
  p1.N_tar = 0;
  p1.R_min_S = 0.0;     // SUT QoS off
  p1.SCNR_min = -1e9;   // sensing QoS off
  CellChannelSet ch = oracles::random_cell(p1, 604);
  ch.sat.g_sut = 0.0;
  ch.sat.g_tut.setZero();

  Beamformer f(p1.N_TX, 1);
  f.col(0) = ch.terr.h_tut.row(0).adjoint() * (0.5 * std::sqrt(p1.P_BS) /
                                               ch.terr.h_tut.row(0).norm());
  const Association assoc{{}, {}, {}};
  const ReceiveFilters w = receiver_update(f, 0.0, ch, assoc, p1);
  const Weights mu = weight_update(f, 0.0, w, ch, assoc, p1);

  WmmseOptions opts;
  opts.joint_sat_power = false;
  opts.p_sat_fixed = 0.0;
  const TxResult tx = transmitter_update(w, mu, ch, assoc, p1, opts);
  REQUIRE(tx.feasible);

  // closed form: f(nu) = mu u^H / (nu + mu |u|^2), u = w h, nu from the
  // power constraint via the explicit water level
  const Eigen::RowVectorXcd u = w.w_tut(0) * ch.terr.h_tut.row(0);
  const double uu = u.squaredNorm();
  double nu = mu.mu_tut(0) * u.norm() / std::sqrt(p1.P_BS) - mu.mu_tut(0) * uu;
  nu = std::max(nu, 0.0);
  const Eigen::VectorXcd f_star = mu.mu_tut(0) * u.adjoint() / (nu + mu.mu_tut(0) * uu);
  CHECK((tx.F.col(0) - f_star).norm() / f_star.norm() < 1e-6);
}

TEST_CASE("inactive QoS constraints reproduce the unconstrained step") {
  SystemParams p1 = p;
  p1.R_min_S = 0.0;
  p1.SCNR_min = -1e9;
  const CellChannelSet ch = oracles::random_cell(p1, 605);
  const Association assoc = associate_nearest(ch.sens.alpha_tar);
  const Beamformer f0 = matched_init(ch, assoc, p1);
  const ReceiveFilters w = receiver_update(f0, 2.0, ch, assoc, p1);
  const Weights mu = weight_update(f0, 2.0, w, ch, assoc, p1);

  WmmseOptions constrained;
  constrained.joint_sat_power = false;
  constrained.p_sat_fixed = 2.0;
  const TxResult a = transmitter_update(w, mu, ch, assoc, p1, constrained);

  SystemParams p2 = p1;
  p2.R_min_S = -1.0;  // same disabled state expressed differently
  const TxResult b = transmitter_update(w, mu, ch, assoc, p2, constrained);
  REQUIRE(a.feasible);
  REQUIRE(b.feasible);
  CHECK(std::abs(a.objective - b.objective) < 1e-7 * std::max(1.0, std::abs(a.objective)));
}

TEST_CASE("monotone descent, MVDR property, weight identities") {
  for (const auto& c : oracles::run_suite("wmmse")) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("solve_p1 meets its constraints on feasible instances") {
  SystemParams p1 = p;
  p1.R_min_S = 3.0;
  p1.wmmse_max_iters = 60;
  int feasible_count = 0;
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const CellChannelSet ch = oracles::random_cell(p1, 700 + seed);
    const Association assoc = associate_nearest(ch.sens.alpha_tar);
    const WmmseOutcome out = solve_p1(ch, assoc, p1);
    if (out.report.infeasible) continue;
    ++feasible_count;
    CHECK(out.p_sat <= p1.P_LEO + 1e-9);
    CHECK(out.F.squaredNorm() <= p1.P_BS + 1e-9);
    const CellMetrics m = evaluate_cell(out.F, out.W, ch, assoc, out.p_sat, p1);
    CHECK(m.rate_sut >= p1.R_min_S - 1e-4);
    CHECK(m.min_scnr_db() >= p1.SCNR_min - 0.01);
  }
  CHECK(feasible_count >= 4);
}

TEST_CASE("two random inits end near the same ISTN rate (logged)") {
  SystemParams p1 = p;
  p1.wmmse_max_iters = 60;
  const CellChannelSet ch = oracles::random_cell(p1, 710);
  const Association assoc = associate_nearest(ch.sens.alpha_tar);
  WmmseOptions opts;
  opts.joint_sat_power = true;
  opts.p_cap = p1.P_LEO;
  opts.tol = p1.wmmse_tol;
  opts.max_iters = 60;
  opts.p_init = 0.4;
  const WmmseOutcome a = wmmse_solve(ch, assoc, p1, opts);
  opts.p_init = 4.0;
  const WmmseOutcome b = wmmse_solve(ch, assoc, p1, opts);
  const double ra = evaluate_cell(a.F, a.W, ch, assoc, a.p_sat, p1).istn_sum();
  const double rb = evaluate_cell(b.F, b.W, ch, assoc, b.p_sat, p1).istn_sum();
  MESSAGE("init 0.4 W -> ", ra, " bps/Hz; init 4 W -> ", rb,
          " bps/Hz; spread = ", std::abs(ra - rb) / std::max(ra, rb));
}

TEST_CASE("solve_p3 freezes the satellite power") {
  const CellChannelSet ch = oracles::random_cell(p, 711);
  const Association assoc = associate_nearest(ch.sens.alpha_tar);
  SystemParams p1 = p;
  p1.wmmse_max_iters = 40;
  const WmmseOutcome out = solve_p3(ch, assoc, p1, 1.25);
  CHECK(out.p_sat == 1.25);
  if (!out.report.infeasible) {
    const CellMetrics m = evaluate_cell(out.F, out.W, ch, assoc, 1.25, p1);
    CHECK(m.rate_sut >= p1.R_min_S - 1e-4);
  }
}
