// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "istn/metrics.hpp"
#include "istn/oracles.hpp"

using namespace istn;

namespace {
const SystemParams p = oracles::small_params();

CellChannelSet cell() { return oracles::random_cell(p, 404); }
Association nearest(const CellChannelSet& ch) { return associate_nearest(ch.sens.alpha_tar); }
}  // namespace

TEST_CASE("zero beamformer gives zero TUT SINR") {
  const CellChannelSet ch = cell();
  const Beamformer f = Beamformer::Zero(p.N_TX, p.streams());
  CHECK(sinr_tut(f, ch, 5.0, 0, p) == 0.0);
}

TEST_CASE("matched single-stream TUT SINR is the matched-filter SNR") {
  CellChannelSet ch = cell();
  Beamformer f = Beamformer::Zero(p.N_TX, p.streams());
  const Eigen::RowVectorXcd h = ch.terr.h_tut.row(0);
  f.col(0) = h.adjoint() / h.norm();  // unit power, aligned
  const double got = sinr_tut(f, ch, 0.0, 0, p);
  CHECK(got == doctest::Approx(h.squaredNorm() / p.sigma2_tut()).epsilon(1e-12));
}

TEST_CASE("TUT SINR oracle recomputation term by term") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 405);
  const double p_sat = 12.0;
  for (int k = 0; k < p.K; ++k) {
    // independent route straight from the displayed expression
    const Eigen::RowVectorXcd h = ch.terr.h_tut.row(k);
    double interf = 0.0;
    for (int j = 0; j < f.cols(); ++j)
      if (j != k) interf += std::norm((h * f.col(j))(0));
    const double expect =
        std::norm((h * f.col(k))(0)) / (interf + ch.sat.g_tut(k) * p_sat + p.sigma2_tut());
    CHECK(sinr_tut(f, ch, p_sat, k, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("SUT SINR endpoints") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 406);
  CHECK(sinr_sut(f, ch, 0.0, p) == 0.0);
  const Beamformer z = Beamformer::Zero(p.N_TX, p.streams());
  CHECK(sinr_sut(z, ch, 8.0, p) ==
        doctest::Approx(ch.sat.g_sut * 8.0 / p.sigma2_sut()).epsilon(1e-12));
}

TEST_CASE("SCNR with no interference reduces to pure SNR") {
  SystemParams p1 = p;
  p1.N_tar = 1;
  p1.N_cl = 0;
  p1.K = 1;
  const CellChannelSet ch = oracles::random_cell(p1, 407);
  Beamformer f = Beamformer::Zero(p1.N_TX, p1.streams());
  const Association assoc = nearest(ch);
  f.col(p1.K) = oracles::random_beamformer(p1, 408).col(p1.K);
  const ReceiveFilters w = mmse_filters(f, ch, assoc, 0.0, p1);
  InterferenceSplit split;
  const double got = scnr(f, w, ch, assoc, 0.0, 0, p1, {}, &split);
  CHECK(split.i1 == 0.0);
  CHECK(split.i2 == 0.0);
  CHECK(split.i4 == 0.0);
  const Eigen::RowVectorXcd wr = w.w_tar.row(0);
  const double expect = std::norm((wr * ch.sens.g_tar[0][assoc(0)] * f.col(p1.K))(0)) /
                        (wr.squaredNorm() * p1.sigma2_rad());
  CHECK(got == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("filter orthogonal to the satellite line nulls I4") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 409);
  const Association assoc = nearest(ch);
  const int n = assoc(0);
  Eigen::VectorXcd g = ch.sat.g_rad_vec.col(n);
  Eigen::VectorXcd v = Eigen::VectorXcd::Random(p.N_RX);
  v -= g * (g.adjoint() * v)(0) / g.squaredNorm();
  ReceiveFilters w = mmse_filters(f, ch, assoc, 3.0, p);
  w.w_tar.row(0) = v.adjoint();
  const InterferenceSplit s = sensing_interference(f, w.w_tar.row(0), ch, assoc, 1e6, 0);
  CHECK(s.i4 <= 1e-12 * v.squaredNorm() * ch.sat.g_rad(n) * 1e6);
}

TEST_CASE("all-zero filter MSE is one") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 410);
  CHECK(mse_tut(f, cplx{0, 0}, ch, 4.0, 0, p) == doctest::Approx(1.0));
  CHECK(mse_sut(f, cplx{0, 0}, ch, 4.0, p) == doctest::Approx(1.0));
  const Association assoc = nearest(ch);
  const Eigen::RowVectorXcd zero = Eigen::RowVectorXcd::Zero(p.N_RX);
  CHECK(mse_target(f, zero, ch, assoc, 4.0, 0, p) == doctest::Approx(1.0));
}

TEST_CASE("MMSE identities and the virtual-SINR equivalence") {
  for (const auto& c : oracles::run_suite("metrics")) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("rates derive from SINR exactly and aggregate per cell") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 411);
  const Association assoc = nearest(ch);
  const ReceiveFilters w = mmse_filters(f, ch, assoc, 2.0, p);
  const CellMetrics m = evaluate_cell(f, w, ch, assoc, 2.0, p);
  for (int k = 0; k < p.K; ++k)
    CHECK(m.rate_tut(k) == doctest::Approx(std::log2(1.0 + sinr_tut(f, ch, 2.0, k, p))));
  CHECK(m.istn_sum() == doctest::Approx(m.rate_tut.sum() + m.rate_sut));
}

TEST_CASE("interference toggles drop the cross-system terms") {
  const CellChannelSet ch = cell();
  const Beamformer f = oracles::random_beamformer(p, 412);
  InterferenceToggles off{false, false};
  CHECK(sinr_tut(f, ch, 0.0, 0, p, off) == sinr_tut(f, ch, 99.0, 0, p, off));
  CHECK(sinr_sut(f, ch, 5.0, p, off) ==
        doctest::Approx(ch.sat.g_sut * 5.0 / p.sigma2_sut()).epsilon(1e-12));
}
