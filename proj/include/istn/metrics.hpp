// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "istn/association.hpp"
#include "istn/channel.hpp"
#include "istn/params.hpp"

namespace istn {

/// Transmit matrix of one TBS: column k serves TUT k (k < K), column K+i
/// carries the radar beam for target i. Power feasibility means
/// tr(F^H F) <= P_BS.
using Beamformer = Eigen::MatrixXcd;  // N_TX x (K + N_tar)

struct ReceiveFilters {
  Eigen::VectorXcd w_tut;   // K scalar equalizers
  cplx w_sut{0.0, 0.0};
  Eigen::MatrixXcd w_tar;   // N_tar x N_RX, row i applied as w * y
};

/// Cross-system interference switches; both on for every method except the
/// interference-free benchmark.
struct InterferenceToggles {
  bool sat_to_terr = true;
  bool terr_to_sat = true;
};

struct InterferenceSplit {
  double i1 = 0, i2 = 0, i3 = 0, i4 = 0;
  double total() const { return i1 + i2 + i3 + i4; }
};

double sinr_tut(const Beamformer& F, const CellChannelSet& ch, double p_sat, int k,
                const SystemParams& p, InterferenceToggles t = {});
double sinr_sut(const Beamformer& F, const CellChannelSet& ch, double p_sat,
                const SystemParams& p, InterferenceToggles t = {});

/// The four sensing interference families (unintended targets, clutter,
/// other beams through the aggregate channel, satellite).
InterferenceSplit sensing_interference(const Beamformer& F, const Eigen::RowVectorXcd& w,
                                       const CellChannelSet& ch, const Association& assoc,
                                       double p_sat, int i, InterferenceToggles t = {});

double scnr(const Beamformer& F, const ReceiveFilters& W, const CellChannelSet& ch,
            const Association& assoc, double p_sat, int i, const SystemParams& p,
            InterferenceToggles t = {}, InterferenceSplit* split = nullptr);

double mse_tut(const Beamformer& F, cplx w, const CellChannelSet& ch, double p_sat, int k,
               const SystemParams& p, InterferenceToggles t = {});
double mse_sut(const Beamformer& F, cplx w, const CellChannelSet& ch, double p_sat,
               const SystemParams& p, InterferenceToggles t = {});
double mse_target(const Beamformer& F, const Eigen::RowVectorXcd& w, const CellChannelSet& ch,
                  const Association& assoc, double p_sat, int i, const SystemParams& p,
                  InterferenceToggles t = {});

/// Covariance of the virtual communication link of target i (coherent echoes
/// recast as independent interferers), including the desired outer product
/// and the noise floor. The MMSE filter of this link maximizes the SCNR.
Eigen::MatrixXcd virtual_sensing_covariance(const Beamformer& F, const CellChannelSet& ch,
                                            const Association& assoc, double p_sat, int i,
                                            const SystemParams& p, InterferenceToggles t = {});

/// MMSE receivers for all three link families at the given transmit state.
ReceiveFilters mmse_filters(const Beamformer& F, const CellChannelSet& ch, const Association& assoc,
                            double p_sat, const SystemParams& p, InterferenceToggles t = {});

struct CellMetrics {
  Eigen::VectorXd rate_tut;   // K, bps/Hz
  double rate_sut = 0.0;
  Eigen::VectorXd scnr_lin;   // N_tar
  double terr_sum() const { return rate_tut.sum(); }
  double istn_sum() const { return terr_sum() + rate_sut; }
  double min_scnr_db() const {
    return scnr_lin.size() ? lin_to_db(scnr_lin.minCoeff()) : std::numeric_limits<double>::infinity();
  }
};

CellMetrics evaluate_cell(const Beamformer& F, const ReceiveFilters& W, const CellChannelSet& ch,
                          const Association& assoc, double p_sat, const SystemParams& p,
                          InterferenceToggles t = {});

}  // namespace istn
