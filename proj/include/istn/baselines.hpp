// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "istn/metrics.hpp"
#include "istn/params.hpp"

namespace istn {

enum class AssocRule { proposed, nearest, greedy, random };

/// One comparison method: beamforming rule, power rules, association rule and
/// interference toggles. Names appear verbatim in the results CSV.
struct MethodSpec {
  std::string name;
  enum class Bf { wmmse, zf } bf = Bf::zf;
  enum class TbsPower { wmmse_implicit, scnr_then_waterfill, scnr_then_uniform } tbs_power =
      TbsPower::scnr_then_waterfill;
  enum class SatPower { wmmse_joint_merge, waterfill, eps, uniform, greedy_max } sat_power =
      SatPower::waterfill;
  AssocRule assoc = AssocRule::nearest;
  InterferenceToggles toggles;
  // the TBS design ignores satellite interference (greedy philosophy);
  // realized metrics still include it
  bool design_ignores_sat = false;
  bool monostatic = false;       // antenna-conserving single-receiver transform
  bool satellite_free = false;   // failure-experiment reference with p_sat = 0
  bool fixed_sat_power = false;  // satellite transmits P_LEO / M verbatim
};

/// Lookup by CSV name: proposed, interference_free, zf_eps, greedy, uniform,
/// coop_uniform, assoc_proposed, assoc_nearest, assoc_greedy, assoc_random,
/// satellite_free, monostatic. Throws on unknown names.
MethodSpec method_spec(const std::string& name);

struct ZfDesign {
  Beamformer F;
  bool scnr_feasible = true;
  Eigen::VectorXd stream_power;  // per-column power actually allocated
};

/// Zero-forcing directions from the stacked TUT rows and target transmit
/// steering rows; per-target power meets SCNR_min by bisection under MMSE
/// receive filters, residual power water-filled over the TUTs.
/// `p_sat_design` is the satellite power the design accounts for (0 when the
/// method ignores it); `toggles` drop interference families entirely.
ZfDesign zf_beamformer(const CellChannelSet& ch, const Association& assoc, const SystemParams& p,
                       double p_sat_design, double p_budget,
                       MethodSpec::TbsPower tbs_power = MethodSpec::TbsPower::scnr_then_waterfill,
                       InterferenceToggles toggles = {});

/// Joint log-grid search over satellite power and TBS total power with ZF
/// beamforming; returns the pair maximizing the cell ISTN sum rate.
std::pair<double, double> eps_satellite_power(const CellChannelSet& ch, const Association& assoc,
                                              const SystemParams& p, int grid_size);

/// Antenna-conserving monostatic transform: N_rad -> 1, N_RX -> N_rad * N_RX,
/// receiver co-located with the TBS. Idempotent; throws above the antenna cap.
SystemParams monostatic_config(const SystemParams& p);

}  // namespace istn
