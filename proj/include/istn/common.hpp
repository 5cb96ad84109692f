// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace istn {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Shannon spectral efficiency of a scalar link.
inline double rate_bps_hz(double sinr_lin) { return std::log2(1.0 + sinr_lin); }

struct istn_error : std::runtime_error {
  explicit istn_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace istn
