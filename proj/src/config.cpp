// SPDX-License-Identifier: Apache-2.0
#include "istn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "istn/version.hpp"

namespace istn {

namespace {

const std::map<std::string, double SystemParams::*>& double_fields() {
  static const std::map<std::string, double SystemParams::*> f = {
      {"f_c", &SystemParams::f_c},
      {"bandwidth", &SystemParams::bandwidth},
      {"c", &SystemParams::c},
      {"noise_figure", &SystemParams::noise_figure},
      {"noise_density", &SystemParams::noise_density},
      {"sat_altitude", &SystemParams::sat_altitude},
      {"sat_elevation_min", &SystemParams::sat_elevation_min},
      {"sat_elevation_max", &SystemParams::sat_elevation_max},
      {"spotbeam_radius", &SystemParams::spotbeam_radius},
      {"G_s", &SystemParams::G_s},
      {"G_main", &SystemParams::G_main},
      {"G_side", &SystemParams::G_side},
      {"G_victim", &SystemParams::G_victim},
      {"phi_th", &SystemParams::phi_th},
      {"phi_3dB", &SystemParams::phi_3dB},
      {"sigma_xi", &SystemParams::sigma_xi},
      {"P_LEO", &SystemParams::P_LEO},
      {"cell_radius", &SystemParams::cell_radius},
      {"r_sens", &SystemParams::r_sens},
      {"tbs_height", &SystemParams::tbs_height},
      {"tut_height", &SystemParams::tut_height},
      {"P_BS", &SystemParams::P_BS},
      {"R_min_S", &SystemParams::R_min_S},
      {"SCNR_min", &SystemParams::SCNR_min},
      {"delta_sat", &SystemParams::delta_sat},
      {"delta_tar", &SystemParams::delta_tar},
      {"clutter_annulus_min", &SystemParams::clutter_annulus_min},
      {"clutter_annulus_max", &SystemParams::clutter_annulus_max},
      {"rcs_mean_dbsm", &SystemParams::rcs_mean_dbsm},
      {"rcs_std_db", &SystemParams::rcs_std_db},
      {"clutter_rcs_offset_db", &SystemParams::clutter_rcs_offset_db},
      {"csi_aging_rho", &SystemParams::csi_aging_rho},
      {"sat_prediction_err_db", &SystemParams::sat_prediction_err_db},
      {"sut_rate_margin", &SystemParams::sut_rate_margin},
      {"sut_annulus_min", &SystemParams::sut_annulus_min},
      {"sut_annulus_max", &SystemParams::sut_annulus_max},
      {"wmmse_tol", &SystemParams::wmmse_tol},
      {"qcqp_tol", &SystemParams::qcqp_tol},
  };
  return f;
}

const std::map<std::string, int SystemParams::*>& int_fields() {
  static const std::map<std::string, int SystemParams::*> f = {
      {"M", &SystemParams::M},
      {"K", &SystemParams::K},
      {"N_TX", &SystemParams::N_TX},
      {"N_RX", &SystemParams::N_RX},
      {"N_tar", &SystemParams::N_tar},
      {"N_rad", &SystemParams::N_rad},
      {"N_cl", &SystemParams::N_cl},
      {"N_cluster", &SystemParams::N_cluster},
      {"N_ray", &SystemParams::N_ray},
      {"wmmse_max_iters", &SystemParams::wmmse_max_iters},
      {"eps_grid_size", &SystemParams::eps_grid_size},
      {"monostatic_antenna_cap", &SystemParams::monostatic_antenna_cap},
  };
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool is_system_param(const std::string& key) {
  return double_fields().count(key) || int_fields().count(key) || key == "rng_seed";
}

bool set_system_param(SystemParams& p, const std::string& key, const std::string& value) {
  if (key == "rng_seed") {
    p.rng_seed = std::strtoull(value.c_str(), nullptr, 10);
    return true;
  }
  if (auto it = double_fields().find(key); it != double_fields().end()) {
    p.*(it->second) = std::strtod(value.c_str(), nullptr);
    return true;
  }
  if (auto it = int_fields().find(key); it != int_fields().end()) {
    p.*(it->second) = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
    return true;
  }
  return false;
}

bool set_system_param_value(SystemParams& p, const std::string& key, double value) {
  if (key == "rng_seed") {
    p.rng_seed = static_cast<uint64_t>(value);
    return true;
  }
  if (auto it = double_fields().find(key); it != double_fields().end()) {
    p.*(it->second) = value;
    return true;
  }
  if (auto it = int_fields().find(key); it != int_fields().end()) {
    p.*(it->second) = static_cast<int>(std::llround(value));
    return true;
  }
  return false;
}

double get_system_param(const SystemParams& p, const std::string& key) {
  if (key == "rng_seed") return static_cast<double>(p.rng_seed);
  if (auto it = double_fields().find(key); it != double_fields().end()) return p.*(it->second);
  if (auto it = int_fields().find(key); it != int_fields().end()) return p.*(it->second);
  throw istn_error("unknown parameter: " + key);
}

std::vector<std::string> system_param_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : double_fields()) keys.push_back(k);
  for (const auto& [k, v] : int_fields()) keys.push_back(k);
  keys.push_back("rng_seed");
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (set_system_param(cfg.params, key, value)) return true;
  if (key == "experiment") {
    cfg.exp.name = value;
  } else if (key == "sweep_variable") {
    cfg.exp.sweep.variable = value;
  } else if (key == "sweep_min") {
    cfg.exp.sweep.min = std::strtod(value.c_str(), nullptr);
  } else if (key == "sweep_max") {
    cfg.exp.sweep.max = std::strtod(value.c_str(), nullptr);
  } else if (key == "sweep_points") {
    cfg.exp.sweep.points = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
  } else if (key == "sweep_scale") {
    if (value == "linear")
      cfg.exp.sweep.scale = SweepAxis::Scale::linear;
    else if (value == "log")
      cfg.exp.sweep.scale = SweepAxis::Scale::log;
    else
      return false;
  } else if (key == "seeds") {
    cfg.exp.seeds = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
  } else if (key == "master_seed") {
    cfg.exp.master_seed = std::strtoull(value.c_str(), nullptr, 10);
  } else if (key == "methods") {
    cfg.exp.methods = split_list(value);
  } else if (key == "output_dir") {
    cfg.out_dir = value;
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
  } else {
    return false;
  }
  return true;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  bool master_seed_set = false;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw istn_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "master_seed") master_seed_set = true;
    if (!apply_config_key(cfg, key, value))
      throw istn_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (!master_seed_set) cfg.exp.master_seed = cfg.params.rng_seed;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw istn_error("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> issues = validate_params(cfg.params);
  if (cfg.exp.name.empty()) issues.push_back("experiment must be set");
  if (cfg.exp.sweep.points < 1) issues.push_back("sweep_points must be at least 1");
  if (!cfg.exp.sweep.variable.empty() && !is_system_param(cfg.exp.sweep.variable))
    issues.push_back("sweep_variable is not a SystemParams field: " + cfg.exp.sweep.variable);
  if (cfg.exp.sweep.variable.empty() && cfg.exp.sweep.points > 1)
    issues.push_back("sweep_variable must be set when sweep_points > 1");
  if (cfg.exp.sweep.scale == SweepAxis::Scale::log && cfg.exp.sweep.points > 1 &&
      (cfg.exp.sweep.min <= 0 || cfg.exp.sweep.max <= 0))
    issues.push_back("log sweep requires positive sweep_min and sweep_max");
  if (cfg.exp.seeds < 1) issues.push_back("seeds must be at least 1");
  if (cfg.workers < 0) issues.push_back("workers must be non-negative");
  return issues;
}

std::string manifest_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "istnsim " << kVersion << '\n';
  os << "experiment = " << cfg.exp.name << '\n';
  os << "master_seed = " << cfg.exp.master_seed << '\n';
  os << "seeds = " << cfg.exp.seeds << '\n';
  os << "sweep_variable = " << cfg.exp.sweep.variable << '\n';
  os << "sweep_min = " << fmt_double(cfg.exp.sweep.min) << '\n';
  os << "sweep_max = " << fmt_double(cfg.exp.sweep.max) << '\n';
  os << "sweep_points = " << cfg.exp.sweep.points << '\n';
  os << "sweep_scale = "
     << (cfg.exp.sweep.scale == SweepAxis::Scale::log ? "log" : "linear") << '\n';
  os << "methods =";
  for (size_t i = 0; i < cfg.exp.methods.size(); ++i)
    os << (i ? ", " : " ") << cfg.exp.methods[i];
  os << '\n';
  for (const auto& key : system_param_keys()) {
    if (key == "rng_seed")
      os << key << " = " << cfg.params.rng_seed << '\n';
    else
      os << key << " = " << fmt_double(get_system_param(cfg.params, key)) << '\n';
  }
  return os.str();
}

}  // namespace istn
