// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "istn/params.hpp"

namespace istn {

struct SweepAxis {
  std::string variable;
  double min = 0.0, max = 0.0;
  int points = 1;
  enum class Scale { linear, log } scale = Scale::linear;
};

struct ExperimentSpec {
  std::string name;
  SweepAxis sweep;
  std::vector<std::string> methods;  // empty selects the experiment defaults
  int seeds = 100;
  uint64_t master_seed = 1;
};

struct RunConfig {
  SystemParams params;
  ExperimentSpec exp;
  std::string out_dir = "out";
  int workers = 0;  // 0 = all hardware threads, 1 = serial reference
};

// flat key = value text; '#' comments; [section] headers tolerated. Keys
// mirror the SystemParams field names exactly, plus the run keys:
// experiment, sweep_variable, sweep_min, sweep_max, sweep_points,
// sweep_scale, seeds, master_seed, methods, output_dir, workers.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// applies one `key=value` pair; returns false on an unknown key
bool apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// parameter issues plus run-spec issues (unknown sweep variable, bad counts)
std::vector<std::string> validate_config(const RunConfig& cfg);

bool is_system_param(const std::string& key);
bool set_system_param(SystemParams& p, const std::string& key, const std::string& value);
bool set_system_param_value(SystemParams& p, const std::string& key, double value);
double get_system_param(const SystemParams& p, const std::string& key);
std::vector<std::string> system_param_keys();

/// deterministic manifest body: code version, master seed, resolved config
std::string manifest_text(const RunConfig& cfg);

}  // namespace istn
