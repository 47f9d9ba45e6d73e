#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chiralq/chiralq.hpp"

namespace chiralq::cli {

// Bad configuration: unknown keys, malformed values, failed preconditions.
// Maps to exit code 2.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Momenta are given in units of pi, energies and rates in units of t_0,
// times in units of 1/t_0.
struct RunConfig {
  ModelParams model;
  QuenchSpec quench = QuenchSpec::deep(0);

  double grid_step = 0.1;  // pi
  int level = 5;
  double probe_step = 0.02;  // pi
  int n_probe = 6;
  double smooth_width = 0.0;
  bool exact_field = true;
  bool triangle_seed = false;

  bool noise = false;
  double n_lo = 1000.0;
  double n_hi = 2000.0;
  int repetitions = 10000;
  std::uint64_t seed = 20240601;
  int trials = 100;
  bool poisson = false;
  bool windowed_signal = false;
  double window_start = 0.0;  // t_max
  double window_end = 1.0;    // t_max
  int n_times = kDefaultWindowSamples;

  Vec3 pol_k = Vec3(0.1, 0.6, 0.1);  // pi
  double t_start = 0.0;
  double t_end = 10.0;
  int t_samples = 201;
  double rate_fast = 0.0;
  double rate_slow = 0.0;

  double charge_depth = QuenchSpec::kInf;
  double charge_step = 0.05;  // pi
  int charge_level = 3;

  double m_lo = 2.0;
  double m_hi = 4.0;
  int n_scan = 41;
  double m_tolerance = 1e-3;
  std::vector<double> track_depths{1.2, 1.4, 1.6, 1.8, 2.0, 2.2,
                                   2.4, 2.6, 2.8, 3.0, 3.2};
  std::vector<double> noisy_depths{2.4, 2.6, 2.8, 3.0};

  double phase_lo = -4.0;
  double phase_hi = 4.0;
  double phase_step = 0.2;
  int phase_level = 3;

  std::filesystem::path out_dir = "chiralq_out";

  // Every key with its resolved value, for the manifest.
  nlohmann::ordered_json echo() const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Flat "section.key = value" text; '#' starts a comment. Unknown and
// repeated keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void apply_setting(RunConfig& cfg, const std::string& key,
                   const std::string& value);
std::vector<std::string> config_keys();

}  // namespace chiralq::cli
