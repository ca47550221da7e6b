#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scolab/hard_instance.hpp"

namespace scolab {

inline constexpr const char* kLabVersion = "1.0.0";
inline constexpr const char* kCodeConstructionVersion = "random-systematic/1";
inline constexpr const char* kAcceptanceSuiteVersion = "accept/1";

/// Error for unknown keys, malformed values and cross-field violations; the
/// message always starts with the offending "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct LabConfig {
  // [code]
  double rho_target = 0.10;
  std::uint64_t code_seed = 1;
  int max_retries = 20;

  // [instance]
  Mode mode = Mode::kErm;
  int m = 8;
  int k = 16;
  bool allow_nonstandard = false;
  double lambda = 0.0;   // 0: 7/m^{3/2}
  double epsilon = 0.0;  // 0: lambda rho^2 / (4 72^2 7^4)
  Relax relax{true, 1.0, 1.0, 1.0, 1.0, 1.0, 0.99};

  // [gd]
  double eta = 0.1;
  long T = 1000;
  long suffix_s = -1;  // -1: T/2
  long record_every = 0;
  bool abort_on_violation = false;

  // [harness]
  std::uint64_t seed = 7;
  int trials = 500;
  int gd_trials = 200;
  int optimality_trials = 210;  // leading ERM trials that get the probe checks
  int threads = 0;
  int brute_force_cap = kDefaultBruteForceCap;
  int probes = 1000;
  int eps_probes = 50;
  int concentration_trials = 2000;
  int pcert_queries = 10000;
  int lipschitz_points = 10000;
  int sweep_trials = 20;
  double sweep_eta = 0.1;
  int sweep_j_min = 1;
  int sweep_j_max = 6;
  double plateau_scale = 4.0;
  double corollary3_scale = 4.0;
  std::string out_dir = "lab_out";
  std::string log_level = "info";

  double lambda_value() const;
  double epsilon_value(double rho) const;
  long suffix_value() const { return suffix_s < 0 ? T / 2 : suffix_s; }
  int thread_count() const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Reads an INI-style file with [code], [instance], [gd] and [harness]
/// sections, then applies overrides ("key" or "section.key"). An empty path
/// means defaults plus overrides.
LabConfig parse_config(const std::filesystem::path& path, const Overrides& overrides = {});
LabConfig parse_config_text(const std::string& text, const Overrides& overrides = {});

/// Every key with its current value, as "section.key" -> value text.
std::map<std::string, std::string> config_echo(const LabConfig& cfg);

}  // namespace scolab
