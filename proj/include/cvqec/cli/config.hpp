#pragma once

// Run configuration for the command-line front end.
//
// Values are resolved per key from, highest priority first: command-line
// flags, CVQEC_* environment variables, a key = value config file, and the
// built-in defaults of the command.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqec/protocol.hpp"

namespace cvqec::cli {

using Settings = std::map<std::string, std::string>;
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
  bool flag = false;  // boolean switch taking no value on the command line
};

// Keys understood by a command, in display order. Throws ConfigError for an
// unknown command.
const std::vector<KeySpec>& command_keys(const std::string& command);
const std::vector<std::string>& command_names();

// "g-max" -> "CVQEC_G_MAX".
std::string env_name(const std::string& key);

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
Settings parse_config_text(const std::string& text);
Settings load_config_file(const std::string& path);

EnvLookup process_env();

// Defaults, overlaid by the config file, the environment and `flags`.
// Config-file keys that no command knows are rejected; keys belonging to
// other commands are ignored.
Settings resolve_settings(const std::string& command, const Settings& flags,
                          const std::optional<std::string>& config_path, const EnvLookup& env);

struct RunConfig {
  std::string command;
  Settings settings;  // fully resolved, one entry per command key

  double eta = 0.0;
  double chi = 0.0;
  std::vector<double> chis;
  double gain = 1.0;
  int paths = 2;
  int points = 50;
  std::optional<double> g_min;
  std::optional<double> g_max;
  SweepScale scale = SweepScale::Log;
  double eta_ec_target = 0.1;
  int dim = 14;
  int dim_a = 0;
  int dim_b = 10;
  int io_dim = 10;
  BellGrid grid;
  bool feed_forward = false;
  bool coarse_grid = false;
  bool json = false;
  std::size_t memory_budget = std::size_t{1} << 22;
  std::uint64_t seed = 1;
  int samples = 10000;
  double rel_tol = 0.02;
  double v_t = 2.0;
  std::string output;

  // Throws ConfigError on malformed values.
  static RunConfig from_settings(const std::string& command, const Settings& settings);
};

}  // namespace cvqec::cli
