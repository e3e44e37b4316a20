#include "cvqec/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace cvqec::cli {

namespace {

const KeySpec kOutput{"output", "", "write to this file instead of stdout"};

const std::map<std::string, std::vector<KeySpec>>& registry() {
  static const std::map<std::string, std::vector<KeySpec>> keys = {
      {"fig2",
       {{"eta", "0.9", "channel transmission"},
        {"chi", "0.5", "initial EPR parameter"},
        {"points", "50", "number of gains in the sweep"},
        {"g-min", "", "lowest gain (default: break-even gain 1/chi^2)"},
        {"g-max", "", "highest gain (default: maximal gain)"},
        {"scale", "log", "sweep spacing, log or linear"},
        kOutput}},
      {"fig3",
       {{"eta", "0.01", "channel transmission"},
        {"chis", "0.33,0.6,0.82", "comma-separated EPR parameters, one block each"},
        {"paths", "2", "scissors fan-out width N"},
        {"points", "8", "number of gains per block"},
        {"g-min", "1", "lowest gain"},
        {"g-max", "", "highest gain (default: where G eta chi^2 reaches eta-ec-target, at most 100)"},
        {"eta-ec-target", "0.1", "predicted transmission that sets the default highest gain"},
        {"scale", "log", "sweep spacing, log or linear"},
        {"dim-a", "0", "sender arm cutoff (0: automatic)"},
        {"dim-b", "10", "receiver arm cutoff"},
        {"io-dim", "10", "cutoff of the teleported mode"},
        {"grid-extent", "8", "Bell grid half-width R"},
        {"grid-step", "0.25", "Bell grid spacing"},
        {"feed-forward", "false", "accept both click patterns of each scissors unit", true},
        {"memory-budget", "4194304", "largest scissors amplitude count"},
        kOutput}},
      {"verify",
       {{"eta", "0.5", "channel transmission"},
        {"chi", "0.5", "initial EPR parameter"},
        {"gain", "1.5", "NLA gain"},
        {"seed", "1", "seed of the ensemble sampler"},
        {"samples", "10000", "ensemble sample count"},
        {"v-t", "2", "ensemble variance for the bound check"},
        {"dim", "14", "cutoff for the distillation identity"},
        {"io-dim", "10", "cutoff of the teleported mode"},
        {"grid-extent", "6", "Bell grid half-width R"},
        {"grid-step", "0.25", "Bell grid spacing"},
        {"coarse-grid", "false", "force a deliberately coarse Bell grid", true},
        {"rel-tol", "0.02", "relative tolerance on fitted transmissions"},
        {"json", "false", "emit the full JSON report", true},
        kOutput}},
      {"epr-params",
       {{"chi", "0.5", "initial EPR parameter"},
        {"eta", "1", "channel transmission"},
        {"gain", "1", "NLA gain"},
        kOutput}},
      {"bounds",
       {{"eta", "0.5", "channel transmission"},
        {"chi", "0.5", "initial EPR parameter"},
        {"gain", "2", "NLA gain"},
        {"v-t", "2", "input ensemble variance"},
        kOutput}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(key + " is out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + " needs at least one value");
  return out;
}

}  // namespace

const std::vector<KeySpec>& command_keys(const std::string& command) {
  const auto& r = registry();
  const auto it = r.find(command);
  if (it == r.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "verify", "epr-params", "bounds"};
  return names;
}

std::string env_name(const std::string& key) {
  std::string out = "CVQEC_";
  for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Settings parse_config_text(const std::string& text) {
  Settings out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

Settings resolve_settings(const std::string& command, const Settings& flags,
                          const std::optional<std::string>& config_path, const EnvLookup& env) {
  const auto& keys = command_keys(command);
  Settings out;
  for (const auto& k : keys) out[k.name] = k.default_value;

  if (config_path) {
    std::set<std::string> known;
    for (const auto& [name, specs] : registry()) {
      for (const auto& s : specs) known.insert(s.name);
    }
    for (const auto& [key, value] : load_config_file(*config_path)) {
      if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in config file");
      if (out.count(key)) out[key] = value;
    }
  }
  for (const auto& k : keys) {
    if (auto v = env(env_name(k.name))) out[k.name] = *v;
  }
  for (const auto& [key, value] : flags) {
    if (!out.count(key)) throw ConfigError("option --" + key + " does not apply to " + command);
    out[key] = value;
  }
  return out;
}

RunConfig RunConfig::from_settings(const std::string& command, const Settings& s) {
  RunConfig c;
  c.command = command;
  c.settings = s;
  auto has = [&](const char* k) { return s.count(k) > 0; };
  auto get = [&](const char* k) { return s.at(k); };
  auto opt_double = [&](const char* k) -> std::optional<double> {
    if (!has(k) || get(k).empty()) return std::nullopt;
    return to_double(k, get(k));
  };

  if (has("eta")) c.eta = to_double("eta", get("eta"));
  if (has("chi")) c.chi = to_double("chi", get("chi"));
  if (has("chis")) c.chis = to_list("chis", get("chis"));
  if (has("gain")) c.gain = to_double("gain", get("gain"));
  if (has("paths")) c.paths = to_int("paths", get("paths"));
  if (has("points")) c.points = to_int("points", get("points"));
  c.g_min = opt_double("g-min");
  c.g_max = opt_double("g-max");
  if (has("scale")) {
    const std::string v = get("scale");
    if (v == "log") {
      c.scale = SweepScale::Log;
    } else if (v == "linear") {
      c.scale = SweepScale::Linear;
    } else {
      throw ConfigError("scale must be log or linear, got '" + v + "'");
    }
  }
  if (has("eta-ec-target")) c.eta_ec_target = to_double("eta-ec-target", get("eta-ec-target"));
  if (has("dim")) c.dim = to_int("dim", get("dim"));
  if (has("dim-a")) c.dim_a = to_int("dim-a", get("dim-a"));
  if (has("dim-b")) c.dim_b = to_int("dim-b", get("dim-b"));
  if (has("io-dim")) c.io_dim = to_int("io-dim", get("io-dim"));
  if (has("grid-extent")) c.grid.extent = to_double("grid-extent", get("grid-extent"));
  if (has("grid-step")) c.grid.step = to_double("grid-step", get("grid-step"));
  if (has("feed-forward")) c.feed_forward = to_bool("feed-forward", get("feed-forward"));
  if (has("coarse-grid")) c.coarse_grid = to_bool("coarse-grid", get("coarse-grid"));
  if (has("json")) c.json = to_bool("json", get("json"));
  if (has("memory-budget")) {
    const long long v = to_integer("memory-budget", get("memory-budget"));
    if (v < 1) throw ConfigError("memory-budget must be positive");
    c.memory_budget = static_cast<std::size_t>(v);
  }
  if (has("seed")) {
    const long long v = to_integer("seed", get("seed"));
    if (v < 0) throw ConfigError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(v);
  }
  if (has("samples")) c.samples = to_int("samples", get("samples"));
  if (has("rel-tol")) c.rel_tol = to_double("rel-tol", get("rel-tol"));
  if (has("v-t")) c.v_t = to_double("v-t", get("v-t"));
  if (has("output")) c.output = get("output");

  if (c.points < 1) throw ConfigError("points must be >= 1");
  if (!(c.rel_tol > 0.0)) throw ConfigError("rel-tol must be positive");
  return c;
}

}  // namespace cvqec::cli
