#include "cvqec/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cvqec/errors.hpp"

namespace cvqec::cli {

using nlohmann::json;

namespace {

constexpr double kAlgebraicTol = 1e-12;
constexpr double kIdentityFidelity = 0.999;
constexpr double kTeleportResidual = 1e-2;
constexpr double kScissorsTol = 1e-9;
constexpr int kAlgebraicDraws = 1000;

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  return line + '\n';
}

std::string f(double x) { return format_number(x); }

json config_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : c.settings) {
    if (k != "output") j[k] = v;
  }
  return j;
}

json suite(const std::string& name, bool pass, const std::string& classification, json measured,
           json tolerances, const std::string& message = "") {
  return json{{"name", name},
              {"pass", pass},
              {"classification", classification},
              {"measured", std::move(measured)},
              {"tolerances", std::move(tolerances)},
              {"message", message}};
}

json suite_algebraic(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> eta_dist(0.01, 1.0);
  std::uniform_real_distribution<double> chi_dist(0.01, 0.99);
  double lambda_gap = 0.0, ecl_gap = 0.0, bound_at_max = 0.0;
  auto check = [&](double eta, double chi) {
    lambda_gap = std::max(lambda_gap, std::abs(classical_gain(chi).lambda - chi * chi));
    const double gmax = max_gain(eta, chi);
    ecl_gap = std::max(ecl_gap, std::abs(corrected_transmission(gmax, eta, chi).value -
                                         best_transmission(eta, chi)));
    bound_at_max = std::max(bound_at_max, success_bound(chi, eta, gmax));
  };
  check(c.eta, c.chi);
  for (int i = 0; i < kAlgebraicDraws; ++i) {
    const double eta = eta_dist(rng);
    check(eta, chi_dist(rng));
  }
  const bool pass = lambda_gap <= kAlgebraicTol && ecl_gap <= kAlgebraicTol && bound_at_max <= kAlgebraicTol;
  return suite("algebraic", pass, pass ? "ok" : "tolerance-exceeded",
               {{"draws", kAlgebraicDraws + 1},
                {"max_lambda_gap", lambda_gap},
                {"max_eta_ecl_gap", ecl_gap},
                {"max_bound_at_max_gain", bound_at_max}},
               {{"abs", kAlgebraicTol}});
}

json suite_epr_identity(const RunConfig& c) {
  const EprIdentityReport r = verify_epr_identity(c.chi, c.eta, c.gain, c.dim);
  const bool pass = r.fidelity >= kIdentityFidelity;
  return suite("epr_identity", pass, pass ? "ok" : "tolerance-exceeded",
               {{"fidelity", r.fidelity},
                {"p_success", r.p_success},
                {"p_bound", r.p_bound},
                {"chi_eff", r.params.chi_eff},
                {"eta_eff", r.params.eta_eff},
                {"tail", r.tail},
                {"dim", c.dim}},
               {{"min_fidelity", kIdentityFidelity}});
}

BellGrid verify_grid(const RunConfig& c) {
  if (c.coarse_grid) return BellGrid{2.0, 1.0};
  return c.grid;
}

json suite_teleport(const RunConfig& c) {
  const BellGrid grid = verify_grid(c);
  const json tol{{"rel", c.rel_tol}, {"max_residual", kTeleportResidual}, {"max_completeness_defect", 1e-3}};
  try {
    const TeleportGain gain = TeleportGain::from_lambda(c.eta * c.chi * c.chi);
    const double predicted = effective_teleport_channel(c.chi, c.eta, gain);
    const KetEnsemble resource = lossy_epr(c.chi, c.eta, c.io_dim, c.io_dim);
    const TeleportChannel tc = teleport_channel(resource, gain, grid, c.io_dim);
    const LossFit fit = fit_loss(tc.channel);
    const double rel = std::abs(fit.eta_est - predicted) / predicted;
    const bool pass = rel <= c.rel_tol && fit.residual < kTeleportResidual;
    return suite("teleport_oracle", pass, pass ? "ok" : "tolerance-exceeded",
                 {{"eta_predicted", predicted},
                  {"eta_est", fit.eta_est},
                  {"rel_error", rel},
                  {"residual", fit.residual},
                  {"completeness_defect", tc.completeness_defect},
                  {"trace_defect", tc.trace_defect}},
                 tol);
  } catch (const GridTooCoarse& e) {
    return suite("teleport_oracle", false, "grid-too-coarse", {{"completeness_defect", e.defect()}}, tol,
                 e.what());
  }
}

json suite_end_to_end(const RunConfig& c) {
  const json tol{{"rel", c.rel_tol}, {"residual", "completeness + trace defect + truncation tail"}};
  try {
    ProtocolConfig pc;
    pc.eta = c.eta;
    pc.chi = c.chi;
    pc.gain = c.gain;
    pc.io_dim = c.io_dim;
    pc.grid = verify_grid(c);
    pc.rel_tol = c.rel_tol;
    const EffectiveEpr eff = effective_epr_params(c.chi, c.eta, c.gain);
    pc.dim = std::max(c.io_dim, recommended_cutoff(eff.chi_eff, 1e-6));
    const EndToEndReport r = end_to_end_verify(pc);
    return suite("end_to_end", r.pass, r.pass ? "ok" : "tolerance-exceeded",
                 {{"eta_predicted", r.eta_predicted},
                  {"eta_est", r.eta_est},
                  {"rel_error", r.rel_error},
                  {"residual", r.residual},
                  {"residual_tolerance", residual_tolerance(r)},
                  {"p_success", r.p_success},
                  {"p_bound", r.p_bound},
                  {"dim", pc.dim}},
                 tol);
  } catch (const GridTooCoarse& e) {
    return suite("end_to_end", false, "grid-too-coarse", {{"completeness_defect", e.defect()}}, tol, e.what());
  }
}

json suite_ensemble(const RunConfig& c) {
  const int dim = ensemble_cutoff(c.v_t, c.samples);
  const EnsembleSampleReport r = sample_ensemble_success(c.v_t, c.gain, c.samples, c.seed, dim);
  return suite("ensemble_bound", r.within_bound, r.within_bound ? "ok" : "bound-exceeded",
               {{"v_t", r.spec.v_t},
                {"v_t_prime", r.spec.v_t_prime},
                {"mean_p", r.mean_p},
                {"std_err", r.std_err},
                {"bound", r.bound},
                {"samples", r.samples},
                {"dim", dim}},
               {{"sigma_multiple", 3}});
}

json suite_scissors(const RunConfig& c) {
  const int dim = 4;
  const QuantumChannel unit = scissors_unit(c.gain, dim);
  const Matrix& k = unit.kraus().front();
  const double ratio_gap = std::abs(std::abs(k(1, 1) / k(0, 0)) - std::sqrt(c.gain));
  NlaConfig cfg;
  cfg.gain = c.gain;
  cfg.paths = 2;
  cfg.dim = dim;
  const ScissorsDevice dev = scissors_device(cfg);
  const double gain_gap = std::abs(dev.device_gain - c.gain);
  const bool pass = ratio_gap <= kScissorsTol && gain_gap <= kScissorsTol * c.gain;
  return suite("scissors", pass, pass ? "ok" : "tolerance-exceeded",
               {{"unit_ratio_gap", ratio_gap},
                {"device_gain", dev.device_gain},
                {"device_gain_gap", gain_gap},
                {"vacuum_herald_probability", std::norm(k(0, 0))}},
               {{"abs", kScissorsTol}});
}

void write_output(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.output, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot write output file '" + c.output + "'");
  file << text;
}

std::vector<double> fig3_gains(const RunConfig& c, double chi) {
  const double lo = c.g_min.value_or(1.0);
  const double hi = c.g_max ? *c.g_max : fig3_gain_ceiling(c.eta, chi, c.eta_ec_target);
  return gain_sweep(lo, std::max(lo, hi), c.points, c.scale);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string provenance_header(const RunConfig& c) {
  std::string s = "# cvqec " + c.command + "\n";
  for (const auto& [k, v] : c.settings) {
    if (k == "output") continue;
    s += "# " + k + "=" + v + "\n";
  }
  return s;
}

std::string cmd_fig2(const RunConfig& c) {
  const GainWindow w = fig2_window(c.eta, c.chi);
  const double lo = c.g_min.value_or(w.lo);
  const double hi = c.g_max.value_or(w.hi);
  auto outside = [&](double g) { return !(g >= w.lo && g <= w.hi); };
  if (outside(lo) || outside(hi) || hi < lo) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "gain range [" << lo << ", " << hi << "] is not inside the valid window [" << w.lo << ", "
        << w.hi << "]";
    throw DomainError(msg.str());
  }
  std::string s = provenance_header(c);
  s += csv_row({"G", "eta_ec", "p_bound"});
  for (const ProtocolPoint& p : fig2_curve(c.eta, c.chi, gain_sweep(lo, hi, c.points, c.scale))) {
    s += csv_row({f(p.gain), f(p.eta_ec), f(p.p_success)});
  }
  return s;
}

std::string cmd_fig3(const RunConfig& c) {
  Fig3Settings fs;
  fs.paths = c.paths;
  fs.dim_a = c.dim_a;
  fs.dim_b = c.dim_b;
  fs.io_dim = c.io_dim;
  fs.grid = c.grid;
  fs.feed_forward = c.feed_forward;
  fs.memory_budget = c.memory_budget;
  std::string s = provenance_header(c);
  s += csv_row({"chi", "G", "eta_ec", "p_success", "fidelity"});
  for (double chi : c.chis) {
    for (const ProtocolPoint& p : fig3_curve(c.eta, chi, fig3_gains(c, chi), fs)) {
      s += csv_row({f(chi), f(p.gain), f(p.eta_ec), f(p.p_success), f(p.fidelity)});
    }
  }
  return s;
}

std::string cmd_epr_params(const RunConfig& c) {
  const EprParams p = EprParams::from_chi(c.chi);
  const TeleportGain lambda = classical_gain(c.chi);
  const EffectiveEpr eff = effective_epr_params(c.chi, c.eta, c.gain);
  const EprParams p_eff = EprParams::from_chi(eff.chi_eff);
  std::string s = provenance_header(c);
  s += csv_row({"chi", "V", "lambda", "eta", "G", "chi_eff", "V_eff", "eta_eff", "lambda_prime"});
  s += csv_row({f(c.chi), f(p.variance), f(lambda.lambda), f(c.eta), f(c.gain), f(eff.chi_eff),
                f(p_eff.variance), f(eff.eta_eff), f(eff.eta_eff * classical_gain(eff.chi_eff).lambda)});
  return s;
}

std::string cmd_bounds(const RunConfig& c) {
  if (!(c.gain >= 1.0)) throw InvalidParameter("gain must be >= 1");
  const EnsembleSpec spec{c.v_t, 1.0 + c.gain * (c.v_t - 1.0)};
  const CorrectedTransmission t = corrected_transmission(c.gain, c.eta, c.chi);
  std::string s = provenance_header(c);
  s += csv_row({"eta", "chi", "G", "V_t", "V_t_prime", "ensemble_bound", "p_bound", "eta_ec",
                "eta_ec_raw", "clamped", "G_max", "eta_ecl"});
  s += csv_row({f(c.eta), f(c.chi), f(c.gain), f(spec.v_t), f(spec.v_t_prime),
                f(gaussian_ensemble_bound(spec)), f(success_bound(c.chi, c.eta, c.gain)), f(t.value),
                f(t.raw), t.clamped ? "1" : "0", f(max_gain(c.eta, c.chi)),
                f(best_transmission(c.eta, c.chi))});
  return s;
}

VerifyOutcome cmd_verify(const RunConfig& c) {
  VerifyOutcome o;
  json suites = json::array();
  suites.push_back(suite_algebraic(c));
  suites.push_back(suite_epr_identity(c));
  suites.push_back(suite_teleport(c));
  suites.push_back(suite_end_to_end(c));
  suites.push_back(suite_ensemble(c));
  suites.push_back(suite_scissors(c));
  o.pass = true;
  for (const auto& s : suites) {
    if (!s["pass"].get<bool>()) {
      o.pass = false;
      o.failing.push_back(s["name"].get<std::string>());
    }
  }
  o.report = json{{"tool", "cvqec"},
                  {"command", "verify"},
                  {"config", config_json(c)},
                  {"suites", std::move(suites)},
                  {"pass", o.pass}};
  return o;
}

std::vector<std::string> check_verify_schema(const json& r) {
  std::vector<std::string> problems;
  auto need = [&](const json& obj, const char* key, json::value_t type, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    const auto t = obj[key].type();
    const bool numeric = type == json::value_t::number_float &&
                         (t == json::value_t::number_integer || t == json::value_t::number_unsigned);
    if (t != type && !numeric) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  };
  need(r, "tool", json::value_t::string, "report");
  need(r, "command", json::value_t::string, "report");
  need(r, "config", json::value_t::object, "report");
  need(r, "pass", json::value_t::boolean, "report");
  if (need(r, "suites", json::value_t::array, "report")) {
    if (r["suites"].empty()) problems.push_back("report: no suites");
    for (std::size_t i = 0; i < r["suites"].size(); ++i) {
      const json& s = r["suites"][i];
      const std::string where = "suites[" + std::to_string(i) + "]";
      need(s, "name", json::value_t::string, where);
      need(s, "pass", json::value_t::boolean, where);
      need(s, "classification", json::value_t::string, where);
      need(s, "message", json::value_t::string, where);
      need(s, "tolerances", json::value_t::object, where);
      if (need(s, "measured", json::value_t::object, where)) {
        for (const auto& [k, v] : s["measured"].items()) {
          if (!v.is_number() && !v.is_null()) problems.push_back(where + ".measured." + k + " is not numeric");
        }
      }
    }
  }
  return problems;
}

namespace {

std::string command_description(const std::string& name) {
  static const std::map<std::string, std::string> text{
      {"fig2", "analytic success bound versus corrected transmission across the gain window"},
      {"fig3", "simulated linear-optics distillation and teleportation curves"},
      {"verify", "run the self-check suites and report pass/fail"},
      {"epr-params", "entanglement, gain and effective-channel parameters"},
      {"bounds", "success-probability bounds and corrected transmissions"},
  };
  return text.at(name);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Truncated Fock-space simulator for loss correction by distillation and teleportation",
               "cvqec"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");

  struct Bound {
    std::string command;
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const std::string& name : command_names()) {
    auto b = std::make_unique<Bound>();
    b->command = name;
    b->sub = app.add_subcommand(name, command_description(name));
    for (const KeySpec& k : command_keys(name)) {
      std::string help = k.help;
      if (!k.default_value.empty()) help += " [" + k.default_value + "]";
      if (k.flag) {
        b->options[k.name] = b->sub->add_flag("--" + k.name)->description(help);
      } else {
        b->options[k.name] = b->sub->add_option("--" + k.name, b->values[k.name], help);
      }
    }
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitParameterError;
  }

  const Bound* chosen = nullptr;
  for (const auto& b : bound) {
    if (b->sub->parsed()) chosen = b.get();
  }
  if (chosen == nullptr) {
    err << "error: no command given\n";
    return kExitParameterError;
  }

  try {
    Settings flags;
    for (const auto& [key, opt] : chosen->options) {
      if (opt->count() == 0) continue;
      const bool is_flag = opt->get_expected_min() == 0;
      flags[key] = is_flag ? "true" : chosen->values.at(key);
    }
    std::optional<std::string> cfg;
    if (!config_path.empty()) {
      cfg = config_path;
    } else if (auto e = env("CVQEC_CONFIG")) {
      cfg = *e;
    }
    const RunConfig c = RunConfig::from_settings(chosen->command, resolve_settings(chosen->command, flags, cfg, env));

    if (c.command == "verify") {
      const VerifyOutcome o = cmd_verify(c);
      std::string text;
      if (c.json) {
        text = o.report.dump(2) + "\n";
      } else {
        text = provenance_header(c);
        for (const auto& s : o.report["suites"]) {
          text += s["name"].get<std::string>() + ": " + (s["pass"].get<bool>() ? "PASS" : "FAIL") + " (" +
                  s["classification"].get<std::string>() + ")\n";
        }
      }
      write_output(c, text, out);
      if (!o.pass) {
        err << "verify failed:";
        for (const auto& n : o.failing) err << " " << n;
        err << "\n";
        return kExitSuiteFailure;
      }
      return kExitOk;
    }

    std::string text;
    if (c.command == "fig2") {
      text = cmd_fig2(c);
    } else if (c.command == "fig3") {
      text = cmd_fig3(c);
    } else if (c.command == "epr-params") {
      text = cmd_epr_params(c);
    } else {
      text = cmd_bounds(c);
    }
    write_output(c, text, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameterError;
  } catch (const InvalidParameter& e) {
    err << "parameter error: " << e.what() << "\n";
    return kExitParameterError;
  } catch (const InvalidDimension& e) {
    err << "parameter error: " << e.what() << "\n";
    return kExitParameterError;
  } catch (const DomainError& e) {
    err << "parameter error: " << e.what() << "\n";
    return kExitParameterError;
  } catch (const UnphysicalOutput& e) {
    err << "parameter error: " << e.what() << "\n";
    return kExitParameterError;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << "\n";
    return kExitResourceError;
  } catch (const GridTooCoarse& e) {
    err << "resource error: " << e.what() << "\n";
    return kExitResourceError;
  } catch (const TruncationLeakage& e) {
    err << "resource error: " << e.what() << "; increase the cutoff\n";
    return kExitResourceError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace cvqec::cli
