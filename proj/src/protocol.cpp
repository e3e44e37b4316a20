#include "cvqec/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cvqec/errors.hpp"

namespace cvqec {

namespace {

void check_ranges(double eta, double chi) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidParameter("eta must lie in (0, 1]");
  if (!(chi >= 0.0 && chi < 1.0)) throw InvalidParameter("chi must lie in [0, 1)");
}

double min_probe_fidelity(const QuantumChannel& a, const QuantumChannel& b,
                          const std::vector<Complex>& probes, int dim) {
  double worst = 1.0;
  for (const Complex& alpha : probes) {
    const DensityOperator in = DensityOperator::from_ket(coherent_ket(alpha, dim));
    worst = std::min(worst, fidelity(a.apply(in).normalized(), b.apply(in).normalized()));
  }
  return worst;
}

}  // namespace

CorrectedTransmission corrected_transmission(double gain, double eta, double chi) {
  check_ranges(eta, chi);
  if (!(gain >= 1.0) || std::isinf(gain)) throw InvalidParameter("gain must be finite and >= 1");
  const double raw = gain * eta * chi * chi;
  return {std::min(raw, 1.0), raw > 1.0, raw};
}

double max_gain(double eta, double chi) {
  check_ranges(eta, chi);
  if (chi == 0.0) return std::numeric_limits<double>::infinity();
  const double c2 = chi * chi;
  return (1.0 - (1.0 - eta) * c2) / (eta * c2);
}

double best_transmission(double eta, double chi) {
  check_ranges(eta, chi);
  return 1.0 - (1.0 - eta) * chi * chi;
}

GainWindow fig2_window(double eta, double chi) {
  check_ranges(eta, chi);
  if (chi == 0.0) throw DomainError("chi = 0 gives an unbounded gain window");
  const GainWindow w{1.0 / (chi * chi), max_gain(eta, chi)};
  if (!(w.hi >= w.lo)) {
    std::ostringstream msg;
    msg << "empty gain window [" << w.lo << ", " << w.hi << "]";
    throw DomainError(msg.str());
  }
  return w;
}

std::vector<double> gain_sweep(double lo, double hi, int count, SweepScale scale) {
  if (count < 1) throw InvalidParameter("sweep count must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo) || std::isinf(hi)) throw InvalidParameter("sweep needs 0 < lo <= hi < inf");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    g[i] = scale == SweepScale::Log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                    : lo + t * (hi - lo);
  }
  // Pin the endpoints exactly.
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<ProtocolPoint> fig2_curve(double eta, double chi, const std::vector<double>& gains) {
  const GainWindow w = fig2_window(eta, chi);
  std::vector<ProtocolPoint> out;
  out.reserve(gains.size());
  for (double g : gains) {
    if (!(g >= w.lo && g <= w.hi)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "gain " << g << " outside the valid window [" << w.lo << ", " << w.hi << "]";
      throw DomainError(msg.str());
    }
    const CorrectedTransmission t = corrected_transmission(g, eta, chi);
    out.push_back({g, t.value, success_bound(chi, eta, g), 1.0, t.clamped});
  }
  std::sort(out.begin(), out.end(),
            [](const ProtocolPoint& a, const ProtocolPoint& b) { return a.gain < b.gain; });
  return out;
}

double fig3_gain_ceiling(double eta, double chi, double target_eta_ec, double cap) {
  check_ranges(eta, chi);
  if (chi == 0.0) throw DomainError("chi = 0 cannot be distilled");
  if (!(target_eta_ec > 0.0) || !(cap >= 1.0)) throw InvalidParameter("need target > 0 and cap >= 1");
  const double c2 = chi * chi;
  const double unphysical = 1.0 + (1.0 / c2 - 1.0) / eta;
  return std::max(1.0, std::min({target_eta_ec / (eta * c2), cap, 0.9 * unphysical}));
}

double gain_for_chi_eff(double eta, double chi, double chi_eff) {
  check_ranges(eta, chi);
  if (!(chi > 0.0) || !(chi_eff >= chi && chi_eff < 1.0)) {
    throw InvalidParameter("need 0 < chi <= chi_eff < 1");
  }
  return 1.0 + (chi_eff * chi_eff / (chi * chi) - 1.0) / eta;
}

std::vector<ProtocolPoint> fig3_curve(double eta, double chi, const std::vector<double>& gains,
                                      const Fig3Settings& s) {
  check_ranges(eta, chi);
  const int dim_a = s.dim_a > 0 ? s.dim_a : recommended_cutoff(chi, 1e-6);
  const KetEnsemble lossy = lossy_epr(chi, eta, dim_a, s.dim_b);

  NlaConfig cfg;
  cfg.paths = s.paths;
  cfg.dim = s.dim_b;
  cfg.feed_forward = s.feed_forward;
  cfg.memory_budget = s.memory_budget;

  std::vector<double> sorted = gains;
  std::sort(sorted.begin(), sorted.end());
  std::vector<ProtocolPoint> out;
  for (double g : sorted) {
    cfg.gain = g;
    const EffectiveEpr eff = effective_epr_params(chi, eta, g);
    const TeleportGain tg = TeleportGain::from_lambda(eff.eta_eff * eff.chi_eff * eff.chi_eff);

    const auto scissors = scissors_nla_on_mode(cfg, lossy, 1);
    const auto ideal = ideal_nla_on_mode(cfg, lossy, 1);
    const TeleportChannel t_scissors = teleport_channel(scissors.state, tg, s.grid, s.io_dim);
    const TeleportChannel t_ideal = teleport_channel(ideal.state, tg, s.grid, s.io_dim);

    const LossFit fit = fit_loss(t_scissors.channel);
    ProtocolPoint p;
    p.gain = g;
    p.eta_ec = fit.eta_est;
    p.p_success = scissors.p_success;
    p.fidelity = min_probe_fidelity(t_scissors.channel, t_ideal.channel, s.probes, s.io_dim);
    out.push_back(p);
  }
  return out;
}

void ProtocolConfig::validate() const {
  check_ranges(eta, chi);
  if (!(gain >= 1.0)) throw InvalidParameter("gain must be >= 1");
  if (dim < 2 || io_dim < 2) throw InvalidDimension("cutoffs must be >= 2");
  if (!(rel_tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  grid.validate();
}

double residual_tolerance(const EndToEndReport& r) {
  return r.completeness_defect + r.trace_defect + r.truncation_tail;
}

EndToEndReport end_to_end_verify(const ProtocolConfig& c) {
  c.validate();
  const EffectiveEpr eff = effective_epr_params(c.chi, c.eta, c.gain);
  const KetEnsemble lossy = lossy_epr(c.chi, c.eta, c.dim, c.dim);
  NlaConfig cfg;
  cfg.gain = c.gain;
  cfg.dim = c.dim;
  const auto amplified = ideal_nla_on_mode(cfg, lossy, 1);
  const TeleportGain tg = TeleportGain::from_lambda(eff.eta_eff * eff.chi_eff * eff.chi_eff);
  const TeleportChannel tc = teleport_channel(amplified.state, tg, c.grid, c.io_dim);
  const LossFit fit = fit_loss(tc.channel);

  EndToEndReport r;
  r.eta_predicted = corrected_transmission(c.gain, c.eta, c.chi).value;
  r.eta_est = fit.eta_est;
  r.rel_error = std::abs(fit.eta_est - r.eta_predicted) / r.eta_predicted;
  r.residual = fit.residual;
  r.p_success = amplified.p_success;
  r.p_bound = success_bound(c.chi, c.eta, c.gain);
  r.completeness_defect = tc.completeness_defect;
  r.trace_defect = tc.trace_defect;
  r.truncation_tail = epr_tail_weight(eff.chi_eff, c.dim);
  r.pass = r.rel_error <= c.rel_tol && r.residual <= residual_tolerance(r);
  return r;
}

}  // namespace cvqec
