#pragma once

// End-to-end error correction by distillation and teleportation: headline
// transmissions, the gain window, curve generation and full-pipeline checks.

#include <cstddef>
#include <vector>

#include "cvqec/nla.hpp"
#include "cvqec/teleport.hpp"

namespace cvqec {

struct CorrectedTransmission {
  double value;  // min(raw, 1)
  bool clamped;  // raw > 1
  double raw;    // G eta chi^2
};

CorrectedTransmission corrected_transmission(double gain, double eta, double chi);

// Largest gain with nonzero distillation probability,
// (1 - (1 - eta) chi^2) / (eta chi^2). Infinite for chi = 0.
double max_gain(double eta, double chi);
// 1 - (1 - eta) chi^2, the transmission reached at max_gain.
double best_transmission(double eta, double chi);

struct GainWindow {
  double lo;  // break-even gain 1 / chi^2
  double hi;  // max_gain
};

// Closed window [1/chi^2, G_max]; throws DomainError when it is empty or unbounded.
GainWindow fig2_window(double eta, double chi);

enum class SweepScale { Linear, Log };

std::vector<double> gain_sweep(double lo, double hi, int count, SweepScale scale = SweepScale::Log);

struct ProtocolPoint {
  double gain;
  double eta_ec;
  double p_success;
  double fidelity;
  bool clamped = false;
};

// Analytic bound curve. Every gain must lie inside fig2_window.
std::vector<ProtocolPoint> fig2_curve(double eta, double chi, const std::vector<double>& gains);

// Gain at which the predicted corrected transmission G eta chi^2 reaches
// `target_eta_ec`, capped at `cap` and kept below the gain that drives
// chi_eff to 1.
double fig3_gain_ceiling(double eta, double chi, double target_eta_ec = 0.1, double cap = 100.0);

// Gain that distills lossy EPR(chi) to a given chi_eff:
// 1 + (chi_eff^2 / chi^2 - 1) / eta.
double gain_for_chi_eff(double eta, double chi, double chi_eff);

struct Fig3Settings {
  int paths = 2;
  // Sender arm cutoff; 0 picks recommended_cutoff(chi, 1e-6).
  int dim_a = 0;
  // Receiver arm cutoff (the amplified mode).
  int dim_b = 10;
  // Cutoff of the teleported mode.
  int io_dim = 10;
  BellGrid grid{8.0, 0.25};
  std::vector<Complex> probes{0.0, 0.5, 1.0};
  bool feed_forward = false;
  std::size_t memory_budget = std::size_t{1} << 22;
};

// Simulated linear-optics curve: scissors distillation of lossy EPR(chi),
// then teleportation with the gain set from the effective parameters.
// eta_ec is the loss fit of the teleport channel; fidelity is the worst
// probe fidelity between teleporting through the scissors-distilled and the
// ideally distilled resource.
std::vector<ProtocolPoint> fig3_curve(double eta, double chi, const std::vector<double>& gains,
                                      const Fig3Settings& settings = {});

struct ProtocolConfig {
  double eta = 0.5;
  double chi = 0.5;
  double gain = 5.0;
  // Cutoff of both resource arms.
  int dim = 30;
  // Cutoff of the teleported mode.
  int io_dim = 10;
  BellGrid grid{9.0, 0.25};
  // Allowed relative gap between the fitted and predicted transmission.
  double rel_tol = 0.02;

  void validate() const;
};

struct EndToEndReport {
  double eta_predicted;  // corrected_transmission value
  double eta_est;
  double rel_error;
  double residual;
  double p_success;  // simulated ideal-NLA success probability
  double p_bound;
  double completeness_defect;
  double trace_defect;
  double truncation_tail;  // EPR(chi_eff) weight beyond the cutoff
  bool pass;
};

// Loss-fit residual allowed by the grid and truncation errors of a report:
// completeness defect + trace defect + truncation tail.
double residual_tolerance(const EndToEndReport& report);

// Ideal-NLA pipeline: lossy EPR, amplification, teleportation with
// lambda' = eta_eff chi_eff^2, and a loss fit of the resulting channel.
EndToEndReport end_to_end_verify(const ProtocolConfig& config);

}  // namespace cvqec
