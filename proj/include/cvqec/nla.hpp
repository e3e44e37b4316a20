#pragma once

// Heralded noiseless linear amplification: the ideal |n> -> G^(n/2)|n> map,
// its probability bounds, its action on lossy EPR pairs, and the
// linear-optics quantum-scissors realization.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cvqec/fock.hpp"
#include "cvqec/states.hpp"

namespace cvqec {

struct NlaConfig {
  // Intensity gain G >= 1; coherent amplitudes scale by sqrt(G).
  double gain = 1.0;
  // Fan-out width of the linear-optics device.
  int paths = 1;
  // Single-mode cutoff of the amplified mode.
  int dim = 8;
  // Accept both single-click patterns of every scissors unit, undoing the
  // sign flip of the second one with a (-1)^n phase on that unit's output.
  // Off: only the designated detector pattern heralds success.
  bool feed_forward = false;
  // Largest N-path intermediate amplitude count the simulator will build.
  std::size_t memory_budget = std::size_t{1} << 22;

  void validate() const;
};

template <class State>
struct HeraldedOutcome {
  State state;  // normalized conditional state
  double p_success;
};

// diag(G^(n/2)) / G^(n_max/2) with n_max = dim - 1: the most probable
// physical amplifier at this cutoff.
FockOperator ideal_nla_operator(double gain, int dim);

HeraldedOutcome<FockKet> ideal_nla(const NlaConfig& config, const FockKet& input);
HeraldedOutcome<DensityOperator> ideal_nla(const NlaConfig& config, const DensityOperator& input);
// Amplifies one mode of a multimode state; p_success is relative to the
// input trace.
HeraldedOutcome<KetEnsemble> ideal_nla_on_mode(const NlaConfig& config, const KetEnsemble& input,
                                               int mode);

// --- bounds ------------------------------------------------------------------

struct EnsembleSpec {
  double v_t;        // input ensemble quadrature variance, >= 1
  double v_t_prime;  // post-amplification variance, >= v_t

  void validate() const;
};

// (V_t - 1) / (V_t' - 1), clamped to [0, 1]. V_t' = 1 (hence V_t = 1) is
// treated as "no constraint" and returns 1.
double gaussian_ensemble_bound(const EnsembleSpec& spec);

// Bound on distilling EPR(chi) after loss eta with gain G:
// (1 - chi^2 x) / (x (1 - chi^2)), x = 1 + (G - 1) eta, clamped to [0, 1].
double success_bound(double chi, double eta, double gain);

struct EffectiveEpr {
  double chi_eff;
  double eta_eff;
};

// eta_eff = G eta / (1 + (G-1) eta), chi_eff = chi sqrt(1 + (G-1) eta).
// Throws UnphysicalOutput when chi_eff >= 1.
EffectiveEpr effective_epr_params(double chi, double eta, double gain);

struct EprIdentityReport {
  double fidelity;    // amplified lossy EPR vs EPR(chi_eff) + loss(eta_eff)
  double p_success;   // simulated ideal-NLA success probability
  double p_bound;     // success_bound(chi, eta, G)
  double tail;        // truncation weight of EPR(chi_eff) at the cutoff
  EffectiveEpr params;
};

EprIdentityReport verify_epr_identity(double chi, double eta, double gain, int dim);

struct EnsembleSampleReport {
  EnsembleSpec spec;
  double gain;
  int samples;
  double mean_p;
  double std_err;
  double bound;
  // mean_p <= bound + 3 std_err
  bool within_bound;
};

// Cutoff large enough that `samples` draws from the ensemble of variance
// v_t stay inside the coherent-state truncation guard with high confidence.
int ensemble_cutoff(double v_t, int samples);

// Draws coherent amplitudes from the Gaussian ensemble of variance v_t,
// amplifies each with the ideal NLA of gain G at cutoff `dim`, and compares
// the mean success probability with gaussian_ensemble_bound.
EnsembleSampleReport sample_ensemble_success(double v_t, double gain, int samples,
                                             std::uint64_t seed, int dim);

// --- linear optics -------------------------------------------------------------

// Single quantum-scissors unit with ancilla splitter transmissivity
// G/(1+G). Returns the heralded Kraus map on a `dim` cutoff, computed by
// simulating the three-mode circuit.
QuantumChannel scissors_unit(double unit_gain, int dim, bool feed_forward = false);

struct FailureBranch {
  double p_fail;
  // <0| rho_fail |0> / p_fail
  double vacuum_fraction;
};

// Output of a scissors unit over every non-heralding detector pattern.
FailureBranch scissors_unit_failure(double unit_gain, const FockKet& input, bool feed_forward = false);

struct ScissorsDevice {
  QuantumChannel channel;
  double unit_gain;
  // |<1|K|1> / <0|K|0>|^2 measured on the simulated Kraus map.
  double device_gain;
};

// N-path device: balanced DFT splitter, N scissors units, inverse splitter,
// vacuum herald on the N-1 unused output ports.
ScissorsDevice scissors_device(const NlaConfig& config);

HeraldedOutcome<DensityOperator> scissors_nla(const NlaConfig& config, const FockKet& input);
HeraldedOutcome<DensityOperator> scissors_nla(const NlaConfig& config, const DensityOperator& input);
HeraldedOutcome<KetEnsemble> scissors_nla_on_mode(const NlaConfig& config, const KetEnsemble& input,
                                                  int mode);

struct ScalingReport {
  int paths;
  std::vector<double> gains;
  std::vector<double> p_success;
  // p (1 + G)^N per gain
  std::vector<double> xi;
  double xi_mean;
  // (max xi - min xi) / mean xi
  double xi_variation;
  // p(N + 1) / p(N) * (1 + G) per gain; near 1 when the scaling holds
  std::vector<double> next_path_ratio;
};

ScalingReport lo_success_scaling(const std::vector<double>& gains, int paths, const FockKet& input,
                                 bool feed_forward = false);

}  // namespace cvqec
