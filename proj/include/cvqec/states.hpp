#pragma once

// State factories, the pure-loss channel, Choi states and loss fitting.

#include <vector>

#include "cvqec/fock.hpp"

namespace cvqec {

// Two-mode squeezing strength and the matching anti-squeezed variance in
// shot-noise units, V = (1 + chi) / (1 - chi).
struct EprParams {
  double chi;
  double variance;

  static EprParams from_chi(double chi);
  static EprParams from_variance(double variance);
};

FockKet vacuum_ket(int dim);
FockKet single_photon_ket(int dim);
FockKet number_ket(int n, int dim);
// Same truncation guard as displacement_op.
FockKet coherent_ket(Complex alpha, int dim);

// sqrt(1 - chi^2) sum_n chi^n |n, n>, truncated at min(dim_a, dim_b) and
// renormalized. The discarded weight is epr_tail_weight(chi, min(dim_a, dim_b)).
FockKet epr_ket(double chi, int dim_a, int dim_b);
double epr_tail_weight(double chi, int dim);
// Smallest cutoff whose discarded EPR weight chi^(2 dim) is below `tol`.
int recommended_cutoff(double chi, double tol = 1e-8);

enum class ChannelKind {
  TracePreserving,
  // Trace-decreasing: the Kraus-sum deficit is the failure probability.
  Heralded,
};

// Completely positive map on one mode, stored as Kraus operators.
class QuantumChannel {
 public:
  QuantumChannel(int dim, std::vector<Matrix> kraus, ChannelKind kind);

  static QuantumChannel identity(int dim);
  // Kraus operators from a Choi matrix normalized as choi_state() produces
  // (output mode first, reference second).
  static QuantumChannel from_choi(const Matrix& choi, int dim, ChannelKind kind,
                                  double threshold = 1e-13);

  int dim() const { return dim_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  ChannelKind kind() const { return kind_; }
  bool trace_preserving() const { return kind_ == ChannelKind::TracePreserving; }

  // sum_k K_k^dag K_k
  Matrix kraus_sum() const;
  Matrix choi_matrix() const;

  // Output trace is the success probability for heralded channels; call
  // normalized() on the result for the conditional state.
  DensityOperator apply(const DensityOperator& rho) const;
  // Applies the channel to one mode of a multimode state.
  KetEnsemble apply_on_mode(const KetEnsemble& state, int mode) const;

  // This channel followed by `next`.
  QuantumChannel then(const QuantumChannel& next) const;
  // Average success probability over the maximally mixed input,
  // Tr(sum_k K_k^dag K_k) / dim.
  double mean_success() const;

 private:
  int dim_;
  std::vector<Matrix> kraus_;
  ChannelKind kind_;
};

// <n-k| K_k |n> = sqrt(C(n,k) (1-eta)^k eta^(n-k)), with input cutoff `in_dim`
// and output cutoff `out_dim`; components above the output cutoff are dropped.
Matrix loss_kraus(double eta, int k, int in_dim, int out_dim);
QuantumChannel loss_channel(double eta, int dim);

// EPR(chi) on (dim_a, dim_a) with loss(eta) applied to mode 1, whose output
// cutoff is dim_b. Branch k holds the Kraus-k component; negligible branches
// (weight below 1e-18) are omitted.
KetEnsemble lossy_epr(double chi, double eta, int dim_a, int dim_b);

// (Lambda (x) I) applied to sum_n |n, n> / sqrt(dim). Mode 0 is the channel
// output and mode 1 the untouched reference.
DensityOperator choi_state(const QuantumChannel& channel);

// Fidelity between the unit-trace Choi states of two channels.
double choi_fidelity(const QuantumChannel& a, const QuantumChannel& b);

struct LossFit {
  double eta_est;
  // 1 - Choi fidelity to loss_channel(eta_est).
  double residual;
};

// Golden-section maximization of Choi fidelity over eta in [0, 1].
// Trace-decreasing channels must be flagged Heralded.
LossFit fit_loss(const QuantumChannel& channel, double tol = 1e-7);

// <a>_out / <a>_in for a coherent probe; equals sqrt(eta) for pure loss.
Complex mean_field_slope(const QuantumChannel& channel, Complex alpha);

}  // namespace cvqec
