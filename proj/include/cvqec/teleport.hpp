#pragma once

// Continuous-variable teleportation with a tunable classical gain: the
// closed-form loss equivalence and a numerical oracle built from a
// discretized dual-homodyne (Bell) measurement.

#include <vector>

#include "cvqec/fock.hpp"
#include "cvqec/states.hpp"

namespace cvqec {

struct TeleportGain {
  double lambda;    // intensity gain
  double amp_gain;  // sqrt(lambda), multiplies the displacement

  static TeleportGain from_lambda(double lambda);
};

// lambda = ((V - 1) / (V + 1))^2 with V = (1 + chi) / (1 - chi).
TeleportGain classical_gain(double chi);

// Transmission of the loss channel equivalent to teleporting through
// EPR(chi) sent over loss eta with gain lambda' = eta chi^2. Other gains are
// outside the loss-equivalent model and raise OutOfModel.
double effective_teleport_channel(double chi, double eta, const TeleportGain& gain);

struct BellGrid {
  double extent = 6.0;  // half-width R of the square outcome window
  double step = 0.25;   // spacing delta

  void validate() const;
  int points_per_axis() const;
  // Cell midpoints gamma = x + i y, row by row in x then y.
  std::vector<Complex> points() const;
  // POVM weight of one grid cell, delta^2 / pi.
  double weight() const;
};

// |Phi_gamma><Phi_gamma| with Phi_gamma = (D(gamma) (x) I) sum_{n < dim_a} |n, n>,
// on (input, resource arm A) with cutoffs (dim_in, dim_a). The grid sum of
// weight() * bell_projector approximates the identity on low photon numbers.
FockOperator bell_projector(Complex gamma, int dim_in, int dim_a);

struct TeleportChannel {
  QuantumChannel channel;  // heralded kind; trace lost at the output cutoff shows as deficit
  // Largest deviation of the grid resolution of identity from I on the input space.
  double completeness_defect;
  // Largest deviation of sum_k K^dag K from I.
  double trace_defect;
};

// Channel on an `io_dim` cutoff obtained by teleporting through `resource`
// (mode 0 = sender arm, mode 1 = receiver arm). Throws GridTooCoarse when the
// completeness defect exceeds `max_defect`.
TeleportChannel teleport_channel(const KetEnsemble& resource, const TeleportGain& gain,
                                 const BellGrid& grid, int io_dim, double max_defect = 1e-3);

struct TeleportResult {
  DensityOperator state;
  double trace_defect;         // |1 - Tr rho_out|
  double completeness_defect;  // restricted to the support of rho_in
};

TeleportResult teleport_oracle(const DensityOperator& rho_in, const KetEnsemble& resource,
                               const TeleportGain& gain, const BellGrid& grid,
                               double max_defect = 1e-3);
TeleportResult teleport_oracle(const DensityOperator& rho_in, const DensityOperator& resource,
                               const TeleportGain& gain, const BellGrid& grid,
                               double max_defect = 1e-3);

}  // namespace cvqec
