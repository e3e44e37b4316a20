#pragma once

// Truncated multimode Fock-space containers and elementary operators.
//
// Basis ordering is row-major over modes: for mode_dims (d0, d1, ..., dk)
// the occupation (n0, n1, ..., nk) sits at index
// ((n0 * d1 + n1) * d2 + n2) ... so mode 0 is the most significant digit.
// All types are immutable values once constructed.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvqec {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using ModeDims = std::vector<int>;

// Product of the per-mode cutoffs. Throws InvalidDimension on empty dims or
// a non-positive entry.
int total_dim(const ModeDims& dims);

// Row-major flat index of an occupation pattern.
int flat_index(const ModeDims& dims, std::span<const int> occupation);

class FockKet {
 public:
  // A heralded ket is a conditional branch whose squared norm equals the
  // probability of the herald; unheralded kets must be normalized.
  FockKet(ModeDims dims, Vector amps, bool heralded = false);

  static FockKet basis(ModeDims dims, std::span<const int> occupation);

  const ModeDims& mode_dims() const { return dims_; }
  const Vector& amplitudes() const { return amps_; }
  int num_modes() const { return static_cast<int>(dims_.size()); }
  int dim() const { return static_cast<int>(amps_.size()); }
  bool heralded() const { return heralded_; }

  double norm() const { return amps_.norm(); }
  // Unit-norm, unheralded copy. Throws ValidationError for a zero ket.
  FockKet normalized() const;

 private:
  ModeDims dims_;
  Vector amps_;
  bool heralded_;
};

class DensityOperator {
 public:
  // Checks Hermiticity (1e-10) and 0 < trace <= 1 + 1e-10. Positivity is
  // verified lazily by consumers that diagonalize (fidelity, validate()).
  DensityOperator(ModeDims dims, Matrix matrix);

  static DensityOperator from_ket(const FockKet& ket);

  const ModeDims& mode_dims() const { return dims_; }
  const Matrix& matrix() const { return matrix_; }
  int num_modes() const { return static_cast<int>(dims_.size()); }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  double trace() const { return matrix_.trace().real(); }

  DensityOperator normalized() const;
  // Throws ValidationError when an eigenvalue is below -1e-9.
  void validate() const;

 private:
  ModeDims dims_;
  Matrix matrix_;
};

class FockOperator {
 public:
  FockOperator(ModeDims dims, Matrix matrix, bool unitary = false);

  const ModeDims& mode_dims() const { return dims_; }
  const Matrix& matrix() const { return matrix_; }
  bool unitary() const { return unitary_; }

  FockKet apply(const FockKet& ket) const;
  DensityOperator apply(const DensityOperator& rho) const;

  FockOperator operator*(const FockOperator& rhs) const;

 private:
  ModeDims dims_;
  Matrix matrix_;
  bool unitary_;
};

// Mixed state as a list of unnormalized pure branches, rho = sum_k |v_k><v_k|.
// Cheaper than a dense matrix when the rank is small relative to the
// dimension, which is the common case for states produced by a few Kraus
// operators acting on a pure input.
class KetEnsemble {
 public:
  KetEnsemble(ModeDims dims, std::vector<Vector> branches);

  static KetEnsemble from_ket(const FockKet& ket);
  // Eigen-decomposition; eigenvalues below `threshold` times the largest are
  // dropped.
  static KetEnsemble from_density(const DensityOperator& rho, double threshold = 1e-14);

  const ModeDims& mode_dims() const { return dims_; }
  const std::vector<Vector>& branches() const { return branches_; }
  double trace() const;
  DensityOperator to_density() const;
  KetEnsemble scaled(double factor) const;

 private:
  ModeDims dims_;
  std::vector<Vector> branches_;
};

// --- single-mode operators -------------------------------------------------

FockOperator annihilation_op(int dim);
FockOperator creation_op(int dim);
FockOperator number_op(int dim);

// Norm of a coherent state |alpha> that falls outside a cutoff `dim`.
double coherent_leakage(Complex alpha, int dim);

// exp(alpha a^dag - alpha* a) on the truncated space. Requires
// |alpha|^2 <= dim/4 and an estimated leakage below 1e-6.
FockOperator displacement_op(Complex alpha, int dim);

// Exact matrix elements <m|D(beta)|n> for m < rows, n < cols from the
// Laguerre closed form. No truncation guard: the block is a projection of
// the infinite-dimensional operator, not a unitary.
Matrix displacement_elements(Complex beta, int rows, int cols);

// Two-mode beamsplitter exp[theta (a^dag b - a b^dag)] with cos(theta) =
// sqrt(transmissivity). Convention: U|1,0> = sqrt(t)|1,0> - sqrt(1-t)|0,1>.
// Exact on total photon numbers below min(dim_a, dim_b).
FockOperator beamsplitter_op(double transmissivity, int dim_a, int dim_b);

// --- composition -----------------------------------------------------------

FockKet tensor(const FockKet& x, const FockKet& y);
DensityOperator tensor(const DensityOperator& x, const DensityOperator& y);
FockOperator tensor(const FockOperator& x, const FockOperator& y);

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep);

// Applies a (possibly rectangular) single-mode matrix to one mode of a
// multimode ket; the mode's cutoff becomes op.rows().
Vector apply_on_mode(const Matrix& op, int mode, const ModeDims& dims, const Vector& amps);
FockKet apply_on_mode(const Matrix& op, int mode, const FockKet& ket);
// Square two-mode operator on (mode_a, mode_b), ordered row-major as (a, b).
Vector apply_on_modes(const Matrix& op, int mode_a, int mode_b, const ModeDims& dims,
                      const Vector& amps);
KetEnsemble apply_on_mode(const Matrix& op, int mode, const KetEnsemble& state);

// --- metrics ---------------------------------------------------------------

// Uhlmann fidelity (squared convention): |<psi|phi>|^2 for pure states.
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double fidelity(const FockKet& psi, const FockKet& phi);
double fidelity(const FockKet& psi, const DensityOperator& rho);
// Both ensembles are normalized to unit trace first.
double fidelity(const KetEnsemble& x, const KetEnsemble& y);

// Expectation value Tr(op rho).
Complex expectation(const FockOperator& op, const DensityOperator& rho);

}  // namespace cvqec
