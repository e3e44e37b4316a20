#include "cvqec/teleport.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cvqec/errors.hpp"

namespace cvqec {

namespace {

void check_chi(double chi) {
  if (!(chi >= 0.0 && chi < 1.0)) throw InvalidParameter("chi must lie in [0, 1)");
}

double op_norm_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct Accumulated {
  Matrix choi;          // output first, reference second, unit-trace normalization
  Matrix completeness;  // sum w B^dag B on the input space
  Matrix kraus_sum;     // sum w K^dag K
};

Accumulated accumulate(const KetEnsemble& resource, const TeleportGain& gain, const BellGrid& grid,
                       int io) {
  grid.validate();
  if (io < 1) throw InvalidDimension("teleport cutoff must be positive");
  const ModeDims& dims = resource.mode_dims();
  if (dims.size() != 2) throw InvalidDimension("teleport resource must have two modes");
  const int da = dims[0], db = dims[1];
  const double tr = resource.trace();
  if (!(tr > 0.0)) throw ValidationError("teleport resource has zero trace");

  // Row block k holds R_k^T with R_k(n, b) = <n, b|v_k>, scaled to a
  // unit-trace resource.
  const auto& branches = resource.branches();
  const int nb = static_cast<int>(branches.size());
  Matrix r_stack(static_cast<Eigen::Index>(nb) * db, da);
  for (int k = 0; k < nb; ++k) {
    for (int n = 0; n < da; ++n) {
      for (int b = 0; b < db; ++b) {
        r_stack(static_cast<Eigen::Index>(k) * db + b, n) =
            branches[k](static_cast<Eigen::Index>(n) * db + b) / std::sqrt(tr);
      }
    }
  }

  const Eigen::Index n2 = static_cast<Eigen::Index>(io) * io;
  Accumulated acc{Matrix::Zero(n2, n2), Matrix::Zero(io, io), Matrix::Zero(io, io)};
  const double w = grid.weight();
  const double sw = std::sqrt(w);
  Matrix k_stack(static_cast<Eigen::Index>(nb) * io, io);
  Matrix vecs(n2, nb);
  for (const Complex& gamma : grid.points()) {
    // Projecting input and sender arm onto Phi_gamma leaves the receiver in
    // R^T D(-gamma) psi; the receiver then displaces by amp_gain * gamma.
    const Matrix bell = displacement_elements(-gamma, da, io);
    const Matrix correction = displacement_elements(gain.amp_gain * gamma, io, db);
    const Matrix b_stack = r_stack * bell;
    acc.completeness.noalias() += w * b_stack.adjoint() * b_stack;
    for (int k = 0; k < nb; ++k) {
      const auto kk = k_stack.middleRows(static_cast<Eigen::Index>(k) * io, io);
      k_stack.middleRows(static_cast<Eigen::Index>(k) * io, io).noalias() =
          sw * correction * b_stack.middleRows(static_cast<Eigen::Index>(k) * db, db);
      for (int o = 0; o < io; ++o) {
        for (int i = 0; i < io; ++i) vecs(static_cast<Eigen::Index>(o) * io + i, k) = kk(o, i);
      }
    }
    acc.kraus_sum.noalias() += k_stack.adjoint() * k_stack;
    acc.choi.selfadjointView<Eigen::Lower>().rankUpdate(vecs, 1.0 / io);
  }
  acc.choi = acc.choi.selfadjointView<Eigen::Lower>();
  return acc;
}

QuantumChannel to_channel(Accumulated& acc, int io) {
  // Grid quadrature can overshoot completeness by up to the reported
  // defect; scale back so the map stays trace non-increasing.
  Eigen::SelfAdjointEigenSolver<Matrix> es(acc.kraus_sum, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (top > 1.0) acc.choi /= top;
  return QuantumChannel::from_choi(acc.choi, io, ChannelKind::Heralded);
}

[[noreturn]] void too_coarse(double defect, double max_defect, const BellGrid& grid) {
  std::ostringstream msg;
  msg << "Bell grid (R=" << grid.extent << ", step=" << grid.step
      << ") resolves the identity only to " << defect << " (limit " << max_defect
      << "); enlarge R or refine the step";
  throw GridTooCoarse(msg.str(), defect);
}

}  // namespace

TeleportGain TeleportGain::from_lambda(double lambda) {
  if (!(lambda >= 0.0) || std::isinf(lambda)) throw InvalidParameter("teleport gain must be finite and >= 0");
  return {lambda, std::sqrt(lambda)};
}

TeleportGain classical_gain(double chi) {
  check_chi(chi);
  const EprParams p = EprParams::from_chi(chi);
  const double r = (p.variance - 1.0) / (p.variance + 1.0);
  const double lambda = r * r;
  if (std::abs(lambda - chi * chi) > 1e-12) {
    std::ostringstream msg;
    msg << "classical gain identity failed at chi=" << chi << ": lambda=" << lambda;
    throw Error(msg.str());
  }
  return TeleportGain::from_lambda(lambda);
}

double effective_teleport_channel(double chi, double eta, const TeleportGain& gain) {
  check_chi(chi);
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("eta must lie in [0, 1]");
  const double expected = eta * chi * chi;
  if (std::abs(gain.lambda - expected) > 1e-12) {
    std::ostringstream msg;
    msg << "teleport gain lambda=" << gain.lambda << " differs from eta*chi^2=" << expected
        << "; loss equivalence only holds at that gain";
    throw OutOfModel(msg.str());
  }
  return expected;
}

void BellGrid::validate() const {
  if (!(extent > 0.0) || !(step > 0.0) || std::isinf(extent)) {
    throw InvalidParameter("Bell grid needs extent > 0 and step > 0");
  }
  if (2.0 * extent / step > 1e5) throw ResourceError("Bell grid has too many points");
}

int BellGrid::points_per_axis() const {
  validate();
  return static_cast<int>(std::ceil(2.0 * extent / step - 1e-9));
}

std::vector<Complex> BellGrid::points() const {
  const int n = points_per_axis();
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  const double offset = 0.5 * (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.emplace_back((i - offset) * step, (j - offset) * step);
  }
  return out;
}

double BellGrid::weight() const { return step * step / std::numbers::pi; }

FockOperator bell_projector(Complex gamma, int dim_in, int dim_a) {
  if (dim_in < 1 || dim_a < 1) throw InvalidDimension("bell_projector cutoffs must be positive");
  // Phi(a, n) = <a|D(gamma)|n>, flattened row-major over (input, arm).
  const Matrix d = displacement_elements(gamma, dim_in, dim_a);
  Vector phi(static_cast<Eigen::Index>(dim_in) * dim_a);
  for (int a = 0; a < dim_in; ++a) {
    for (int n = 0; n < dim_a; ++n) phi(static_cast<Eigen::Index>(a) * dim_a + n) = d(a, n);
  }
  return FockOperator({dim_in, dim_a}, phi * phi.adjoint());
}

TeleportChannel teleport_channel(const KetEnsemble& resource, const TeleportGain& gain,
                                 const BellGrid& grid, int io_dim, double max_defect) {
  Accumulated acc = accumulate(resource, gain, grid, io_dim);
  const Matrix id = Matrix::Identity(io_dim, io_dim);
  const double defect = op_norm_hermitian(acc.completeness - id);
  if (defect > max_defect) too_coarse(defect, max_defect, grid);
  const double trace_defect = op_norm_hermitian(acc.kraus_sum - id);
  return {to_channel(acc, io_dim), defect, trace_defect};
}

TeleportResult teleport_oracle(const DensityOperator& rho_in, const KetEnsemble& resource,
                               const TeleportGain& gain, const BellGrid& grid, double max_defect) {
  if (rho_in.num_modes() != 1) throw InvalidDimension("teleport input must be a single mode");
  const int io = rho_in.dim();
  Accumulated acc = accumulate(resource, gain, grid, io);

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_in.matrix());
  const double cut = es.eigenvalues().cwiseAbs().maxCoeff() * 1e-12;
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    if (es.eigenvalues()(j) > cut) support.push_back(j);
  }
  Matrix basis(io, static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(support[j]);
  }
  const Matrix restricted = basis.adjoint() * acc.completeness * basis;
  const double defect =
      op_norm_hermitian(restricted - Matrix::Identity(restricted.rows(), restricted.cols()));
  if (defect > max_defect) too_coarse(defect, max_defect, grid);

  const QuantumChannel channel = to_channel(acc, io);
  DensityOperator out = channel.apply(rho_in.normalized());
  const double trace_defect = std::abs(1.0 - out.trace());
  return {std::move(out), trace_defect, defect};
}

TeleportResult teleport_oracle(const DensityOperator& rho_in, const DensityOperator& resource,
                               const TeleportGain& gain, const BellGrid& grid, double max_defect) {
  return teleport_oracle(rho_in, KetEnsemble::from_density(resource), gain, grid, max_defect);
}

}  // namespace cvqec
