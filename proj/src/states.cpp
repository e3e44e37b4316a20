#include "cvqec/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cvqec/errors.hpp"

namespace cvqec {

namespace {

constexpr double kKrausTol = 1e-9;

void check_chi(double chi) {
  if (!(chi >= 0.0 && chi < 1.0)) {
    std::ostringstream msg;
    msg << "squeezing parameter chi=" << chi << " must lie in [0, 1)";
    throw InvalidParameter(msg.str());
  }
}

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "transmission eta=" << eta << " must lie in [0, 1]";
    throw InvalidParameter(msg.str());
  }
}

// Row-major flattening: index o * cols + i.
Vector vec_rows(const Matrix& k) {
  Vector v(k.size());
  for (Eigen::Index o = 0; o < k.rows(); ++o) {
    for (Eigen::Index i = 0; i < k.cols(); ++i) v(o * k.cols() + i) = k(o, i);
  }
  return v;
}

// Columns are row-major flattened Kraus operators scaled by 1/sqrt(dim), so
// that choi = F F^dag.
Matrix choi_factor(const std::vector<Matrix>& kraus, int dim) {
  Matrix f(static_cast<Eigen::Index>(dim) * dim, static_cast<Eigen::Index>(kraus.size()));
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < kraus.size(); ++k) f.col(static_cast<Eigen::Index>(k)) = vec_rows(kraus[k]) * s;
  return f;
}

double fidelity_from_factors(const Matrix& f, const Matrix& g) {
  if (f.cols() == 0 || g.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(g.adjoint() * f);
  const double s = svd.singularValues().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

// Low-rank factor of a normalized Choi matrix via eigen-decomposition.
Matrix normalized_choi_factor(const QuantumChannel& channel) {
  Matrix f = choi_factor(channel.kraus(), channel.dim());
  const double tr = f.squaredNorm();
  if (!(tr > 0.0)) throw ValidationError("channel has zero success probability");
  f /= std::sqrt(tr);
  // Compress to the numerical rank so the SVD in the fidelity stays small.
  if (f.cols() > f.rows()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(f * f.adjoint());
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cut = ev.maxCoeff() * 1e-14;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > cut) keep.push_back(i);
    }
    Matrix g(f.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      g.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
    }
    return g;
  }
  return f;
}

}  // namespace

// --- EprParams ---------------------------------------------------------------

EprParams EprParams::from_chi(double chi) {
  check_chi(chi);
  return {chi, (1.0 + chi) / (1.0 - chi)};
}

EprParams EprParams::from_variance(double variance) {
  if (!(variance >= 1.0) || std::isinf(variance)) {
    throw InvalidParameter("anti-squeezing variance must be finite and >= 1");
  }
  return {(variance - 1.0) / (variance + 1.0), variance};
}

// --- kets --------------------------------------------------------------------

FockKet vacuum_ket(int dim) { return number_ket(0, dim); }

FockKet single_photon_ket(int dim) { return number_ket(1, dim); }

FockKet number_ket(int n, int dim) {
  const int occ[1] = {n};
  return FockKet::basis({dim}, occ);
}

FockKet coherent_ket(Complex alpha, int dim) {
  if (dim < 1) throw InvalidDimension("coherent_ket needs dim >= 1");
  const double leak = coherent_leakage(alpha, dim);
  if (std::norm(alpha) > dim / 4.0 || leak > 1e-6) {
    std::ostringstream msg;
    msg << "coherent amplitude |alpha|^2=" << std::norm(alpha) << " too large for cutoff " << dim
        << " (estimated leakage " << leak << ")";
    throw TruncationLeakage(msg.str(), leak);
  }
  Vector amps(dim);
  amps(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) amps(n) = amps(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  // Renormalize away the (sub-1e-6) tail so the ket is exactly unit norm.
  amps /= amps.norm();
  return FockKet({dim}, std::move(amps));
}

FockKet epr_ket(double chi, int dim_a, int dim_b) {
  check_chi(chi);
  if (dim_a < 1 || dim_b < 1) throw InvalidDimension("epr_ket dims must be positive");
  const int cut = std::min(dim_a, dim_b);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dim_a) * dim_b);
  const double c0 = std::sqrt(1.0 - chi * chi);
  double c = c0;
  for (int n = 0; n < cut; ++n) {
    amps(static_cast<Eigen::Index>(n) * dim_b + n) = c;
    c *= chi;
  }
  amps /= amps.norm();
  return FockKet({dim_a, dim_b}, std::move(amps));
}

double epr_tail_weight(double chi, int dim) {
  check_chi(chi);
  return std::pow(chi, 2.0 * dim);
}

int recommended_cutoff(double chi, double tol) {
  check_chi(chi);
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidParameter("tolerance must lie in (0, 1)");
  if (chi == 0.0) return 1;
  return static_cast<int>(std::floor(std::log(tol) / (2.0 * std::log(chi)))) + 1;
}

// --- QuantumChannel ----------------------------------------------------------

QuantumChannel::QuantumChannel(int dim, std::vector<Matrix> kraus, ChannelKind kind)
    : dim_(dim), kraus_(std::move(kraus)), kind_(kind) {
  if (dim_ < 1) throw InvalidDimension("channel dim must be positive");
  if (kraus_.empty()) throw ValidationError("channel needs at least one Kraus operator");
  for (const auto& k : kraus_) {
    if (k.rows() != dim_ || k.cols() != dim_) throw InvalidDimension("Kraus operator has wrong shape");
  }
  const Matrix s = kraus_sum();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (top > 1.0 + kKrausTol) {
    std::ostringstream msg;
    msg << "Kraus sum exceeds identity (largest eigenvalue " << top << ")";
    throw ValidationError(msg.str());
  }
  if (kind_ == ChannelKind::TracePreserving) {
    const double dev = (s - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
    if (dev > kKrausTol) {
      std::ostringstream msg;
      msg << "channel flagged trace-preserving deviates from identity Kraus sum by " << dev;
      throw ValidationError(msg.str());
    }
  }
}

QuantumChannel QuantumChannel::identity(int dim) {
  return QuantumChannel(dim, {Matrix::Identity(dim, dim)}, ChannelKind::TracePreserving);
}

QuantumChannel QuantumChannel::from_choi(const Matrix& choi, int dim, ChannelKind kind,
                                         double threshold) {
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  if (choi.rows() != n || choi.cols() != n) throw InvalidDimension("Choi matrix has wrong shape");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = ev.maxCoeff() * threshold;
  std::vector<Matrix> kraus;
  for (Eigen::Index j = ev.size() - 1; j >= 0; --j) {
    if (ev(j) <= cut) break;
    const Vector v = es.eigenvectors().col(j) * std::sqrt(ev(j) * dim);
    Matrix k(dim, dim);
    for (int o = 0; o < dim; ++o) {
      for (int i = 0; i < dim; ++i) k(o, i) = v(static_cast<Eigen::Index>(o) * dim + i);
    }
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(dim, std::move(kraus), kind);
}

Matrix QuantumChannel::kraus_sum() const {
  Matrix s = Matrix::Zero(dim_, dim_);
  for (const auto& k : kraus_) s.noalias() += k.adjoint() * k;
  return s;
}

Matrix QuantumChannel::choi_matrix() const {
  const Matrix f = choi_factor(kraus_, dim_);
  return f * f.adjoint();
}

DensityOperator QuantumChannel::apply(const DensityOperator& rho) const {
  if (rho.mode_dims() != ModeDims{dim_}) throw InvalidDimension("channel/state dimension mismatch");
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const auto& k : kraus_) out.noalias() += k * rho.matrix() * k.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator({dim_}, std::move(out));
}

KetEnsemble QuantumChannel::apply_on_mode(const KetEnsemble& state, int mode) const {
  std::vector<Vector> out;
  out.reserve(state.branches().size() * kraus_.size());
  for (const auto& k : kraus_) {
    for (const auto& b : state.branches()) {
      out.push_back(cvqec::apply_on_mode(k, mode, state.mode_dims(), b));
    }
  }
  return KetEnsemble(state.mode_dims(), std::move(out));
}

QuantumChannel QuantumChannel::then(const QuantumChannel& next) const {
  if (next.dim_ != dim_) throw InvalidDimension("cannot compose channels of different dims");
  std::vector<Matrix> kraus;
  kraus.reserve(kraus_.size() * next.kraus_.size());
  for (const auto& b : next.kraus_) {
    for (const auto& a : kraus_) kraus.push_back(b * a);
  }
  const ChannelKind kind = (kind_ == ChannelKind::TracePreserving &&
                            next.kind_ == ChannelKind::TracePreserving)
                               ? ChannelKind::TracePreserving
                               : ChannelKind::Heralded;
  return QuantumChannel(dim_, std::move(kraus), kind);
}

double QuantumChannel::mean_success() const { return kraus_sum().trace().real() / dim_; }

// --- loss ----------------------------------------------------------------------

Matrix loss_kraus(double eta, int k, int in_dim, int out_dim) {
  check_eta(eta);
  Matrix m = Matrix::Zero(out_dim, in_dim);
  for (int n = k; n < in_dim; ++n) {
    const int out = n - k;
    if (out >= out_dim) break;
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(out + 1.0);
    // pow handles 0^0 = 1 at eta in {0, 1}.
    const double amp = std::exp(0.5 * log_binom) * std::pow(1.0 - eta, 0.5 * k) *
                       std::pow(eta, 0.5 * out);
    m(out, n) = amp;
  }
  return m;
}

QuantumChannel loss_channel(double eta, int dim) {
  check_eta(eta);
  std::vector<Matrix> kraus;
  kraus.reserve(dim);
  for (int k = 0; k < dim; ++k) {
    if (k > 0 && eta == 1.0) break;
    kraus.push_back(loss_kraus(eta, k, dim, dim));
  }
  return QuantumChannel(dim, std::move(kraus), ChannelKind::TracePreserving);
}

KetEnsemble lossy_epr(double chi, double eta, int dim_a, int dim_b) {
  check_eta(eta);
  const FockKet epr = epr_ket(chi, dim_a, dim_a);
  std::vector<Vector> branches;
  for (int k = 0; k < dim_a; ++k) {
    Vector b = cvqec::apply_on_mode(loss_kraus(eta, k, dim_a, dim_b), 1, epr.mode_dims(),
                                    epr.amplitudes());
    if (b.squaredNorm() > 1e-18) branches.push_back(std::move(b));
  }
  return KetEnsemble({dim_a, dim_b}, std::move(branches));
}

// --- Choi / fitting --------------------------------------------------------------

DensityOperator choi_state(const QuantumChannel& channel) {
  Matrix j = channel.choi_matrix();
  j = 0.5 * (j + j.adjoint()).eval();
  return DensityOperator({channel.dim(), channel.dim()}, std::move(j));
}

double choi_fidelity(const QuantumChannel& a, const QuantumChannel& b) {
  if (a.dim() != b.dim()) throw InvalidDimension("choi_fidelity: channel dims differ");
  return fidelity_from_factors(normalized_choi_factor(a), normalized_choi_factor(b));
}

LossFit fit_loss(const QuantumChannel& channel, double tol) {
  if (channel.kind() == ChannelKind::TracePreserving) {
    const int d = channel.dim();
    const double dev = (channel.kraus_sum() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (dev > kKrausTol) throw ValidationError("non-trace-preserving channel is not flagged heralded");
  }
  const int dim = channel.dim();
  const Matrix target = normalized_choi_factor(channel);

  auto score = [&](double eta) {
    std::vector<Matrix> kraus;
    for (int k = 0; k < dim; ++k) {
      if (k > 0 && eta == 1.0) break;
      kraus.push_back(loss_kraus(eta, k, dim, dim));
    }
    // Pure-loss Kraus sets are trace preserving, so this factor is normalized.
    return fidelity_from_factors(target, choi_factor(kraus, dim));
  };

  // Coarse scan to bracket the global maximum, then golden-section refine.
  constexpr int kScan = 40;
  int best = 0;
  double best_score = -1.0;
  for (int i = 0; i <= kScan; ++i) {
    const double s = score(static_cast<double>(i) / kScan);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kScan);
  double hi = std::min(kScan, best + 1) / static_cast<double>(kScan);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = score(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = score(x1);
    }
  }
  double eta = 0.5 * (lo + hi);
  double f = score(eta);
  // Endpoints are not visited by the interior golden-section probes.
  for (double edge : {0.0, 1.0}) {
    const double fe = score(edge);
    if (fe > f) {
      f = fe;
      eta = edge;
    }
  }
  return {eta, std::max(0.0, 1.0 - f)};
}

Complex mean_field_slope(const QuantumChannel& channel, Complex alpha) {
  if (std::abs(alpha) == 0.0) throw InvalidParameter("mean_field_slope needs a non-zero probe");
  const DensityOperator in = DensityOperator::from_ket(coherent_ket(alpha, channel.dim()));
  const DensityOperator out = channel.apply(in);
  const Complex mean = expectation(annihilation_op(channel.dim()), out) / out.trace();
  return mean / alpha;
}

}  // namespace cvqec
