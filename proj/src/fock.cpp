#include "cvqec/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cvqec/errors.hpp"

namespace cvqec {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPositivityTol = 1e-9;
constexpr double kUnitaryTol = 1e-9;
constexpr double kLeakageTol = 1e-6;

void require_same_dims(const ModeDims& a, const ModeDims& b, const char* what) {
  if (a != b) {
    throw InvalidDimension(std::string(what) + ": mode dimensions differ");
  }
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Returns F with rho = F F^dag, keeping eigenvectors whose eigenvalue
// exceeds a small fraction of the largest one.
Matrix psd_factor(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.size() == 0) return Matrix(0, 0);
  if (ev.minCoeff() < -kPositivityTol) {
    std::ostringstream msg;
    msg << "density operator has negative eigenvalue " << ev.minCoeff();
    throw ValidationError(msg.str());
  }
  const double cut = std::max(ev.maxCoeff(), 0.0) * 1e-14;
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) keep.push_back(i);
  }
  Matrix f(rho.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    f.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
  }
  return f;
}

double trace_norm_squared(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double s = svd.singularValues().sum();
  return s * s;
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

int total_dim(const ModeDims& dims) {
  if (dims.empty()) throw InvalidDimension("mode_dims is empty");
  long long total = 1;
  for (int d : dims) {
    if (d < 1) throw InvalidDimension("mode cutoff must be positive");
    total *= d;
    if (total > (1LL << 30)) throw InvalidDimension("total dimension overflows");
  }
  return static_cast<int>(total);
}

int flat_index(const ModeDims& dims, std::span<const int> occupation) {
  if (occupation.size() != dims.size()) {
    throw InvalidDimension("occupation length does not match number of modes");
  }
  int index = 0;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] >= dims[m]) {
      throw InvalidDimension("occupation exceeds mode cutoff");
    }
    index = index * dims[m] + occupation[m];
  }
  return index;
}

// --- FockKet -----------------------------------------------------------------

FockKet::FockKet(ModeDims dims, Vector amps, bool heralded)
    : dims_(std::move(dims)), amps_(std::move(amps)), heralded_(heralded) {
  if (total_dim(dims_) != amps_.size()) {
    throw InvalidDimension("amplitude vector length does not match mode_dims");
  }
  if (!heralded_ && std::abs(amps_.norm() - 1.0) > 1e-9) {
    throw ValidationError("unheralded ket is not normalized");
  }
}

FockKet FockKet::basis(ModeDims dims, std::span<const int> occupation) {
  Vector amps = Vector::Zero(total_dim(dims));
  amps(flat_index(dims, occupation)) = 1.0;
  return FockKet(std::move(dims), std::move(amps));
}

FockKet FockKet::normalized() const {
  const double n = amps_.norm();
  if (n <= 0.0) throw ValidationError("cannot normalize a zero ket");
  Vector out = amps_ / n;
  // Re-normalize once more so |norm - 1| <= 1e-12 regardless of scale.
  out /= out.norm();
  return FockKet(dims_, std::move(out), false);
}

// --- DensityOperator -----------------------------------------------------------

DensityOperator::DensityOperator(ModeDims dims, Matrix matrix)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
  const int n = total_dim(dims_);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw InvalidDimension("density matrix side does not match mode_dims");
  }
  if (max_abs(matrix_ - matrix_.adjoint()) > kHermitianTol) {
    throw ValidationError("density matrix is not Hermitian");
  }
  const double tr = matrix_.trace().real();
  if (!(tr > 0.0) || tr > 1.0 + kTraceTol) {
    std::ostringstream msg;
    msg << "density matrix trace " << tr << " outside (0, 1]";
    throw ValidationError(msg.str());
  }
}

DensityOperator DensityOperator::from_ket(const FockKet& ket) {
  const Vector& v = ket.amplitudes();
  return DensityOperator(ket.mode_dims(), v * v.adjoint());
}

DensityOperator DensityOperator::normalized() const {
  return DensityOperator(dims_, matrix_ / trace());
}

void DensityOperator::validate() const { (void)psd_factor(matrix_); }

// --- FockOperator --------------------------------------------------------------

FockOperator::FockOperator(ModeDims dims, Matrix matrix, bool unitary)
    : dims_(std::move(dims)), matrix_(std::move(matrix)), unitary_(unitary) {
  const int n = total_dim(dims_);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw InvalidDimension("operator side does not match mode_dims");
  }
  if (unitary_) {
    const Matrix defect = matrix_.adjoint() * matrix_ - Matrix::Identity(n, n);
    if (max_abs(defect) > kUnitaryTol) {
      throw ValidationError("operator flagged unitary is not unitary on the retained space");
    }
  }
}

FockKet FockOperator::apply(const FockKet& ket) const {
  require_same_dims(dims_, ket.mode_dims(), "FockOperator::apply");
  Vector out = matrix_ * ket.amplitudes();
  const bool heralded = !unitary_ || ket.heralded();
  return FockKet(dims_, std::move(out), heralded);
}

DensityOperator FockOperator::apply(const DensityOperator& rho) const {
  require_same_dims(dims_, rho.mode_dims(), "FockOperator::apply");
  return DensityOperator(dims_, matrix_ * rho.matrix() * matrix_.adjoint());
}

FockOperator FockOperator::operator*(const FockOperator& rhs) const {
  require_same_dims(dims_, rhs.dims_, "FockOperator::operator*");
  return FockOperator(dims_, matrix_ * rhs.matrix_, unitary_ && rhs.unitary_);
}

// --- KetEnsemble -----------------------------------------------------------------

KetEnsemble::KetEnsemble(ModeDims dims, std::vector<Vector> branches)
    : dims_(std::move(dims)), branches_(std::move(branches)) {
  const int n = total_dim(dims_);
  for (const auto& b : branches_) {
    if (b.size() != n) throw InvalidDimension("ensemble branch length does not match mode_dims");
  }
}

KetEnsemble KetEnsemble::from_ket(const FockKet& ket) {
  return KetEnsemble(ket.mode_dims(), {ket.amplitudes()});
}

KetEnsemble KetEnsemble::from_density(const DensityOperator& rho, double threshold) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = ev.maxCoeff() * threshold;
  std::vector<Vector> branches;
  // Largest eigenvalues first.
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
    if (ev(i) <= cut) break;
    branches.emplace_back(es.eigenvectors().col(i) * std::sqrt(ev(i)));
  }
  return KetEnsemble(rho.mode_dims(), std::move(branches));
}

double KetEnsemble::trace() const {
  double t = 0.0;
  for (const auto& b : branches_) t += b.squaredNorm();
  return t;
}

DensityOperator KetEnsemble::to_density() const {
  const int n = total_dim(dims_);
  Matrix m = Matrix::Zero(n, n);
  for (const auto& b : branches_) m.noalias() += b * b.adjoint();
  return DensityOperator(dims_, m);
}

KetEnsemble KetEnsemble::scaled(double factor) const {
  std::vector<Vector> out;
  out.reserve(branches_.size());
  const double s = std::sqrt(factor);
  for (const auto& b : branches_) out.emplace_back(b * s);
  return KetEnsemble(dims_, std::move(out));
}

// --- single-mode operators -------------------------------------------------------

FockOperator annihilation_op(int dim) {
  if (dim < 2) throw InvalidDimension("annihilation_op needs dim >= 2");
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return FockOperator({dim}, std::move(a));
}

FockOperator creation_op(int dim) {
  const FockOperator a = annihilation_op(dim);
  return FockOperator({dim}, a.matrix().adjoint());
}

FockOperator number_op(int dim) {
  if (dim < 1) throw InvalidDimension("number_op needs dim >= 1");
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return FockOperator({dim}, std::move(n));
}

double coherent_leakage(Complex alpha, int dim) {
  const double mean = std::norm(alpha);
  if (mean == 0.0) return 0.0;
  // Sum the retained Poisson weights in log space, then take the complement.
  double kept = 0.0;
  for (int n = 0; n < dim; ++n) {
    kept += std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
  }
  if (kept < 0.5) return 1.0 - kept;
  // Tail directly when it is small, avoiding cancellation in 1 - kept.
  double tail = 0.0;
  for (int n = dim; n < dim + 400; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < 1e-300) break;
  }
  return tail;
}

FockOperator displacement_op(Complex alpha, int dim) {
  if (dim < 2) throw InvalidDimension("displacement_op needs dim >= 2");
  const double leak = coherent_leakage(alpha, dim);
  if (std::norm(alpha) > dim / 4.0 || leak > kLeakageTol) {
    std::ostringstream msg;
    msg << "displacement |alpha|^2=" << std::norm(alpha) << " too large for cutoff " << dim
        << " (estimated leakage " << leak << ")";
    throw TruncationLeakage(msg.str(), leak);
  }
  const Matrix a = annihilation_op(dim).matrix();
  const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return FockOperator({dim}, gen.exp(), true);
}

Matrix displacement_elements(Complex beta, int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidDimension("displacement_elements needs positive size");
  Matrix d = Matrix::Zero(rows, cols);
  const double x = std::norm(beta);
  if (x == 0.0) {
    for (int k = 0; k < std::min(rows, cols); ++k) d(k, k) = 1.0;
    return d;
  }
  const double r = std::sqrt(x);
  const double phase = std::arg(beta);
  const double log_r = std::log(r);
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < cols; ++n) {
      const int lo = std::min(m, n);
      const int k = std::abs(m - n);
      const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k), x);
      if (lag == 0.0) continue;
      const double log_mag =
          0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) + k * log_r - 0.5 * x;
      const double mag = std::exp(log_mag) * lag;
      // beta^k above the diagonal's lower side, (-beta*)^k on the other.
      const double ph = (m >= n) ? k * phase : k * (M_PI - phase);
      d(m, n) = std::polar(mag, ph);
    }
  }
  return d;
}

FockOperator beamsplitter_op(double transmissivity, int dim_a, int dim_b) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw InvalidParameter("beamsplitter transmissivity must lie in [0, 1]");
  }
  if (dim_a < 1 || dim_b < 1) throw InvalidDimension("beamsplitter dims must be positive");
  const int n = dim_a * dim_b;
  if (transmissivity == 1.0 || n == 1) {
    return FockOperator({dim_a, dim_b}, Matrix::Identity(n, n), true);
  }
  const double theta = std::acos(std::sqrt(transmissivity));
  auto lowering = [](int dim) {
    Matrix a = Matrix::Zero(dim, dim);
    for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
  };
  const Matrix a = Eigen::kroneckerProduct(lowering(dim_a), Matrix::Identity(dim_b, dim_b)).eval();
  const Matrix b = Eigen::kroneckerProduct(Matrix::Identity(dim_a, dim_a), lowering(dim_b)).eval();
  const Matrix gen = theta * (a.adjoint() * b - a * b.adjoint());
  return FockOperator({dim_a, dim_b}, gen.exp(), true);
}

// --- composition -----------------------------------------------------------------

namespace {
ModeDims concat(const ModeDims& x, const ModeDims& y) {
  ModeDims out = x;
  out.insert(out.end(), y.begin(), y.end());
  return out;
}
}  // namespace

FockKet tensor(const FockKet& x, const FockKet& y) {
  const Vector& u = x.amplitudes();
  const Vector& v = y.amplitudes();
  Vector out(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out.segment(i * v.size(), v.size()) = u(i) * v;
  return FockKet(concat(x.mode_dims(), y.mode_dims()), std::move(out),
                 x.heralded() || y.heralded());
}

DensityOperator tensor(const DensityOperator& x, const DensityOperator& y) {
  Matrix m = Eigen::kroneckerProduct(x.matrix(), y.matrix()).eval();
  return DensityOperator(concat(x.mode_dims(), y.mode_dims()), std::move(m));
}

FockOperator tensor(const FockOperator& x, const FockOperator& y) {
  Matrix m = Eigen::kroneckerProduct(x.matrix(), y.matrix()).eval();
  return FockOperator(concat(x.mode_dims(), y.mode_dims()), std::move(m),
                      x.unitary() && y.unitary());
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> keep) {
  const ModeDims& dims = rho.mode_dims();
  const int modes = static_cast<int>(dims.size());
  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    if (k < 0 || k >= modes) throw InvalidDimension("partial_trace: mode index out of range");
    if (kept[k]) throw InvalidDimension("partial_trace: duplicate mode index");
    kept[k] = true;
  }
  if (keep.empty()) throw InvalidDimension("partial_trace: must keep at least one mode");

  // Strides of each mode in the full row-major index.
  std::vector<int> stride(dims.size());
  int s = 1;
  for (int m = modes - 1; m >= 0; --m) {
    stride[m] = s;
    s *= dims[m];
  }
  ModeDims kept_dims, traced_dims;
  std::vector<int> kept_stride, traced_stride;
  for (int m = 0; m < modes; ++m) {
    if (kept[m]) {
      kept_dims.push_back(dims[m]);
      kept_stride.push_back(stride[m]);
    } else {
      traced_dims.push_back(dims[m]);
      traced_stride.push_back(stride[m]);
    }
  }
  auto offsets = [](const ModeDims& ds, const std::vector<int>& st) {
    int count = 1;
    for (int d : ds) count *= d;
    std::vector<int> out(count, 0);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx, off = 0;
      for (int j = static_cast<int>(ds.size()) - 1; j >= 0; --j) {
        off += (rem % ds[j]) * st[j];
        rem /= ds[j];
      }
      out[idx] = off;
    }
    return out;
  };
  const std::vector<int> ko = offsets(kept_dims, kept_stride);
  const std::vector<int> to = traced_dims.empty() ? std::vector<int>{0} : offsets(traced_dims, traced_stride);

  // Keep order follows ascending mode index regardless of `keep` order.
  const int nk = static_cast<int>(ko.size());
  const Matrix& full = rho.matrix();
  Matrix out = Matrix::Zero(nk, nk);
  for (int t : to) {
    for (int j = 0; j < nk; ++j) {
      for (int i = 0; i < nk; ++i) out(i, j) += full(ko[i] + t, ko[j] + t);
    }
  }
  // Symmetrize away rounding so the Hermiticity check is exact.
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator(kept_dims, std::move(out));
}

Vector apply_on_mode(const Matrix& op, int mode, const ModeDims& dims, const Vector& amps) {
  if (mode < 0 || mode >= static_cast<int>(dims.size())) {
    throw InvalidDimension("apply_on_mode: mode index out of range");
  }
  if (op.cols() != dims[mode]) throw InvalidDimension("apply_on_mode: operator/mode size mismatch");
  int pre = 1, post = 1;
  for (int m = 0; m < mode; ++m) pre *= dims[m];
  for (int m = mode + 1; m < static_cast<int>(dims.size()); ++m) post *= dims[m];
  const int din = dims[mode];
  const int dout = static_cast<int>(op.rows());
  Vector out = Vector::Zero(static_cast<Eigen::Index>(pre) * dout * post);
  for (int p = 0; p < pre; ++p) {
    // Slice (din x post) viewed as a column-major map of the row-major block.
    Eigen::Map<const Matrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> in(
        amps.data() + static_cast<Eigen::Index>(p) * din * post, din, post,
        Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(1, post));
    Eigen::Map<Matrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> dst(
        out.data() + static_cast<Eigen::Index>(p) * dout * post, dout, post,
        Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(1, post));
    dst.noalias() = op * in;
  }
  return out;
}

Vector apply_on_modes(const Matrix& op, int mode_a, int mode_b, const ModeDims& dims,
                      const Vector& amps) {
  const int modes = static_cast<int>(dims.size());
  if (mode_a < 0 || mode_a >= modes || mode_b < 0 || mode_b >= modes || mode_a == mode_b) {
    throw InvalidDimension("apply_on_modes: bad mode pair");
  }
  const int da = dims[mode_a], db = dims[mode_b];
  if (op.rows() != da * db || op.cols() != da * db) {
    throw InvalidDimension("apply_on_modes: operator/mode size mismatch");
  }
  std::vector<int> stride(dims.size());
  int s = 1;
  for (int m = modes - 1; m >= 0; --m) {
    stride[m] = s;
    s *= dims[m];
  }
  // Base offsets of every configuration of the remaining modes.
  std::vector<int> bases{0};
  for (int m = 0; m < modes; ++m) {
    if (m == mode_a || m == mode_b) continue;
    std::vector<int> next;
    next.reserve(bases.size() * dims[m]);
    for (int b : bases) {
      for (int k = 0; k < dims[m]; ++k) next.push_back(b + k * stride[m]);
    }
    bases = std::move(next);
  }
  std::vector<int> local(static_cast<std::size_t>(da) * db);
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < db; ++j) local[i * db + j] = i * stride[mode_a] + j * stride[mode_b];
  }
  Vector out = Vector::Zero(amps.size());
  Vector chunk(da * db);
  for (int base : bases) {
    for (int q = 0; q < da * db; ++q) chunk(q) = amps(base + local[q]);
    const Vector res = op * chunk;
    for (int q = 0; q < da * db; ++q) out(base + local[q]) = res(q);
  }
  return out;
}

FockKet apply_on_mode(const Matrix& op, int mode, const FockKet& ket) {
  ModeDims out_dims = ket.mode_dims();
  Vector out = apply_on_mode(op, mode, out_dims, ket.amplitudes());
  out_dims[mode] = static_cast<int>(op.rows());
  return FockKet(std::move(out_dims), std::move(out), true);
}

KetEnsemble apply_on_mode(const Matrix& op, int mode, const KetEnsemble& state) {
  ModeDims out_dims = state.mode_dims();
  std::vector<Vector> out;
  out.reserve(state.branches().size());
  for (const auto& b : state.branches()) out.push_back(apply_on_mode(op, mode, out_dims, b));
  out_dims[mode] = static_cast<int>(op.rows());
  return KetEnsemble(std::move(out_dims), std::move(out));
}

// --- metrics ---------------------------------------------------------------------

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  require_same_dims(rho.mode_dims(), sigma.mode_dims(), "fidelity");
  const Matrix f = psd_factor(rho.matrix());
  const Matrix g = psd_factor(sigma.matrix());
  return clamp_unit(trace_norm_squared(g.adjoint() * f));
}

double fidelity(const FockKet& psi, const FockKet& phi) {
  require_same_dims(psi.mode_dims(), phi.mode_dims(), "fidelity");
  return clamp_unit(std::norm(psi.amplitudes().dot(phi.amplitudes())));
}

double fidelity(const FockKet& psi, const DensityOperator& rho) {
  require_same_dims(psi.mode_dims(), rho.mode_dims(), "fidelity");
  rho.validate();
  const Vector& v = psi.amplitudes();
  return clamp_unit(v.dot(rho.matrix() * v).real());
}

double fidelity(const KetEnsemble& x, const KetEnsemble& y) {
  require_same_dims(x.mode_dims(), y.mode_dims(), "fidelity");
  auto stack = [](const KetEnsemble& e) {
    const auto& b = e.branches();
    Matrix f(total_dim(e.mode_dims()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t k = 0; k < b.size(); ++k) f.col(static_cast<Eigen::Index>(k)) = b[k];
    const double tr = f.squaredNorm();
    if (!(tr > 0.0)) throw ValidationError("fidelity: ensemble has zero trace");
    return Matrix(f / std::sqrt(tr));
  };
  return clamp_unit(trace_norm_squared(stack(y).adjoint() * stack(x)));
}

Complex expectation(const FockOperator& op, const DensityOperator& rho) {
  require_same_dims(op.mode_dims(), rho.mode_dims(), "expectation");
  return (op.matrix() * rho.matrix()).trace();
}

}  // namespace cvqec
