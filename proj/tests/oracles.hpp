#pragma once

// Independent reference constructions used only by the tests. Nothing here
// calls into the library: ladder operators, exponentials and channel
// dilations are rebuilt from their textbook definitions.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix lowering(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

// exp(m) by scaling and squaring around a plain Taylor series.
inline Matrix taylor_exp(const Matrix& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Matrix scaled = m / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// exp[theta (a^dag b - a b^dag)], cos(theta) = sqrt(t), by brute-force exponentiation.
inline Matrix beamsplitter(double t, int da, int db) {
  const double theta = std::acos(std::sqrt(t));
  const Matrix a = kron(lowering(da), Matrix::Identity(db, db));
  const Matrix b = kron(Matrix::Identity(da, da), lowering(db));
  return taylor_exp(theta * (a.adjoint() * b - a * b.adjoint()));
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

inline Vector coherent(Complex alpha, int dim) {
  Vector v(dim);
  Complex power = 1.0;
  double factorial = 1.0;
  for (int n = 0; n < dim; ++n) {
    if (n > 0) {
      power *= alpha;
      factorial *= n;
    }
    v(n) = std::exp(-0.5 * std::norm(alpha)) * power / std::sqrt(factorial);
  }
  return v;
}

inline double coherent_overlap(Complex a, Complex b) { return std::exp(-std::norm(a - b)); }

inline double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// Thermal weights (1 - chi^2) chi^(2n).
inline std::vector<double> thermal(double chi, int dim) {
  std::vector<double> p(dim);
  for (int n = 0; n < dim; ++n) p[n] = (1.0 - chi * chi) * std::pow(chi, 2 * n);
  return p;
}

// Unit-trace Choi matrix (output first, reference second) of pure loss,
// built by mixing the signal with a vacuum environment on a beamsplitter of
// transmissivity eta and tracing the environment out.
inline Matrix loss_choi_by_dilation(double eta, int dim) {
  const Matrix u = beamsplitter(eta, dim, dim);  // modes (signal, environment)
  const Eigen::Index d = dim;
  // Column n of u restricted to environment vacuum input: u |n, 0>.
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (int e = 0; e < dim; ++e) {
    // Branch with e photons left in the environment.
    Vector branch = Vector::Zero(d * d);
    for (int n = 0; n < dim; ++n) {
      const Vector out = u.col(n * d + 0);
      for (int s = 0; s < dim; ++s) branch(s * d + n) += out(s * d + e);
    }
    choi += branch * branch.adjoint();
  }
  return choi / static_cast<double>(dim);
}

// Scissors unit Kraus map on the heralded pattern with positive gain,
// phase fixed so that <0|K|0> > 0: diag(sqrt(1-t), sqrt(t)) / sqrt(2) on the
// one-photon subspace, zero above it.
inline Matrix scissors_kraus(double gain, int dim) {
  const double t = gain / (1.0 + gain);
  Matrix k = Matrix::Zero(dim, dim);
  k(0, 0) = std::sqrt((1.0 - t) / 2.0);
  k(1, 1) = std::sqrt(t / 2.0);
  return k;
}

inline double pure_fidelity(const Vector& x, const Vector& y) {
  return std::norm(x.normalized().dot(y.normalized()));
}

}  // namespace oracle
