#include <gtest/gtest.h>

#include <random>

#include "cvqec/errors.hpp"
#include "cvqec/fock.hpp"
#include "cvqec/states.hpp"
#include "oracles.hpp"

using namespace cvqec;

namespace {

Vector random_ket(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(n(rng), n(rng));
  return v.normalized();
}

}  // namespace

TEST(Ladder, AnnihilationElements) {
  const Matrix a = annihilation_op(3).matrix();
  EXPECT_DOUBLE_EQ(a(0, 1).real(), 1.0);
  EXPECT_DOUBLE_EQ(a(1, 2).real(), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(a.cwiseAbs().sum(), 1.0 + std::sqrt(2.0));
  EXPECT_FALSE(annihilation_op(3).unitary());
}

TEST(Ladder, VacuumIsAnnihilated) {
  const FockKet out = annihilation_op(2).apply(vacuum_ket(2));
  EXPECT_TRUE(out.heralded());
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Ladder, NumberOperatorDiagonal) {
  const Matrix n = creation_op(8).matrix() * annihilation_op(8).matrix();
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(n(k, k).real(), k, 1e-14);
  EXPECT_NEAR((n - number_op(8).matrix()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Ladder, RejectsTinyCutoff) {
  EXPECT_THROW(annihilation_op(1), InvalidDimension);
  EXPECT_THROW(creation_op(0), InvalidDimension);
}

TEST(Displacement, ZeroIsIdentity) {
  const Matrix d = displacement_op(0.0, 6).matrix();
  EXPECT_LT((d - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Displacement, VacuumColumnMatchesCoherentExpansion) {
  const Matrix d = displacement_op(0.5, 20).matrix();
  const Vector ref = oracle::coherent(0.5, 20);
  EXPECT_LT((d.col(0) - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Displacement, InverseComposesToIdentity) {
  const Matrix p = displacement_op(0.5, 20).matrix() * displacement_op(-0.5, 20).matrix();
  EXPECT_LT((p - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Displacement, GuardReportsLeakage) {
  try {
    displacement_op(Complex(2.0, 1.0), 12);
    FAIL() << "expected TruncationLeakage";
  } catch (const TruncationLeakage& e) {
    EXPECT_GT(e.leakage(), 1e-6);
  }
}

TEST(Displacement, ClosedFormElementsMatchExponential) {
  const Complex beta(0.4, -0.3);
  const Matrix exact = displacement_elements(beta, 10, 10);
  const Matrix expm = oracle::taylor_exp(beta * oracle::lowering(30).adjoint() -
                                         std::conj(beta) * oracle::lowering(30));
  EXPECT_LT((exact - expm.topLeftCorner(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Beamsplitter, FullTransmissionIsIdentity) {
  const Matrix u = beamsplitter_op(1.0, 4, 4).matrix();
  EXPECT_LT((u - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Beamsplitter, SinglePhotonSplitsWithPinnedSign) {
  const ModeDims dims{3, 3};
  const int in[2] = {1, 0};
  const Vector out = beamsplitter_op(0.5, 3, 3).apply(FockKet::basis(dims, in)).amplitudes();
  const int a[2] = {1, 0}, b[2] = {0, 1};
  EXPECT_NEAR(out(flat_index(dims, a)).real(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(out(flat_index(dims, b)).real(), -std::sqrt(0.5), 1e-12);
}

TEST(Beamsplitter, HongOuMandelMatchesBruteForce) {
  const ModeDims dims{3, 3};
  const int in[2] = {1, 1};
  const Vector out = beamsplitter_op(0.5, 3, 3).apply(FockKet::basis(dims, in)).amplitudes();
  const Vector ref = oracle::beamsplitter(0.5, 3, 3).col(flat_index(dims, in));
  EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-10);
  const int both[2] = {1, 1}, left[2] = {2, 0}, right[2] = {0, 2};
  EXPECT_LT(std::abs(out(flat_index(dims, both))), 1e-12);
  EXPECT_NEAR(std::abs(out(flat_index(dims, left))), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR((out(flat_index(dims, left)) + out(flat_index(dims, right))).real(), 0.0, 1e-12);
}

TEST(Beamsplitter, AgreesWithExponentialAcrossTransmissivities) {
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.9}) {
    const Matrix u = beamsplitter_op(t, 5, 5).matrix();
    const Matrix ref = oracle::beamsplitter(t, 5, 5);
    // Exact on total photon number below the cutoff.
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5 - i; ++j) {
        const int col = i * 5 + j;
        EXPECT_LT((u.col(col) - ref.col(col)).cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
      }
    }
  }
}

TEST(Beamsplitter, ConservesPhotonNumber) {
  const int d = 5;
  const Matrix u = beamsplitter_op(0.3, d, d).matrix();
  for (int r = 0; r < d * d; ++r) {
    for (int c = 0; c < d * d; ++c) {
      if (r / d + r % d != c / d + c % d) {
        EXPECT_LT(std::abs(u(r, c)), 1e-12);
      }
    }
  }
}

TEST(Beamsplitter, RejectsBadTransmissivity) {
  EXPECT_THROW(beamsplitter_op(1.5, 3, 3), InvalidParameter);
}

TEST(PartialTrace, ProductKeepsSecondFactor) {
  const DensityOperator rho = DensityOperator::from_ket(tensor(vacuum_ket(3), single_photon_ket(3)));
  const int keep[1] = {1};
  const Matrix r = partial_trace(rho, keep).matrix();
  Matrix ref = Matrix::Zero(3, 3);
  ref(1, 1) = 1.0;
  EXPECT_LT((r - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, EprArmIsThermal) {
  const DensityOperator rho = DensityOperator::from_ket(epr_ket(0.5, 30, 30));
  const auto th = oracle::thermal(0.5, 30);
  for (int keep_mode : {0, 1}) {
    const int keep[1] = {keep_mode};
    const Matrix r = partial_trace(rho, keep).matrix();
    for (int n = 0; n < 30; ++n) EXPECT_NEAR(r(n, n).real(), th[n], 1e-12);
    EXPECT_LT((r - Matrix(r.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PartialTrace, RoundTripRecoversFactors) {
  std::mt19937_64 rng(7);
  const FockKet x({3}, random_ket(3, rng));
  const FockKet y({4}, random_ket(4, rng));
  const DensityOperator rx = DensityOperator::from_ket(x), ry = DensityOperator::from_ket(y);
  const DensityOperator joint = tensor(rx, ry);
  const int first[1] = {0}, second[1] = {1};
  EXPECT_LT((partial_trace(joint, first).matrix() - rx.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(joint, second).matrix() - ry.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, PreservesTraceAndHermiticity) {
  std::mt19937_64 rng(11);
  const ModeDims dims{2, 3, 4};
  const DensityOperator rho = DensityOperator::from_ket(FockKet(dims, random_ket(24, rng)));
  const int keep[2] = {0, 2};
  const Matrix r = partial_trace(rho, keep).matrix();
  EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
  EXPECT_LT((r - r.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, RejectsBadMode) {
  const DensityOperator rho = DensityOperator::from_ket(tensor(vacuum_ket(2), vacuum_ket(2)));
  const int keep[1] = {2};
  EXPECT_THROW(partial_trace(rho, keep), InvalidDimension);
}

TEST(Fidelity, SelfAndOrthogonal) {
  const DensityOperator rho = DensityOperator::from_ket(coherent_ket(0.7, 16));
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(vacuum_ket(4), single_photon_ket(4)), 0.0, 1e-15);
}

TEST(Fidelity, CoherentOverlap) {
  const double f = fidelity(coherent_ket(0.3, 16), coherent_ket(0.4, 16));
  EXPECT_NEAR(f, oracle::coherent_overlap(0.3, 0.4), 1e-6);
  const DensityOperator a = DensityOperator::from_ket(coherent_ket(0.3, 16));
  const DensityOperator b = DensityOperator::from_ket(coherent_ket(0.4, 16));
  EXPECT_NEAR(fidelity(a, b), oracle::coherent_overlap(0.3, 0.4), 1e-6);
}

TEST(Fidelity, MixedStatesAgreeWithSqrtFormula) {
  // Commuting states: F = (sum_n sqrt(p_n q_n))^2.
  const auto p = oracle::thermal(0.4, 12), q = oracle::thermal(0.6, 12);
  Matrix a = Matrix::Zero(12, 12), b = Matrix::Zero(12, 12);
  double s = 0.0, tp = 0.0, tq = 0.0;
  for (int n = 0; n < 12; ++n) {
    tp += p[n];
    tq += q[n];
  }
  for (int n = 0; n < 12; ++n) {
    a(n, n) = p[n] / tp;
    b(n, n) = q[n] / tq;
    s += std::sqrt(p[n] * q[n] / (tp * tq));
  }
  EXPECT_NEAR(fidelity(DensityOperator({12}, a), DensityOperator({12}, b)), s * s, 1e-10);
}

TEST(Fidelity, RejectsNonPositiveInput) {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  const DensityOperator rho({2}, bad);
  EXPECT_THROW(rho.validate(), ValidationError);
  EXPECT_THROW(fidelity(rho, rho), ValidationError);
}

TEST(Containers, KetNormalizationRules) {
  Vector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(FockKet({2}, v), ValidationError);
  const FockKet h({2}, v, true);
  EXPECT_NEAR(h.normalized().norm(), 1.0, 1e-12);
  EXPECT_THROW(FockKet({3}, v, true), InvalidDimension);
  EXPECT_THROW(FockKet({2}, Vector::Zero(2), true).normalized(), ValidationError);
}

TEST(Containers, DensityChecks) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 0.5;
  m(0, 0) = 1.0;
  EXPECT_THROW(DensityOperator({2}, m), ValidationError);
  EXPECT_THROW(DensityOperator({2}, 2.0 * Matrix::Identity(2, 2)), ValidationError);
  EXPECT_THROW(DensityOperator({2}, Matrix::Zero(2, 2)), ValidationError);
}

TEST(Containers, UnitaryFlagIsChecked) {
  EXPECT_THROW(FockOperator({2}, annihilation_op(2).matrix(), true), ValidationError);
}

TEST(Containers, EnsembleRoundTrip) {
  const KetEnsemble e = lossy_epr(0.5, 0.6, 8, 8);
  const KetEnsemble back = KetEnsemble::from_density(e.to_density());
  EXPECT_NEAR(back.trace(), e.trace(), 1e-12);
  EXPECT_NEAR(fidelity(e, back), 1.0, 1e-10);
  EXPECT_NEAR(e.scaled(0.5).trace(), 0.5 * e.trace(), 1e-14);
}

TEST(Invariants, UnitaryApplicationPreservesTrace) {
  std::mt19937_64 rng(3);
  const ModeDims dims{4, 4};
  const DensityOperator rho = DensityOperator::from_ket(FockKet(dims, random_ket(16, rng)));
  const DensityOperator out = beamsplitter_op(0.3, 4, 4).apply(rho);
  EXPECT_NEAR(out.trace(), 1.0, 1e-10);
}

TEST(Invariants, ApplyOnModeMatchesKronecker) {
  std::mt19937_64 rng(5);
  const ModeDims dims{3, 4, 2};
  const Vector v = random_ket(24, rng);
  const Matrix a = annihilation_op(4).matrix();
  const Matrix full = oracle::kron(oracle::kron(Matrix::Identity(3, 3), a), Matrix::Identity(2, 2));
  EXPECT_LT((apply_on_mode(a, 1, dims, v) - full * v).cwiseAbs().maxCoeff(), 1e-14);
}
