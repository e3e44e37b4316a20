#include <gtest/gtest.h>

#include "cvqec/errors.hpp"
#include "cvqec/nla.hpp"
#include "oracles.hpp"

using namespace cvqec;

namespace {

NlaConfig device(double gain, int paths, int dim) {
  NlaConfig c;
  c.gain = gain;
  c.paths = paths;
  c.dim = dim;
  return c;
}

}  // namespace

TEST(ScissorsUnit, MatchesAnalyticKraus) {
  for (double g : {1.0, 2.0, 3.0, 7.5}) {
    const QuantumChannel ch = scissors_unit(g, 5);
    ASSERT_EQ(ch.kraus().size(), 1u);
    EXPECT_LT((ch.kraus()[0] - oracle::scissors_kraus(g, 5)).cwiseAbs().maxCoeff(), 1e-12) << g;
    EXPECT_FALSE(ch.trace_preserving());
  }
}

TEST(ScissorsUnit, VacuumHeraldProbability) {
  const double g = 4.0;
  const auto out = scissors_nla(device(g, 1, 4), vacuum_ket(4));
  EXPECT_NEAR(out.p_success, 1.0 / (2.0 * (1.0 + g)), 1e-12);
  EXPECT_NEAR(std::abs(out.state.matrix()(0, 0)), 1.0, 1e-12);
}

TEST(ScissorsUnit, UnitGainPreservesRatio) {
  Vector v(4);
  v << 0.6, Complex(0.0, 0.8), 0.0, 0.0;
  const FockKet in({4}, v);
  const auto out = scissors_nla(device(1.0, 1, 4), in);
  const Matrix& r = out.state.matrix();
  EXPECT_NEAR(std::abs(r(1, 0) / r(0, 0)), 0.8 / 0.6, 1e-12);
  EXPECT_NEAR(out.state.trace(), 1.0, 1e-12);
}

TEST(ScissorsUnit, CutsTwoPhotonComponent) {
  const QuantumChannel ch = scissors_unit(3.0, 6);
  for (const auto& k : ch.kraus()) {
    for (int n = 2; n < 6; ++n) EXPECT_LT(k.col(n).norm(), 1e-12);
  }
}

TEST(ScissorsUnit, FeedForwardDoublesVacuumSuccess) {
  const QuantumChannel designated = scissors_unit(2.0, 4, false);
  const QuantumChannel both = scissors_unit(2.0, 4, true);
  EXPECT_EQ(both.kraus().size(), 2u);
  EXPECT_NEAR(both.kraus_sum()(0, 0).real(), 2.0 * designated.kraus_sum()(0, 0).real(), 1e-12);
  EXPECT_NEAR(both.kraus_sum()(1, 1).real(), 2.0 * designated.kraus_sum()(1, 1).real(), 1e-12);
}

TEST(ScissorsUnit, DegenerateAndInvalidGain) {
  EXPECT_THROW(scissors_unit(1e300, 4), DegenerateConfiguration);
  EXPECT_THROW(scissors_unit(0.5, 4), InvalidParameter);
}

TEST(ScissorsUnit, FailureBranchAccountsForRest) {
  for (double g : {1.0, 3.0}) {
    const FockKet in = coherent_ket(0.3, 6);
    const double p = scissors_nla(device(g, 1, 6), in).p_success;
    const FailureBranch f = scissors_unit_failure(g, in);
    EXPECT_NEAR(p + f.p_fail, 1.0, 1e-10);
    EXPECT_GE(f.vacuum_fraction, 0.0);
    EXPECT_LE(f.vacuum_fraction, 1.0 + 1e-12);
  }
}

TEST(ScissorsNla, SinglePathCoherentFidelityMatchesOracle) {
  const double g = 2.0;
  const int dim = 12;
  const FockKet in = coherent_ket(0.2, dim);
  const auto out = scissors_nla(device(g, 1, dim), in);
  const Vector expect = oracle::scissors_kraus(g, dim) * oracle::coherent(0.2, dim);
  const double f_ref = oracle::pure_fidelity(expect, oracle::coherent(std::sqrt(g) * 0.2, dim));
  const double f = fidelity(FockKet({dim}, oracle::coherent(std::sqrt(g) * 0.2, dim).normalized()), out.state);
  EXPECT_NEAR(f, f_ref, 1e-10);
  EXPECT_LT(f, 1.0);
  EXPECT_GT(f, 0.97);
}

TEST(ScissorsNla, UnitGainVacuumStaysVacuum) {
  const auto out = scissors_nla(device(1.0, 1, 3), vacuum_ket(3));
  EXPECT_NEAR(out.state.matrix()(0, 0).real(), 1.0, 1e-12);
}

TEST(ScissorsDevice, GainMatchesRequested) {
  for (int paths : {1, 2, 3}) {
    const ScissorsDevice d = scissors_device(device(3.0, paths, 4));
    EXPECT_NEAR(d.device_gain, 3.0, 1e-9) << "paths=" << paths;
  }
}

TEST(ScissorsDevice, TwoPathVacuumAmplitude) {
  const ScissorsDevice d = scissors_device(device(3.0, 2, 4));
  const Matrix& k = d.channel.kraus().front();
  EXPECT_NEAR(k(0, 0).real(), 0.125, 1e-12);
  EXPECT_NEAR(k(1, 1).real() / k(0, 0).real(), std::sqrt(3.0), 1e-12);
}

TEST(ScissorsDevice, TwoPhotonPenalty) {
  // N paths pass |2> with coefficient G (N-1)/N relative to vacuum.
  const double g = 2.5;
  for (int paths : {2, 3, 4}) {
    const ScissorsDevice d = scissors_device(device(g, paths, 4));
    const Matrix& k = d.channel.kraus().front();
    EXPECT_NEAR(std::abs(k(2, 2) / k(0, 0)), g * (paths - 1.0) / paths, 1e-9) << paths;
  }
}

TEST(ScissorsDevice, LowPhotonRatiosMatchIdealNla) {
  for (int paths : {1, 2}) {
    const double g = 4.0;
    const ScissorsDevice d = scissors_device(device(g, paths, 4));
    const Matrix& k = d.channel.kraus().front();
    const Matrix ideal = ideal_nla_operator(g, 4).matrix();
    EXPECT_NEAR(std::abs(k(1, 1) / k(0, 0)), std::abs(ideal(1, 1) / ideal(0, 0)), 1e-9);
    EXPECT_LT(std::abs(k(1, 0)), 1e-12);
    EXPECT_LT(std::abs(k(0, 1)), 1e-12);
  }
}

TEST(ScissorsDevice, MemoryBudgetIsEnforced) {
  NlaConfig c = device(2.0, 6, 20);
  c.memory_budget = 1000;
  EXPECT_THROW(scissors_device(c), ResourceError);
  EXPECT_THROW(scissors_nla(c, vacuum_ket(20)), ResourceError);
}

TEST(ScissorsDevice, TwoPathsTrackIdealOnWeakLossyEpr) {
  const KetEnsemble lossy = lossy_epr(0.33, 0.01, 10, 10);
  for (double g : {2.0, 10.0, 50.0}) {
    const auto lo = scissors_nla_on_mode(device(g, 2, 10), lossy, 1);
    const auto ideal = ideal_nla_on_mode(device(g, 1, 10), lossy, 1);
    EXPECT_GT(fidelity(lo.state, ideal.state), 0.995) << "G=" << g;
  }
}

TEST(Scaling, VacuumSinglePathIsFlat) {
  const ScalingReport r = lo_success_scaling({1.0, 2.0, 5.0, 10.0, 20.0}, 1, vacuum_ket(4));
  EXPECT_LT(r.xi_variation, 0.2);
  EXPECT_NEAR(r.xi_mean, 0.5, 1e-9);
}

TEST(Scaling, ReferenceScale) {
  EXPECT_NEAR(1.0 / std::pow(1.0 + 2.0, 2), 0.111, 1e-3);
  const ScalingReport r = lo_success_scaling({2.0}, 2, vacuum_ket(4), true);
  EXPECT_NEAR(r.p_success[0], 1.0 / 9.0, 1e-10);
  EXPECT_NEAR(r.xi[0], 1.0, 1e-9);
}

TEST(Scaling, ExtraPathCostsOneOverOnePlusGain) {
  const ScalingReport r = lo_success_scaling({1.5, 3.0, 8.0}, 2, vacuum_ket(4), true);
  for (double ratio : r.next_path_ratio) EXPECT_NEAR(ratio, 1.0, 1e-9);
  const ScalingReport weak = lo_success_scaling({1.5, 3.0, 8.0}, 2, coherent_ket(0.1, 6), true);
  for (double ratio : weak.next_path_ratio) EXPECT_NEAR(ratio, 1.0, 0.1);
}
