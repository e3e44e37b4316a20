#include <gtest/gtest.h>

#include <random>

#include "cvqec/errors.hpp"
#include "cvqec/protocol.hpp"

using namespace cvqec;

TEST(CorrectedTransmission, Examples) {
  EXPECT_NEAR(corrected_transmission(4.0, 0.7, 0.5).value, 0.7, 1e-15);
  EXPECT_NEAR(corrected_transmission(5.0, 0.5, 0.5).value, 0.625, 1e-15);
  const auto unit = corrected_transmission(1.0, 0.6, 0.4);
  EXPECT_LE(unit.value, 0.6);
  EXPECT_FALSE(unit.clamped);
}

TEST(CorrectedTransmission, ClampIsFlagged) {
  const auto c = corrected_transmission(5.0, 0.9, 0.5);
  EXPECT_TRUE(c.clamped);
  EXPECT_DOUBLE_EQ(c.value, 1.0);
  EXPECT_NEAR(c.raw, 1.125, 1e-15);
}

TEST(MaxGain, Examples) {
  EXPECT_NEAR(max_gain(0.5, 0.5), 7.0, 1e-12);
  EXPECT_NEAR(best_transmission(0.5, 0.5), 0.875, 1e-15);
  EXPECT_NEAR(best_transmission(0.5, 1e-4), 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(best_transmission(1.0, 0.7), 1.0);
  EXPECT_TRUE(std::isinf(max_gain(0.5, 0.0)));
}

TEST(MaxGain, ReachesBestTransmission) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 200; ++i) {
    const double eta = u(rng), chi = u(rng);
    EXPECT_NEAR(corrected_transmission(max_gain(eta, chi), eta, chi).raw, best_transmission(eta, chi), 1e-12);
  }
}

TEST(Fig2, WindowForHighTransmission) {
  const GainWindow w = fig2_window(0.9, 0.5);
  EXPECT_NEAR(w.lo, 4.0, 1e-12);
  EXPECT_NEAR(w.hi, (1.0 - 0.1 * 0.25) / (0.9 * 0.25), 1e-12);
  EXPECT_THROW(fig2_curve(0.9, 0.5, {3.0}), DomainError);
  EXPECT_THROW(fig2_curve(0.9, 0.5, {5.0}), DomainError);
  EXPECT_THROW(fig2_window(0.9, 0.0), DomainError);
}

TEST(Fig2, EndpointsAndMonotonicity) {
  const double eta = 0.9, chi = 0.5;
  const GainWindow w = fig2_window(eta, chi);
  const auto pts = fig2_curve(eta, chi, gain_sweep(w.lo, w.hi, 40));
  ASSERT_EQ(pts.size(), 40u);
  EXPECT_NEAR(pts.front().eta_ec, 0.9, 1e-12);
  EXPECT_NEAR(pts.back().eta_ec, best_transmission(eta, chi), 1e-12);
  EXPECT_NEAR(pts.back().p_success, 0.0, 1e-12);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GT(pts[i].eta_ec, pts[i - 1].eta_ec);
    EXPECT_LT(pts[i].p_success, pts[i - 1].p_success);
    if (i + 1 < pts.size()) {
      EXPECT_GT(pts[i].p_success, 0.0);
    }
    EXPECT_DOUBLE_EQ(pts[i].fidelity, 1.0);
  }
}

TEST(Fig2, SweepPinsEndpoints) {
  for (SweepScale s : {SweepScale::Linear, SweepScale::Log}) {
    const auto g = gain_sweep(2.0, 9.0, 7, s);
    ASSERT_EQ(g.size(), 7u);
    EXPECT_EQ(g.front(), 2.0);
    EXPECT_EQ(g.back(), 9.0);
  }
  EXPECT_EQ(gain_sweep(3.0, 3.0, 1).size(), 1u);
}

TEST(Fig3, GainHelpers) {
  EXPECT_NEAR(fig3_gain_ceiling(0.01, 0.82, 0.1, 100.0), 0.1 / (0.01 * 0.82 * 0.82), 1e-9);
  EXPECT_NEAR(fig3_gain_ceiling(0.01, 0.33, 0.1, 100.0), 0.1 / (0.01 * 0.33 * 0.33), 1e-9);
  EXPECT_DOUBLE_EQ(fig3_gain_ceiling(0.01, 0.1, 0.1, 100.0), 100.0);
  const double g = gain_for_chi_eff(0.5, 0.3, 0.7);
  EXPECT_NEAR(effective_epr_params(0.3, 0.5, g).chi_eff, 0.7, 1e-12);
}

TEST(Fig3, SmallSweepTracksIdealModel) {
  const double eta = 0.01, chi = 0.33;
  const std::vector<double> gains{1.0, 10.0};
  const auto pts = fig3_curve(eta, chi, gains);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[0].eta_ec, eta * chi * chi, 0.02 * eta * chi * chi);
  for (const auto& p : pts) {
    EXPECT_GT(p.fidelity, 0.995) << "G=" << p.gain;
    EXPECT_GT(p.p_success, 0.0);
    EXPECT_LE(p.p_success, 1.0);
    EXPECT_LE(p.eta_ec, corrected_transmission(p.gain, eta, chi).value * 1.02);
  }
  EXPECT_GT(pts[1].eta_ec, pts[0].eta_ec);
  EXPECT_LT(pts[1].p_success, pts[0].p_success);
}

TEST(Fig3, UnitGainSuccessIsHeraldBaseline) {
  // At G = 1 each unit heralds vacuum with probability 1/4, so two units give 1/16
  // on the vacuum component and the same on the one-photon component.
  const auto pts = fig3_curve(0.01, 0.33, {1.0});
  EXPECT_NEAR(pts[0].p_success, 1.0 / 16.0, 1e-3);
}

TEST(EndToEnd, HeadlineExample) {
  ProtocolConfig c;  // eta 0.5, chi 0.5, G 5
  const EndToEndReport r = end_to_end_verify(c);
  EXPECT_NEAR(r.eta_predicted, 0.625, 1e-15);
  EXPECT_LE(r.rel_error, 0.02);
  EXPECT_LT(r.residual, residual_tolerance(r));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.p_success, r.p_bound + 1e-12);
}

TEST(EndToEnd, BreakEvenRecoversChannel) {
  ProtocolConfig c;
  c.eta = 0.5;
  c.chi = 0.4;
  c.gain = 1.0 / (0.4 * 0.4);
  c.dim = recommended_cutoff(effective_epr_params(c.chi, c.eta, c.gain).chi_eff, 1e-6);
  c.grid = {8.0, 0.25};
  const EndToEndReport r = end_to_end_verify(c);
  EXPECT_NEAR(r.eta_est, 0.5, 0.02 * 0.5);
}

TEST(EndToEnd, WeakerEntanglementLadderImproves) {
  // Fixed effective entanglement chi_eff = 0.7: the corrected transmission
  // chi_eff^2 - (1 - eta) chi^2 grows as the initial chi shrinks.
  const double eta = 0.5, chi_eff = 0.7;
  double prev = 0.0;
  for (double chi : {0.3, 0.2, 0.1}) {
    ProtocolConfig c;
    c.eta = eta;
    c.chi = chi;
    c.gain = gain_for_chi_eff(eta, chi, chi_eff);
    c.dim = recommended_cutoff(chi_eff, 1e-6);
    c.grid = {8.0, 0.25};
    const EndToEndReport r = end_to_end_verify(c);
    EXPECT_LE(r.rel_error, 0.02) << "chi=" << chi;
    EXPECT_GT(r.eta_est, prev) << "chi=" << chi;
    EXPECT_LT(r.eta_est, best_transmission(eta, chi) + 1e-3);
    prev = r.eta_est;
  }
}

TEST(Validation, ConfigRejectsBadValues) {
  ProtocolConfig c;
  c.eta = 1.5;
  EXPECT_THROW(end_to_end_verify(c), InvalidParameter);
  c = ProtocolConfig{};
  c.dim = 1;
  EXPECT_THROW(c.validate(), InvalidDimension);
}
