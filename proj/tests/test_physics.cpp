#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <accsim/physics.hpp>

namespace {

using accsim::DelayBuffer;
using accsim::DynamicsState;
using accsim::MfcCurves;
using accsim::NonlinearDynamicsConfig;
using accsim::PerceivedState;

TEST(Lag, StepMatchesFrozenReferenceAndClosedForm) {
  // From rest, command 2 m/s^2, tau 0.5 s, dt 0.1 s.
  EXPECT_NEAR(accsim::lag_step(0.0, 2.0, 0.5, 0.1), 0.36253849384403636,
              1e-15);
  // Closed form from arbitrary state.
  const double prev = -1.3, cmd = 0.7, tau = 0.42, dt = 0.05;
  EXPECT_DOUBLE_EQ(accsim::lag_step(prev, cmd, tau, dt),
                   cmd + (prev - cmd) * std::exp(-dt / tau));
  EXPECT_THROW(accsim::lag_step(0.0, 1.0, 0.0, 0.1), accsim::ConfigError);
}

TEST(Lag, LinearDynamicsConvergesToCommand) {
  DynamicsState state;
  double a_f = 0.0;
  for (int i = 0; i < 400; ++i) {
    auto [value, next] = accsim::dynamics_linear_step(state, 1.5, 0.4, 0.1);
    a_f = value;
    state = next;
  }
  EXPECT_NEAR(a_f, 1.5, 1e-12);
}

// After exactly tau seconds of a constant command from rest the response is
// a_cmd * (1 - 1/e); the discretization is exact so any dt that divides tau
// lands on the same value.
TEST(Lag, StepResponseAtTauIsOneMinusInvE) {
  const double tau = 0.5, dt = 0.1, cmd = 2.0;
  DynamicsState state;
  double a_f = 0.0;
  for (int i = 0; i < 5; ++i) {  // 5 steps of 0.1 = tau
    auto [value, next] = accsim::dynamics_linear_step(state, cmd, tau, dt);
    a_f = value;
    state = next;
  }
  EXPECT_NEAR(a_f, cmd * (1.0 - std::exp(-1.0)), 1e-9);
}

TEST(NonlinearDynamics, RoadLoadMatchesFrozenReference) {
  NonlinearDynamicsConfig cfg;
  cfg.tau_a = 1e-9;  // lag settles immediately so a_t == a_cmd
  cfg.m_0 = 1800.0;
  cfg.m_load = 0.0;
  cfg.f_0 = 200.0;
  cfg.f_1 = 0.6;
  cfg.f_2 = 0.03;
  cfg.phi_e = 1.0;
  auto [a_f, next] =
      accsim::dynamics_nonlinear_step(DynamicsState{}, 0.0, cfg, 20.0, 0.0, 0.1);
  EXPECT_NEAR(a_f, -0.12444444444444444, 1e-12);
}

TEST(NonlinearDynamics, GradeAddsGravityComponent) {
  NonlinearDynamicsConfig cfg;
  cfg.tau_a = 1e-9;
  cfg.m_0 = 1800.0;
  cfg.phi_e = 1.0;
  const double alpha = 0.02;
  auto [flat, n1] =
      accsim::dynamics_nonlinear_step(DynamicsState{}, 1.0, cfg, 10.0, 0.0, 0.1);
  auto [climb, n2] = accsim::dynamics_nonlinear_step(DynamicsState{}, 1.0, cfg,
                                                     10.0, alpha, 0.1);
  EXPECT_NEAR(flat - climb, cfg.g * std::sin(alpha), 1e-12);
}

// With zero road loads and unit inertia factor the nonlinear step must equal
// the linear step bitwise, whatever the command sequence.
TEST(NonlinearDynamics, ReducesBitwiseToLinearWithoutLoads) {
  NonlinearDynamicsConfig cfg;
  cfg.tau_a = 0.45;
  cfg.phi_e = 1.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cmd(-4.0, 3.0);
  DynamicsState lin, nl;
  for (int i = 0; i < 10000; ++i) {
    const double c = cmd(rng);
    auto [a_lin, lin_next] = accsim::dynamics_linear_step(lin, c, cfg.tau_a, 0.1);
    auto [a_nl, nl_next] =
        accsim::dynamics_nonlinear_step(nl, c, cfg, 15.0, 0.0, 0.1);
    ASSERT_EQ(a_lin, a_nl) << "step " << i;
    lin = lin_next;
    nl = nl_next;
  }
}

TEST(Constraints, ConstantClampAndBoundsCheck) {
  EXPECT_DOUBLE_EQ(accsim::constrain_constant(9.0, -7.0, 5.0), 5.0);
  EXPECT_DOUBLE_EQ(accsim::constrain_constant(-9.0, -7.0, 5.0), -7.0);
  EXPECT_DOUBLE_EQ(accsim::constrain_constant(1.0, -7.0, 5.0), 1.0);
  EXPECT_THROW(accsim::constrain_constant(0.0, 5.0, -7.0), accsim::ConfigError);
}

TEST(Constraints, MfcInterpolatesAndExtrapolatesFlat) {
  MfcCurves curves{{{0.0, 4.0, -6.0}, {50.0, 1.0, -6.0}}};
  curves.validate();
  EXPECT_DOUBLE_EQ(curves.a_ap(25.0), 2.5);  // frozen hand value
  EXPECT_DOUBLE_EQ(curves.a_ap(-3.0), 4.0);
  EXPECT_DOUBLE_EQ(curves.a_ap(80.0), 1.0);
  EXPECT_DOUBLE_EQ(curves.a_dp(25.0), -6.0);
  EXPECT_DOUBLE_EQ(accsim::constrain_mfc(3.7, 25.0, curves), 2.5);
  EXPECT_DOUBLE_EQ(accsim::constrain_mfc(-9.0, 25.0, curves), -6.0);
  EXPECT_DOUBLE_EQ(accsim::constrain_mfc(0.5, 25.0, curves), 0.5);
}

TEST(Constraints, MfcValidateRejectsBadGrids) {
  MfcCurves unordered{{{10.0, 3.0, -6.0}, {5.0, 2.0, -6.0}}};
  EXPECT_THROW(unordered.validate(), accsim::ConfigError);
  MfcCurves badsign{{{0.0, -1.0, -6.0}}};
  EXPECT_THROW(badsign.validate(), accsim::ConfigError);
  MfcCurves empty;
  EXPECT_THROW(empty.validate(), accsim::ConfigError);
}

TEST(Constraints, MfcFromJsonRoundTrip) {
  const auto j = nlohmann::json::parse(
      R"([{"v": 0, "a_ap": 4, "a_dp": -6}, {"v": 30, "a_ap": 2, "a_dp": -6.5}])");
  const auto curves = MfcCurves::from_json(j);
  ASSERT_EQ(curves.points.size(), 2u);
  EXPECT_DOUBLE_EQ(curves.a_ap(15.0), 3.0);
  EXPECT_DOUBLE_EQ(curves.a_dp(30.0), -6.5);
}

TEST(Delay, ZeroDelayReturnsLatestSample) {
  DelayBuffer buf(0.0, 0.1);
  for (int i = 0; i <= 10; ++i)
    buf.push(0.1 * i, PerceivedState{double(i), 2.0 * i, 0.0});
  const auto st = buf.sample(1.0);
  EXPECT_DOUBLE_EQ(st.v_f, 10.0);
  EXPECT_DOUBLE_EQ(st.s, 20.0);
}

TEST(Delay, GridAlignedDelayReturnsStoredSampleExactly) {
  DelayBuffer buf(0.3, 0.1);  // exactly 3 steps back
  for (int i = 0; i <= 20; ++i)
    buf.push(0.1 * i, PerceivedState{double(i), 100.0 + i, 0.5 * i});
  const auto st = buf.sample(2.0);  // wants t = 1.7 -> sample 17
  EXPECT_DOUBLE_EQ(st.v_f, 17.0);
  EXPECT_DOUBLE_EQ(st.s, 117.0);
  EXPECT_DOUBLE_EQ(st.dv, 8.5);
}

TEST(Delay, OffGridDelayInterpolatesLinearly) {
  DelayBuffer buf(0.25, 0.1);
  for (int i = 0; i <= 10; ++i)
    buf.push(0.1 * i, PerceivedState{double(i), 10.0 * i, -1.0 * i});
  // Query t=1.0 wants t=0.75, halfway between samples 7 and 8.
  const auto st = buf.sample(1.0);
  EXPECT_NEAR(st.v_f, 7.5, 1e-12);
  EXPECT_NEAR(st.s, 75.0, 1e-12);
  EXPECT_NEAR(st.dv, -7.5, 1e-12);
}

TEST(Delay, WarmupHoldsEarliestSample) {
  DelayBuffer buf(0.5, 0.1);
  buf.push(0.0, PerceivedState{3.0, 30.0, 0.1});
  buf.push(0.1, PerceivedState{4.0, 40.0, 0.2});
  // t - tau_p = -0.4, before the first sample: hold it.
  const auto st = buf.sample(0.1);
  EXPECT_DOUBLE_EQ(st.v_f, 3.0);
  EXPECT_DOUBLE_EQ(st.s, 30.0);
}

TEST(Delay, RingRetainsEnoughHistoryIndefinitely) {
  DelayBuffer buf(0.4, 0.1);
  for (int i = 0; i <= 100000; ++i) {
    buf.push(0.1 * i, PerceivedState{double(i), 0.0, 0.0});
    if (i >= 4) {
      const auto st = buf.sample(0.1 * i);
      ASSERT_DOUBLE_EQ(st.v_f, double(i - 4)) << "at push " << i;
    }
  }
}

TEST(Delay, RejectsBadConstructionAndEmptyQuery) {
  EXPECT_THROW(DelayBuffer(-0.1, 0.1), accsim::ConfigError);
  EXPECT_THROW(DelayBuffer(0.1, 0.0), accsim::ConfigError);
  DelayBuffer buf(0.1, 0.1);
  EXPECT_THROW(buf.sample(0.0), accsim::StateError);
}

}  // namespace
