#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "accsim/controllers.hpp"
#include "accsim/models.hpp"
#include "accsim/simulator.hpp"

namespace {

using accsim::KinematicSeries;
using accsim::ParameterSet;
using accsim::PerceivedState;
using accsim::SimResult;

KinematicSeries constant_speed_leader(std::size_t n, double dt, double x0,
                                      double v) {
  KinematicSeries s;
  s.dt = dt;
  for (std::size_t k = 0; k < n; ++k) {
    s.t.push_back(static_cast<double>(k) * dt);
    s.x.push_back(x0 + v * static_cast<double>(k) * dt);
    s.v.push_back(v);
    s.a.push_back(0.0);
  }
  return s;
}

ParameterSet idm_params() {
  ParameterSet p;
  p.delta = 4.0;
  p.v0 = 30.0;
  p.d0 = 2.0;
  p.t_h = 1.5;
  p.a_max = 1.5;
  p.a_min = -2.0;
  return p;
}

TEST(Simulator, ConstantCommandMatchesClosedForm) {
  // Leader far ahead so spacing never matters.
  const auto leader = constant_speed_leader(1001, 0.1, 1.0e5, 30.0);
  const double a = 1.2, v0 = 5.0;
  auto result = accsim::simulate_with_command(
      leader, 0.0, v0, [a](const PerceivedState&) { return a; });
  ASSERT_EQ(result.follower.size(), 1001u);
  EXPECT_FALSE(result.collision.has_value());
  for (std::size_t k = 0; k < result.follower.size(); ++k) {
    const double t = result.follower.t[k];
    EXPECT_NEAR(result.follower.v[k], v0 + a * t, 1e-9);
    EXPECT_NEAR(result.follower.x[k], v0 * t + 0.5 * a * t * t, 1e-9);
  }
}

TEST(Simulator, BallisticIdentitiesHoldStepwise) {
  const auto leader = constant_speed_leader(400, 0.1, 1.0e5, 30.0);
  std::size_t k = 0;
  auto command = [&k](const PerceivedState&) {
    ++k;
    return 2.0 * std::sin(0.05 * static_cast<double>(k)) - 0.3;
  };
  const auto result = accsim::simulate_with_command(leader, 0.0, 4.0, command);
  const auto& f = result.follower;
  for (std::size_t i = 1; i < f.size(); ++i) {
    EXPECT_NEAR(f.v[i] - f.v[i - 1], f.a[i] * f.dt, 1e-12);
    EXPECT_NEAR(f.x[i] - f.x[i - 1], 0.5 * (f.v[i] + f.v[i - 1]) * f.dt,
                1e-12);
  }
}

TEST(Simulator, SpeedFloorStopsExactlyAndRecordsEffectiveDeceleration) {
  const auto leader = constant_speed_leader(10, 0.1, 1.0e5, 30.0);
  const auto result = accsim::simulate_with_command(
      leader, 0.0, 1.0, [](const PerceivedState&) { return -30.0; });
  const auto& f = result.follower;
  // Step 1 would cross zero: effective deceleration stops at the step end
  // and the advance equals the ballistic stopping distance v^2 / (2|a|).
  EXPECT_DOUBLE_EQ(f.v[1], 0.0);
  EXPECT_DOUBLE_EQ(f.a[1], -10.0);
  EXPECT_DOUBLE_EQ(f.x[1], 0.05);
  // At rest the command keeps asking to brake; the floor reports a = 0.
  EXPECT_DOUBLE_EQ(f.v[2], 0.0);
  EXPECT_DOUBLE_EQ(f.a[2], 0.0);
  EXPECT_DOUBLE_EQ(f.x[2], 0.05);
  EXPECT_DOUBLE_EQ(result.a_cmd[2], -30.0);
}

TEST(Simulator, CollisionTruncatesAllChannels) {
  // Stationary leader 15 m ahead, follower coasting at 10 m/s: spacing
  // reaches zero after exactly 15 one-metre steps.
  const auto leader = constant_speed_leader(40, 0.1, 20.0, 0.0);
  const auto result = accsim::simulate_with_command(
      leader, 0.0, 10.0, [](const PerceivedState&) { return 0.0; }, 0.0,
      accsim::DynamicsKind::None, 0.0, {}, accsim::ConstraintKind::None, {},
      5.0);
  ASSERT_TRUE(result.collision.has_value());
  EXPECT_EQ(result.collision->index, 15u);
  EXPECT_NEAR(result.collision->time, 1.5, 1e-12);
  ASSERT_EQ(result.follower.size(), 16u);
  EXPECT_EQ(result.spacing.size(), 16u);
  EXPECT_EQ(result.a_cmd.size(), 16u);
  EXPECT_LE(result.spacing.back(), 0.0);
}

TEST(Simulator, GofStartIndexSkipsWarmup) {
  EXPECT_EQ(accsim::gof_start_index(0.0, 0.1), 1u);
  EXPECT_EQ(accsim::gof_start_index(0.2, 0.1), 3u);
  EXPECT_EQ(accsim::gof_start_index(0.25, 0.1), 3u);
  EXPECT_EQ(accsim::gof_start_index(0.3, 0.1), 4u);

  const auto leader = constant_speed_leader(30, 0.1, 1.0e5, 30.0);
  const auto result = accsim::simulate_with_command(
      leader, 0.0, 5.0, [](const PerceivedState&) { return 0.0; }, 0.25);
  EXPECT_EQ(result.gof_start_index, 3u);
}

TEST(Simulator, PerceptionDelayShiftsLeaderDrivenCommand) {
  // Command depends only on the (possibly delayed) leader speed, so the
  // delayed run must reproduce the undelayed command sequence shifted by
  // tau_p / dt samples, holding the earliest sample during warm-up.
  KinematicSeries leader;
  leader.dt = 0.1;
  for (std::size_t k = 0; k < 60; ++k) {
    leader.t.push_back(0.1 * static_cast<double>(k));
    leader.v.push_back(2.0 + 0.1 * static_cast<double>(k));
    leader.x.push_back(1.0e5 + static_cast<double>(k));
    leader.a.push_back(0.0);
  }
  auto command = [](const PerceivedState& p) { return 0.5 * (p.dv + p.v_f); };
  const auto plain = accsim::simulate_with_command(leader, 0.0, 3.0, command);
  const auto delayed =
      accsim::simulate_with_command(leader, 0.0, 3.0, command, 0.3);
  for (std::size_t k = 4; k < delayed.follower.size(); ++k)
    ASSERT_DOUBLE_EQ(delayed.a_cmd[k], plain.a_cmd[k - 3]) << "k=" << k;
  for (std::size_t k = 1; k <= 3; ++k)
    ASSERT_DOUBLE_EQ(delayed.a_cmd[k], plain.a_cmd[1]) << "k=" << k;
}

TEST(Simulator, ModelDispatchMatchesDirectController) {
  const auto leader = constant_speed_leader(200, 0.1, 60.0, 12.0);
  const auto spec = accsim::ModelSpec::from_id(1);
  const auto params = idm_params();
  const auto via_spec = accsim::simulate_follower(leader, 0.0, 10.0, spec,
                                                  params, 5.0);
  const auto via_cmd = accsim::simulate_with_command(
      leader, 0.0, 10.0,
      [&params](const PerceivedState& p) {
        return accsim::idm_command(p, params);
      },
      0.0, accsim::DynamicsKind::None, 0.0, {}, accsim::ConstraintKind::None,
      {}, 5.0);
  ASSERT_EQ(via_spec.follower.size(), via_cmd.follower.size());
  for (std::size_t k = 0; k < via_spec.follower.size(); ++k) {
    ASSERT_EQ(via_spec.follower.x[k], via_cmd.follower.x[k]);
    ASSERT_EQ(via_spec.follower.v[k], via_cmd.follower.v[k]);
    ASSERT_EQ(via_spec.follower.a[k], via_cmd.follower.a[k]);
  }
}

TEST(Simulator, PlatoonChainsEachFollowerBehindThePrevious) {
  const auto leader = constant_speed_leader(150, 0.1, 50.0, 10.0);
  accsim::FollowerSetup f1{accsim::ModelSpec::from_id(1), idm_params(), 5.0,
                           0.0, 10.0};
  accsim::FollowerSetup f2{accsim::ModelSpec::from_id(1), idm_params(), 5.0,
                           -25.0, 10.0};
  const auto results = accsim::simulate_platoon(leader, {f1, f2});
  ASSERT_EQ(results.size(), 2u);

  const auto manual = accsim::simulate_follower(
      results[0].follower, -25.0, 10.0, f2.spec, f2.params, f2.leader_length);
  ASSERT_EQ(results[1].follower.size(), manual.follower.size());
  for (std::size_t k = 0; k < manual.follower.size(); ++k)
    ASSERT_EQ(results[1].follower.x[k], manual.follower.x[k]);
}

TEST(Simulator, PlatoonCollisionTruncatesDownstreamRuns) {
  // First follower starts 0.1 m behind a stationary leader at 5 m/s; even a
  // full-stop step advances v*dt/2 = 0.25 m, so it collides at step one and
  // every downstream follower sees a two-sample leader.
  const auto leader = constant_speed_leader(50, 0.1, 30.0, 0.0);
  accsim::FollowerSetup f1{accsim::ModelSpec::from_id(1), idm_params(), 5.0,
                           24.9, 5.0};
  accsim::FollowerSetup f2{accsim::ModelSpec::from_id(1), idm_params(), 5.0,
                           5.0, 0.0};
  const auto results = accsim::simulate_platoon(leader, {f1, f2});
  ASSERT_TRUE(results[0].collision.has_value());
  EXPECT_EQ(results[0].collision->index, 1u);
  EXPECT_EQ(results[0].follower.size(), 2u);
  EXPECT_EQ(results[1].follower.size(), 2u);
}

TEST(Simulator, RejectsDegenerateSetups) {
  const auto leader = constant_speed_leader(30, 0.1, 20.0, 10.0);
  auto zero = [](const PerceivedState&) { return 0.0; };
  // Initial spacing <= 0.
  EXPECT_THROW(accsim::simulate_with_command(leader, 20.0, 5.0, zero),
               std::invalid_argument);
  // Leader too short.
  EXPECT_THROW(
      accsim::simulate_with_command(constant_speed_leader(1, 0.1, 20.0, 10.0),
                                    0.0, 5.0, zero),
      std::invalid_argument);
  // Slope channel length mismatch.
  std::vector<double> slope(7, 0.0);
  EXPECT_THROW(accsim::simulate_with_command(
                   leader, 0.0, 5.0, zero, 0.0, accsim::DynamicsKind::None,
                   0.0, {}, accsim::ConstraintKind::None, {}, 0.0, &slope),
               std::invalid_argument);
}

TEST(Simulator, RejectsInvalidModelParameters) {
  const auto leader = constant_speed_leader(30, 0.1, 60.0, 10.0);
  const auto spec = accsim::ModelSpec::from_id(1);
  auto p = idm_params();
  p.t_h = 0.0;
  EXPECT_THROW(accsim::simulate_follower(leader, 0.0, 5.0, spec, p, 5.0),
               accsim::ConfigError);
  p = idm_params();
  p.a_max = 0.0;
  EXPECT_THROW(accsim::simulate_follower(leader, 0.0, 5.0, spec, p, 5.0),
               accsim::ConfigError);
  p = idm_params();
  p.a_min = accsim::ParameterSet::nan();
  EXPECT_THROW(accsim::simulate_follower(leader, 0.0, 5.0, spec, p, 5.0),
               accsim::ConfigError);
}

TEST(Simulator, CsvWriterAndSummaryDescribeTheRun) {
  const auto leader = constant_speed_leader(40, 0.1, 20.0, 0.0);
  const auto result = accsim::simulate_with_command(
      leader, 0.0, 10.0, [](const PerceivedState&) { return 0.0; }, 0.0,
      accsim::DynamicsKind::None, 0.0, {}, accsim::ConstraintKind::None, {},
      5.0);

  const auto path = (std::filesystem::temp_directory_path() /
                     "accsim_sim_result.csv").string();
  accsim::write_sim_result_csv(result, path);
  std::ifstream in(path);
  std::string header;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_EQ(header, "t,x,v,a,a_cmd,s");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, result.follower.size());
  std::remove(path.c_str());

  const auto summary = accsim::sim_result_summary(result);
  EXPECT_EQ(summary.at("samples").get<std::size_t>(), result.follower.size());
  EXPECT_EQ(summary.at("gof_start_index").get<std::size_t>(), 1u);
  EXPECT_TRUE(summary.at("collision").get<bool>());
  EXPECT_EQ(summary.at("collision_index").get<std::size_t>(), 15u);
}

}  // namespace
