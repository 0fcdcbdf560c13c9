#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "accsim/bounds.hpp"
#include "accsim/calibration.hpp"

namespace {

using accsim::CalibrationProblem;
using accsim::KinematicSeries;
using accsim::OptimizerConfig;
using accsim::ParameterBounds;
using accsim::ParameterSet;

// Leader with enough speed variation to make the follower response
// informative for every parameter.
KinematicSeries dynamic_leader(std::size_t n, double dt) {
  KinematicSeries s;
  s.dt = dt;
  s.t.resize(n);
  s.x.resize(n);
  s.v.resize(n);
  s.a.resize(n);
  double x = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    s.t[k] = t;
    s.v[k] = 12.0 + 5.0 * std::sin(0.25 * t);
    if (k > 0) x += 0.5 * (s.v[k] + s.v[k - 1]) * dt;
    s.x[k] = x;
    s.a[k] = k > 0 ? (s.v[k] - s.v[k - 1]) / dt : 0.0;
  }
  return s;
}

ParameterSet truth_params() {
  ParameterSet p;
  p.delta = 4.0;
  p.v0 = 30.0;
  p.d0 = 2.0;
  p.t_h = 1.4;
  p.a_max = 2.0;
  p.a_min = -2.0;
  return p;
}

// Problem whose observation is itself a simulation, so the truth scores an
// exact zero.
CalibrationProblem self_problem() {
  CalibrationProblem problem;
  problem.leader = dynamic_leader(601, 0.1);
  problem.spec = accsim::ModelSpec::from_id(1);
  const auto truth = accsim::simulate_follower(problem.leader, -20.0, 12.0,
                                               problem.spec, truth_params(),
                                               5.0);
  problem.observed = truth.follower;
  problem.leader_length = 5.0;
  return problem;
}

ParameterBounds pinned_at(const ParameterSet& p) {
  ParameterBounds b;
  for (const auto& name :
       {"delta", "v0", "d0", "t_h", "a_max", "a_min"})
    b.set(name, p.get(name), p.get(name));
  return b;
}

OptimizerConfig small_opt() {
  OptimizerConfig opt;
  opt.population = 10;
  opt.max_generations = 10;
  opt.stagnation_window = 5;
  opt.polish_budget = 0;
  return opt;
}

TEST(Calibration, CollapsedBoundsScoreTheSinglePoint) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  const auto result = accsim::calibrate(problem, small_opt());
  EXPECT_DOUBLE_EQ(result.objective, 0.0);
  EXPECT_FALSE(result.collision);
  EXPECT_GT(result.evaluations, 0u);
  EXPECT_DOUBLE_EQ(result.params.t_h, 1.4);
  EXPECT_DOUBLE_EQ(result.errors.rmse_s, 0.0);
  EXPECT_DOUBLE_EQ(result.errors.nrmse_a, 0.0);
}

TEST(Calibration, PerfectFitReplicatesReportDegenerateCv) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  const auto rep = accsim::replicate(problem, small_opt(), 3);
  ASSERT_EQ(rep.objectives.size(), 3u);
  for (const double obj : rep.objectives) EXPECT_DOUBLE_EQ(obj, 0.0);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_DOUBLE_EQ(rep.cv, 0.0);
}

TEST(Calibration, IdenticalReplicatesHaveZeroSpreadWithoutDegeneracy) {
  auto problem = self_problem();
  auto off = truth_params();
  off.t_h = 2.0;  // deliberately wrong, still collision free
  problem.bounds = pinned_at(off);
  const auto rep = accsim::replicate(problem, small_opt(), 3);
  EXPECT_GT(rep.mean, 1e-3);
  EXPECT_FALSE(rep.degenerate);
  EXPECT_DOUBLE_EQ(rep.stddev, 0.0);
  EXPECT_DOUBLE_EQ(rep.cv, 0.0);
}

TEST(Calibration, RecoversFreeParametersFromItsOwnOutput) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  problem.bounds.set("t_h", 0.5, 3.0);
  problem.bounds.set("a_max", 0.5, 5.0);
  OptimizerConfig opt;
  opt.population = 20;
  opt.max_generations = 30;
  opt.polish_budget = 500;
  const auto result = accsim::calibrate(problem, opt);
  EXPECT_LT(result.objective, 0.05);
  EXPECT_FALSE(result.collision);
  EXPECT_GE(result.params.t_h, 0.5);
  EXPECT_LE(result.params.t_h, 3.0);
  for (std::size_t g = 1; g < result.history.size(); ++g)
    EXPECT_LE(result.history[g], result.history[g - 1]);
}

TEST(Calibration, RunsAreDeterministicForAFixedSeed) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  problem.bounds.set("t_h", 0.5, 3.0);
  OptimizerConfig opt = small_opt();
  opt.seed = 7;
  const auto a = accsim::calibrate(problem, opt);
  const auto b = accsim::calibrate(problem, opt);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.params.t_h, b.params.t_h);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Calibration, ValidatesBoundsCoverageAndGrids) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  // Knock out one required parameter.
  ParameterBounds incomplete;
  for (const auto& name : {"delta", "v0", "d0", "t_h", "a_max"})
    incomplete.set(name, 1.0, 2.0);
  problem.bounds = incomplete;
  EXPECT_THROW(accsim::calibrate(problem, small_opt()), accsim::ConfigError);

  auto mismatched = self_problem();
  mismatched.bounds = pinned_at(truth_params());
  mismatched.observed.t.pop_back();
  mismatched.observed.x.pop_back();
  mismatched.observed.v.pop_back();
  mismatched.observed.a.pop_back();
  EXPECT_THROW(accsim::calibrate(mismatched, small_opt()), accsim::DataError);
}

TEST(Calibration, ImpossibleGeometryRaisesCalibrationFailure) {
  // Stationary leader 0.2 m ahead of a follower moving at 5 m/s: even a
  // full-stop first step advances v*dt/2 = 0.25 m, so every candidate
  // collides and the optimizer only ever sees the penalty.
  CalibrationProblem problem;
  problem.spec = accsim::ModelSpec::from_id(1);
  problem.leader_length = 5.0;
  KinematicSeries leader;
  leader.dt = 0.1;
  KinematicSeries observed;
  observed.dt = 0.1;
  for (std::size_t k = 0; k < 30; ++k) {
    const double t = 0.1 * static_cast<double>(k);
    leader.t.push_back(t);
    leader.x.push_back(5.2);
    leader.v.push_back(0.0);
    leader.a.push_back(0.0);
    observed.t.push_back(t);
    observed.x.push_back(0.5 * static_cast<double>(k));
    observed.v.push_back(5.0);
    observed.a.push_back(0.0);
  }
  problem.leader = leader;
  problem.observed = observed;
  problem.bounds = ParameterBounds::defaults(accsim::VehicleType::Tesla);
  OptimizerConfig opt = small_opt();
  opt.max_generations = 2;
  EXPECT_THROW(accsim::calibrate(problem, opt), accsim::CalibrationFailure);
}

TEST(Calibration, ReplicateNeedsAtLeastTwoRuns) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  EXPECT_THROW(accsim::replicate(problem, small_opt(), 1),
               accsim::ConfigError);
}

TEST(Calibration, ObjectiveRejectsBadGeneVectors) {
  auto problem = self_problem();
  problem.bounds = pinned_at(truth_params());
  const auto objective = accsim::make_objective(problem);
  // Wrong arity is a caller bug, not a candidate to penalize.
  EXPECT_THROW(objective({1.0, 2.0}), accsim::ConfigError);
  // An inadmissible candidate (t_h = 0) scores +inf instead of throwing.
  const auto p = truth_params();
  EXPECT_TRUE(std::isinf(
      objective({p.delta, p.v0, p.d0, 0.0, p.a_max, p.a_min})));
}

TEST(Calibration, GeneOrderFollowsTheModelParameterList) {
  const auto spec = accsim::ModelSpec::from_id(1);
  const auto params =
      accsim::params_from_genes(spec, {4.0, 30.0, 2.0, 1.4, 2.0, -2.0});
  EXPECT_DOUBLE_EQ(params.delta, 4.0);
  EXPECT_DOUBLE_EQ(params.v0, 30.0);
  EXPECT_DOUBLE_EQ(params.d0, 2.0);
  EXPECT_DOUBLE_EQ(params.t_h, 1.4);
  EXPECT_DOUBLE_EQ(params.a_max, 2.0);
  EXPECT_DOUBLE_EQ(params.a_min, -2.0);
  EXPECT_THROW(accsim::params_from_genes(spec, {1.0}), accsim::ConfigError);
}

}  // namespace
