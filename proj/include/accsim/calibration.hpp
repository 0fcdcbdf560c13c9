#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "accsim/bounds.hpp"
#include "accsim/errors.hpp"
#include "accsim/ga.hpp"
#include "accsim/gof.hpp"
#include "accsim/models.hpp"
#include "accsim/params.hpp"
#include "accsim/series.hpp"
#include "accsim/simulator.hpp"

namespace accsim {

// One calibration task: reproduce an observed follower trajectory behind a
// recorded leader with a given model variant.
struct CalibrationProblem {
  KinematicSeries leader;
  KinematicSeries observed;  // measured follower, same grid as leader
  double leader_length = kDefaultVehicleLength;
  ModelSpec spec;
  ParameterBounds bounds;
  GofConfig gof;
  SimOptions sim;
  const std::vector<double>* slope = nullptr;

  void validate() const {
    leader.validate("leader");
    observed.validate("observed follower");
    if (!same_grid(leader, observed))
      throw DataError("leader and observed follower must share a time grid");
    for (const auto& name : spec.parameter_names())
      if (!bounds.has(name))
        throw ConfigError("missing bounds for parameter '" + name +
                          "' required by model " + std::to_string(spec.id));
  }
};

struct CalibrationResult {
  ParameterSet params;
  double objective = 0.0;
  MopErrors errors;
  bool collision = false;
  std::size_t evaluations = 0;
  std::vector<double> history;  // best objective per generation
};

inline ParameterSet params_from_genes(const ModelSpec& spec,
                                      const std::vector<double>& genes) {
  const auto names = spec.parameter_names();
  if (genes.size() != names.size())
    throw ConfigError("gene vector size " + std::to_string(genes.size()) +
                      " does not match model parameter count " +
                      std::to_string(names.size()));
  ParameterSet p;
  for (std::size_t i = 0; i < names.size(); ++i) p.set(names[i], genes[i]);
  return p;
}

// Objective over the gene vector: simulate and score, with the collision
// penalty and +inf for parameterizations the simulator rejects outright.
inline std::function<double(const std::vector<double>&)> make_objective(
    const CalibrationProblem& problem) {
  const ObservedChannels obs = ObservedChannels::from_data(
      problem.leader, problem.observed, problem.leader_length);
  return [&problem, obs](const std::vector<double>& genes) -> double {
    const ParameterSet params = params_from_genes(problem.spec, genes);
    SimResult sim;
    try {
      sim = simulate_follower(problem.leader, problem.observed.x[0],
                              problem.observed.v[0], problem.spec, params,
                              problem.leader_length, problem.slope,
                              problem.sim);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
    return penalized_objective(sim, obs, problem.gof);
  };
}

// Calibrate one model variant against one observed run. Throws
// CalibrationFailure when every candidate either collided or was rejected,
// i.e. the search never found a usable parameterization.
inline CalibrationResult calibrate(const CalibrationProblem& problem,
                                   const OptimizerConfig& opt) {
  problem.validate();
  const auto names = problem.spec.parameter_names();
  auto [lower, upper] = problem.bounds.vectors(names);
  const auto objective = make_objective(problem);

  const GaResult ga = ga_minimize(objective, lower, upper, opt);
  if (!std::isfinite(ga.best_value) || ga.best_value >= kCollisionPenalty)
    throw CalibrationFailure(
        "no collision-free parameterization found for model " +
        std::to_string(problem.spec.id));

  CalibrationResult result;
  result.params = params_from_genes(problem.spec, ga.best_x);
  result.evaluations = ga.evaluations;
  result.history = ga.history;

  // Re-simulate at the reported optimum: the stored objective must reproduce,
  // otherwise the evaluation path is nondeterministic.
  const SimResult sim = simulate_follower(
      problem.leader, problem.observed.x[0], problem.observed.v[0],
      problem.spec, result.params, problem.leader_length, problem.slope,
      problem.sim);
  const ObservedChannels obs = ObservedChannels::from_data(
      problem.leader, problem.observed, problem.leader_length);
  result.objective = penalized_objective(sim, obs, problem.gof);
  if (std::abs(result.objective - ga.best_value) >
      1e-9 * std::max(1.0, std::abs(ga.best_value)))
    throw StateError("objective did not reproduce on re-simulation");
  result.collision = sim.collision.has_value();
  if (result.collision)
    throw CalibrationFailure("best parameterization collides on re-simulation");
  result.errors = per_mop_errors(sim, obs, problem.gof.start_index);
  return result;
}

// Repeated calibration with distinct seeds, reporting the spread of the
// achieved objectives as a coefficient of variation.
struct ReplicateResult {
  std::vector<CalibrationResult> runs;
  std::vector<double> objectives;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double cv = 0.0;
  // True when the mean objective sits below the perfect-fit floor; there the
  // ratio stddev/mean measures rounding noise, not optimizer spread, so the
  // cv is reported as 0.
  bool degenerate = false;
};

inline ReplicateResult replicate(const CalibrationProblem& problem,
                                 const OptimizerConfig& base,
                                 std::size_t replicates,
                                 double cv_zero_floor = 1e-6) {
  if (replicates < 2)
    throw ConfigError("replicate() needs at least 2 runs");
  ReplicateResult out;
  out.runs.reserve(replicates);
  out.objectives.reserve(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    OptimizerConfig cfg = base;
    cfg.seed = base.seed + i;
    out.runs.push_back(calibrate(problem, cfg));
    out.objectives.push_back(out.runs.back().objective);
  }
  double sum = 0.0;
  for (double v : out.objectives) sum += v;
  out.mean = sum / static_cast<double>(replicates);
  double sq = 0.0;
  for (double v : out.objectives) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(replicates));
  if (std::abs(out.mean) < cv_zero_floor) {
    out.degenerate = true;
    out.cv = 0.0;
  } else {
    out.cv = out.stddev / out.mean;
  }
  return out;
}

}  // namespace accsim
