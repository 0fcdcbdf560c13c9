#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "accsim/errors.hpp"
#include "accsim/parallel.hpp"

namespace accsim {

struct OptimizerConfig {
  int population = 50;
  int max_generations = 300;
  double crossover_rate = 0.5;    // probability a child mixes two parents
  double mutation_rate = 0.1;     // per-gene mutation probability
  double mutation_sigma = 0.1;    // initial Gaussian sigma, fraction of range
  // Sigma anneals exponentially to this fraction at the final generation;
  // the coarse early search would otherwise never settle below ~sigma*range.
  double mutation_sigma_final = 1e-4;
  int elite = 1;
  int tournament = 2;
  int stagnation_window = 50;     // flat generations before an early stop
  std::uint64_t seed = 1;
  // Deterministic pattern-search refinement from the GA optimum
  // (evaluation budget; 0 disables).
  int polish_budget = 20000;
  unsigned threads = 1;
};

struct GaResult {
  std::vector<double> best_x;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> history;  // best-so-far per generation, non-increasing
  std::size_t evaluations = 0;
};

namespace detail {

// Pending per-child random decisions for one generation. Drawn by the
// coordinator before any evaluation runs, so concurrency in the objective
// cannot perturb the random stream.
struct ChildPlan {
  std::vector<double> genes;
};

}  // namespace detail

// Real-coded elitist GA over box bounds, followed by an optional
// deterministic polish. Candidates are clamped into the bounds, non-finite
// objective values rank as +inf, and the full run is a pure function of
// (objective, bounds, config).
inline GaResult ga_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& lower, const std::vector<double>& upper,
    const OptimizerConfig& cfg = {}) {
  const std::size_t dim = lower.size();
  if (dim == 0 || upper.size() != dim)
    throw ConfigError("ga_minimize: bad bounds");
  for (std::size_t j = 0; j < dim; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw ConfigError("ga_minimize: bounds must be finite");
    if (lower[j] > upper[j])
      throw ConfigError("ga_minimize: lower bound above upper");
  }
  if (cfg.population < 4) throw ConfigError("ga_minimize: population < 4");
  if (cfg.tournament < 1 || cfg.elite < 0 || cfg.elite >= cfg.population)
    throw ConfigError("ga_minimize: bad selection config");

  std::vector<double> range(dim);
  for (std::size_t j = 0; j < dim; ++j) range[j] = upper[j] - lower[j];

  GaResult result;
  const auto safe_eval = [&](const std::vector<double>& x) {
    const double value = objective(x);
    return std::isfinite(value) ? value
                                : std::numeric_limits<double>::infinity();
  };
  const auto evaluate_all = [&](const std::vector<std::vector<double>>& xs,
                                std::vector<double>& values) {
    values.assign(xs.size(), 0.0);
    parallel_for(xs.size(), cfg.threads,
                 [&](std::size_t i) { values[i] = safe_eval(xs[i]); });
    result.evaluations += xs.size();
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t pop_size = static_cast<std::size_t>(cfg.population);
  std::vector<std::vector<double>> population(pop_size,
                                              std::vector<double>(dim));
  for (auto& x : population)
    for (std::size_t j = 0; j < dim; ++j)
      x[j] = range[j] == 0.0 ? lower[j] : lower[j] + range[j] * unit(rng);

  std::vector<double> fitness;
  evaluate_all(population, fitness);

  const auto update_best = [&](const std::vector<double>& x, double value) {
    if (value < result.best_value) {
      result.best_value = value;
      result.best_x = x;
    }
  };
  for (std::size_t i = 0; i < pop_size; ++i)
    update_best(population[i], fitness[i]);
  result.history.push_back(result.best_value);

  const auto tournament_pick = [&]() {
    std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
    std::size_t winner = pick(rng);
    for (int round = 1; round < cfg.tournament; ++round) {
      const std::size_t other = pick(rng);
      if (fitness[other] < fitness[winner]) winner = other;
    }
    return winner;
  };

  int flat_generations = 0;
  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    const double progress =
        cfg.max_generations > 0
            ? static_cast<double>(gen) / cfg.max_generations
            : 1.0;
    const double sigma_frac =
        cfg.mutation_sigma *
        std::pow(cfg.mutation_sigma_final / cfg.mutation_sigma, progress);

    // Elites survive unchanged (and keep their known fitness).
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fitness[a] < fitness[b];
    });
    std::vector<std::vector<double>> next;
    std::vector<double> next_fitness;
    next.reserve(pop_size);
    for (int e = 0; e < cfg.elite; ++e) {
      next.push_back(population[order[static_cast<std::size_t>(e)]]);
      next_fitness.push_back(fitness[order[static_cast<std::size_t>(e)]]);
    }

    // All random draws happen here, before the children are evaluated.
    std::vector<detail::ChildPlan> plans;
    plans.reserve(pop_size - next.size());
    while (next.size() + plans.size() < pop_size) {
      detail::ChildPlan plan;
      const std::size_t parent_a = tournament_pick();
      plan.genes = population[parent_a];
      if (unit(rng) < cfg.crossover_rate) {
        const std::size_t parent_b = tournament_pick();
        for (std::size_t j = 0; j < dim; ++j)
          if (unit(rng) < 0.5) plan.genes[j] = population[parent_b][j];
      }
      for (std::size_t j = 0; j < dim; ++j) {
        if (range[j] == 0.0) continue;
        if (unit(rng) < cfg.mutation_rate) {
          plan.genes[j] += sigma_frac * range[j] * gauss(rng);
          plan.genes[j] = std::clamp(plan.genes[j], lower[j], upper[j]);
        }
      }
      plans.push_back(std::move(plan));
    }

    std::vector<std::vector<double>> children;
    children.reserve(plans.size());
    for (auto& plan : plans) children.push_back(std::move(plan.genes));
    std::vector<double> child_fitness;
    evaluate_all(children, child_fitness);

    for (std::size_t i = 0; i < children.size(); ++i) {
      next.push_back(std::move(children[i]));
      next_fitness.push_back(child_fitness[i]);
    }
    population = std::move(next);
    fitness = std::move(next_fitness);

    const double previous_best = result.best_value;
    for (std::size_t i = 0; i < pop_size; ++i)
      update_best(population[i], fitness[i]);
    result.history.push_back(result.best_value);

    flat_generations = result.best_value < previous_best
                           ? 0
                           : flat_generations + 1;
    if (cfg.stagnation_window > 0 && flat_generations >= cfg.stagnation_window)
      break;
  }

  // Hooke-Jeeves polish: deterministic, bounded, budgeted. Exploratory
  // axis moves find a descent direction; pattern moves then extrapolate
  // along it, which keeps progress alive inside the curved valleys that
  // coupled parameters produce. Steps halve after a failed sweep.
  if (cfg.polish_budget > 0 && !result.best_x.empty() &&
      std::isfinite(result.best_value)) {
    int budget = cfg.polish_budget;
    std::vector<double> step(dim);
    for (std::size_t j = 0; j < dim; ++j) step[j] = 0.05 * range[j];
    const double min_step_frac = 1e-14;

    const auto eval_counted = [&](const std::vector<double>& x) {
      ++result.evaluations;
      --budget;
      const double value = safe_eval(x);
      if (value < result.best_value) {
        result.best_value = value;
        result.best_x = x;
      }
      return value;
    };

    // Greedy per-axis sweep around (x, fx); mutates x in place.
    const auto explore = [&](std::vector<double>& x, double fx) {
      for (std::size_t j = 0; j < dim && budget > 0; ++j) {
        if (step[j] == 0.0) continue;
        for (const double direction : {1.0, -1.0}) {
          const double candidate =
              std::clamp(x[j] + direction * step[j], lower[j], upper[j]);
          if (candidate == x[j]) continue;
          const double saved = x[j];
          x[j] = candidate;
          const double value = eval_counted(x);
          if (value < fx) {
            fx = value;
            break;
          }
          x[j] = saved;
          if (budget <= 0) break;
        }
      }
      return fx;
    };

    std::vector<double> base = result.best_x;
    double base_value = result.best_value;
    while (budget > 0) {
      std::vector<double> trial = base;
      double trial_value = explore(trial, base_value);
      if (trial_value < base_value) {
        // Chain pattern moves while each extrapolated-and-explored point
        // keeps improving.
        while (budget > 0) {
          std::vector<double> pattern(dim);
          for (std::size_t j = 0; j < dim; ++j)
            pattern[j] = std::clamp(2.0 * trial[j] - base[j], lower[j],
                                    upper[j]);
          double pattern_value = eval_counted(pattern);
          if (budget > 0) pattern_value = explore(pattern, pattern_value);
          if (pattern_value < trial_value) {
            base = std::move(trial);
            trial = std::move(pattern);
            trial_value = pattern_value;
          } else {
            break;
          }
        }
        base = std::move(trial);
        base_value = trial_value;
      } else {
        double max_step_frac = 0.0;
        for (std::size_t j = 0; j < dim; ++j)
          if (range[j] > 0.0)
            max_step_frac = std::max(max_step_frac, step[j] / range[j]);
        if (max_step_frac < min_step_frac) break;
        for (auto& s : step) s *= 0.5;
      }
    }
    result.history.push_back(result.best_value);
  }
  return result;
}

}  // namespace accsim
