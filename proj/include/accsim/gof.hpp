#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "accsim/errors.hpp"
#include "accsim/series.hpp"
#include "accsim/simulator.hpp"

namespace accsim {

enum class GofKind { RmseS, RmseV, TheilUSv, TheilUSva, NrmseSv, NrmseSva };

inline GofKind gof_kind_from_string(const std::string& name) {
  if (name == "RMSE_s") return GofKind::RmseS;
  if (name == "RMSE_v") return GofKind::RmseV;
  if (name == "TheilU_sv") return GofKind::TheilUSv;
  if (name == "TheilU_sva") return GofKind::TheilUSva;
  if (name == "NRMSE_sv") return GofKind::NrmseSv;
  if (name == "NRMSE_sva") return GofKind::NrmseSva;
  throw ConfigError("unknown GoF kind '" + name + "'");
}

inline std::string to_string(GofKind kind) {
  switch (kind) {
    case GofKind::RmseS: return "RMSE_s";
    case GofKind::RmseV: return "RMSE_v";
    case GofKind::TheilUSv: return "TheilU_sv";
    case GofKind::TheilUSva: return "TheilU_sva";
    case GofKind::NrmseSv: return "NRMSE_sv";
    case GofKind::NrmseSva: return "NRMSE_sva";
  }
  return "?";
}

struct GofConfig {
  GofKind kind = GofKind::NrmseSva;
  double beta_0 = 1.0;  // spacing weight
  double beta_1 = 1.0;  // speed weight
  double beta_2 = 1.0;  // acceleration weight
  // Additional floor on the first compared sample; the simulation's own
  // tau_p window start is combined with it at evaluation time.
  std::size_t start_index = 1;
};

// Default collision penalty: larger than any attainable GoF value.
inline constexpr double kCollisionPenalty = 1e10;

namespace detail {

inline void check_window(std::size_t sim_size, std::size_t obs_size,
                         std::size_t start) {
  if (sim_size != obs_size)
    throw std::invalid_argument("gof: series lengths differ (" +
                                std::to_string(sim_size) + " vs " +
                                std::to_string(obs_size) + ")");
  if (start >= sim_size)
    throw std::invalid_argument("gof: start index leaves no samples");
}

inline double rms(const std::vector<double>& y, std::size_t start) {
  double sum = 0.0;
  for (std::size_t i = start; i < y.size(); ++i) sum += y[i] * y[i];
  return std::sqrt(sum / static_cast<double>(y.size() - start));
}

}  // namespace detail

// Root mean square of sim-obs residuals over indices >= start; the averaging
// window is shared with the normalizers below.
inline double rmse(const std::vector<double>& sim,
                   const std::vector<double>& obs, std::size_t start) {
  detail::check_window(sim.size(), obs.size(), start);
  double sum = 0.0;
  for (std::size_t i = start; i < sim.size(); ++i) {
    const double r = sim[i] - obs[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(sim.size() - start));
}

inline double nrmse(const std::vector<double>& sim,
                    const std::vector<double>& obs, std::size_t start) {
  const double err = rmse(sim, obs, start);
  const double level = detail::rms(obs, start);
  if (level == 0.0)
    throw DegenerateInputError("nrmse: observed RMS level is zero");
  return err / level;
}

// Theil inequality coefficient per channel: RMSE over the sum of the two RMS
// levels, bounded in [0, 1].
inline double theil_u(const std::vector<double>& sim,
                      const std::vector<double>& obs, std::size_t start) {
  const double err = rmse(sim, obs, start);
  const double denom = detail::rms(sim, start) + detail::rms(obs, start);
  if (denom == 0.0)
    throw DegenerateInputError("theil_u: both RMS levels are zero");
  return err / denom;
}

struct Channel {
  const std::vector<double>* sim = nullptr;
  const std::vector<double>* obs = nullptr;
};

inline double theil_u_multi(const std::vector<Channel>& channels,
                            std::size_t start) {
  double sum = 0.0;
  for (const auto& ch : channels) sum += theil_u(*ch.sim, *ch.obs, start);
  return sum;
}

// Observed comparison channels aligned with a SimResult.
struct ObservedChannels {
  std::vector<double> spacing;
  std::vector<double> v;
  std::vector<double> a;

  static ObservedChannels from_data(const KinematicSeries& leader,
                                    const KinematicSeries& follower,
                                    double leader_length) {
    ObservedChannels obs;
    obs.spacing = spacing_series(leader, follower, leader_length);
    obs.v = follower.v;
    obs.a = follower.a;
    return obs;
  }
};

inline double nrmse_sva(const SimResult& sim, const ObservedChannels& obs,
                        double beta_0, double beta_1, double beta_2,
                        std::size_t start) {
  return beta_0 * nrmse(sim.spacing, obs.spacing, start) +
         beta_1 * nrmse(sim.follower.v, obs.v, start) +
         beta_2 * nrmse(sim.follower.a, obs.a, start);
}

// Configured GoF of a collision-free result. The compared window starts at
// the later of the config floor and the simulation's tau_p window end.
inline double evaluate_gof(const SimResult& sim, const ObservedChannels& obs,
                           const GofConfig& cfg) {
  const std::size_t start = std::max(cfg.start_index, sim.gof_start_index);
  switch (cfg.kind) {
    case GofKind::RmseS: return rmse(sim.spacing, obs.spacing, start);
    case GofKind::RmseV: return rmse(sim.follower.v, obs.v, start);
    case GofKind::TheilUSv:
      return theil_u(sim.spacing, obs.spacing, start) +
             theil_u(sim.follower.v, obs.v, start);
    case GofKind::TheilUSva:
      return theil_u(sim.spacing, obs.spacing, start) +
             theil_u(sim.follower.v, obs.v, start) +
             theil_u(sim.follower.a, obs.a, start);
    case GofKind::NrmseSv:
      return nrmse(sim.spacing, obs.spacing, start) +
             nrmse(sim.follower.v, obs.v, start);
    case GofKind::NrmseSva:
      return nrmse_sva(sim, obs, cfg.beta_0, cfg.beta_1, cfg.beta_2, start);
  }
  throw ConfigError("evaluate_gof: unknown kind");
}

// A colliding run scores the flat penalty regardless of collision time.
inline double penalized_objective(const SimResult& sim,
                                  const ObservedChannels& obs,
                                  const GofConfig& cfg,
                                  double penalty_value = kCollisionPenalty) {
  if (sim.collision) return penalty_value;
  return evaluate_gof(sim, obs, cfg);
}

// Per-channel error breakdown reported with calibration results.
struct MopErrors {
  double rmse_s = 0.0;
  double rmse_v = 0.0;
  double rmse_a = 0.0;
  double nrmse_s = 0.0;
  double nrmse_v = 0.0;
  double nrmse_a = 0.0;
};

inline MopErrors per_mop_errors(const SimResult& sim,
                                const ObservedChannels& obs,
                                std::size_t start_floor = 1) {
  const std::size_t start = std::max(start_floor, sim.gof_start_index);
  MopErrors e;
  e.rmse_s = rmse(sim.spacing, obs.spacing, start);
  e.rmse_v = rmse(sim.follower.v, obs.v, start);
  e.rmse_a = rmse(sim.follower.a, obs.a, start);
  e.nrmse_s = nrmse(sim.spacing, obs.spacing, start);
  e.nrmse_v = nrmse(sim.follower.v, obs.v, start);
  e.nrmse_a = nrmse(sim.follower.a, obs.a, start);
  return e;
}

}  // namespace accsim
