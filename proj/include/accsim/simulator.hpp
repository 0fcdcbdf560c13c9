#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accsim/controllers.hpp"
#include "accsim/models.hpp"
#include "accsim/params.hpp"
#include "accsim/physics.hpp"
#include "accsim/series.hpp"
#include "accsim/trajectory.hpp"

namespace accsim {

// Fixed configuration shared by all simulations: constant-constraint bounds,
// the MFC envelope, and the non-calibrated nonlinear-dynamics constants.
struct SimOptions {
  double a_lb = -7.0;  // constant-constraint lower bound (m/s^2)
  double a_ub = 5.0;   // constant-constraint upper bound (m/s^2)
  MfcCurves mfc = MfcCurves::default_curves();
  double phi_e = 1.05;
  double m_0 = 2000.0;
  double g = 9.81;
  double r_w = 0.3;
};

struct CollisionEvent {
  std::size_t index = 0;
  double time = 0.0;
};

struct SimResult {
  KinematicSeries follower;
  std::vector<double> spacing;
  std::vector<double> a_cmd;
  std::optional<CollisionEvent> collision;
  // First sample index outside the [0, tau_p] warm-up window; error measures
  // start comparing here.
  std::size_t gof_start_index = 1;
};

inline std::optional<CollisionEvent> detect_collision(
    const std::vector<double>& spacing, const std::vector<double>& t) {
  if (spacing.empty()) throw std::invalid_argument("detect_collision: empty");
  for (std::size_t i = 0; i < spacing.size(); ++i)
    if (spacing[i] <= 0.0) return CollisionEvent{i, t[i]};
  return std::nullopt;
}

inline std::size_t gof_start_index(double tau_p, double dt) {
  return static_cast<std::size_t>(std::floor(tau_p / dt + 1e-9)) + 1;
}

namespace detail {

// Closed-loop follower simulation with an arbitrary command law. Each step:
// perceive (delayed) -> command -> dynamics -> constraints -> ballistic
// update with the speed floor. This fixed composition order is what the
// pipeline tests assert.
template <typename CommandFn>
SimResult simulate_core(const KinematicSeries& leader, double x_f0, double v_f0,
                        CommandFn&& command, double tau_p, DynamicsKind dynamics,
                        double tau_a, const NonlinearDynamicsConfig& nl_cfg,
                        ConstraintKind constraints, const SimOptions& opts,
                        double leader_length,
                        const std::vector<double>* slope) {
  if (leader.size() < 2)
    throw std::invalid_argument("simulate: leader needs at least 2 samples");
  if (slope && slope->size() != leader.size())
    throw std::invalid_argument("simulate: slope channel length differs");
  const double dt = leader.dt;
  const std::size_t n = leader.size();

  SimResult result;
  result.gof_start_index = gof_start_index(tau_p, dt);
  auto& f = result.follower;
  f.dt = dt;
  f.t = leader.t;
  f.x.reserve(n);
  f.v.reserve(n);
  f.a.reserve(n);
  result.spacing.reserve(n);
  result.a_cmd.reserve(n);

  const double s0 = leader.x[0] - x_f0 - leader_length;
  if (!(s0 > 0.0))
    throw std::invalid_argument("simulate: initial spacing must be > 0");
  f.x.push_back(x_f0);
  f.v.push_back(v_f0);
  f.a.push_back(0.0);
  result.a_cmd.push_back(0.0);
  result.spacing.push_back(s0);

  DelayBuffer buffer(tau_p, dt);
  buffer.push(leader.t[0], PerceivedState{v_f0, s0, leader.v[0] - v_f0});
  DynamicsState state;

  for (std::size_t k = 1; k < n; ++k) {
    const double v_prev = f.v[k - 1];
    const double alpha = slope ? (*slope)[k - 1] : 0.0;

    const PerceivedState perceived = buffer.sample(leader.t[k - 1]);
    const double a_cmd = command(perceived);

    double a_f = a_cmd;
    switch (dynamics) {
      case DynamicsKind::None:
        a_f = dynamics_none(a_cmd);
        break;
      case DynamicsKind::Linear: {
        auto [value, next] = dynamics_linear_step(state, a_cmd, tau_a, dt);
        a_f = value;
        state = next;
        break;
      }
      case DynamicsKind::Nonlinear: {
        auto [value, next] =
            dynamics_nonlinear_step(state, a_cmd, nl_cfg, v_prev, alpha, dt);
        a_f = value;
        state = next;
        break;
      }
    }

    switch (constraints) {
      case ConstraintKind::None:
        a_f = constrain_none(a_f);
        break;
      case ConstraintKind::Constant:
        a_f = constrain_constant(a_f, opts.a_lb, opts.a_ub);
        break;
      case ConstraintKind::Mfc:
        a_f = constrain_mfc(a_f, v_prev, opts.mfc);
        break;
    }

    // Ballistic update. If the step would cross v = 0, record the effective
    // uniform deceleration that stops exactly at the step end; the trapezoid
    // advance then equals the ballistic stopping distance v^2/(2|a|).
    double a_rec = a_f;
    double v_new = v_prev + a_f * dt;
    if (v_new < 0.0) {
      a_rec = v_prev > 0.0 ? -v_prev / dt : 0.0;
      v_new = 0.0;
    }
    const double x_new = f.x[k - 1] + 0.5 * (v_new + v_prev) * dt;
    if (!std::isfinite(a_cmd) || !std::isfinite(a_f) || !std::isfinite(x_new))
      throw NumericalError("simulate: non-finite state at step " +
                           std::to_string(k));

    f.x.push_back(x_new);
    f.v.push_back(v_new);
    f.a.push_back(a_rec);
    result.a_cmd.push_back(a_cmd);

    const double s_new = leader.x[k] - x_new - leader_length;
    result.spacing.push_back(s_new);
    buffer.push(leader.t[k], PerceivedState{v_new, s_new, leader.v[k] - v_new});

    if (s_new <= 0.0) {
      result.collision = CollisionEvent{k, leader.t[k]};
      f.t.resize(k + 1);
      break;
    }
  }
  return result;
}

}  // namespace detail

// Simulates one follower behind a recorded leader under a full model spec.
// Parameters must cover the spec's calibration parameter list.
inline SimResult simulate_follower(const KinematicSeries& leader, double x_f0,
                                   double v_f0, const ModelSpec& spec,
                                   const ParameterSet& params,
                                   double leader_length,
                                   const std::vector<double>* slope = nullptr,
                                   const SimOptions& opts = {}) {
  spec.validate_params(params);
  if (!(params.t_h > 0.0)) throw ConfigError("simulate: t_h must be > 0");
  if (!(params.v0 > 0.0)) throw ConfigError("simulate: v0 must be > 0");
  const bool needs_idm_terms = spec.controller == ControllerKind::Idm ||
                               spec.spacing == SpacingPolicy::IdmDesired;
  if (needs_idm_terms && (!(params.a_max > 0.0) || !(params.a_min < 0.0)))
    throw ConfigError("simulate: need a_max > 0 and a_min < 0");
  const bool needs_gipps_terms = spec.controller == ControllerKind::Gipps ||
                                 spec.spacing == SpacingPolicy::GippsEquilibrium;
  if (needs_gipps_terms &&
      (!(params.a_min < 0.0) || !(params.a_min_hat < 0.0) ||
       !(params.theta >= 0.0)))
    throw ConfigError("simulate: need a_min < 0, a_min_hat < 0, theta >= 0");

  const double tau_p = spec.delay == DelayKind::Constant ? params.tau_p : 0.0;
  NonlinearDynamicsConfig nl_cfg;
  double tau_a = 0.0;
  if (spec.dynamics != DynamicsKind::None) {
    tau_a = params.tau_a;
    if (!(tau_a > 0.0)) throw ConfigError("simulate: tau_a must be > 0");
  }
  if (spec.dynamics == DynamicsKind::Nonlinear) {
    nl_cfg.tau_a = tau_a;
    nl_cfg.m_0 = opts.m_0;
    nl_cfg.m_load = params.m_load;
    nl_cfg.f_0 = params.f_0;
    nl_cfg.f_1 = params.f_1;
    nl_cfg.f_2 = params.f_2;
    nl_cfg.phi_e = opts.phi_e;
    nl_cfg.g = opts.g;
    nl_cfg.r_w = opts.r_w;
  }
  return detail::simulate_core(
      leader, x_f0, v_f0,
      [&spec, &params](const PerceivedState& st) {
        return controller_command(spec, st, params);
      },
      tau_p, spec.dynamics, tau_a, nl_cfg, spec.constraints, opts,
      leader_length, slope);
}

// Test/analysis entry point: same pipeline with an arbitrary command law in
// place of the model controller.
template <typename CommandFn>
SimResult simulate_with_command(const KinematicSeries& leader, double x_f0,
                                double v_f0, CommandFn&& command,
                                double tau_p = 0.0,
                                DynamicsKind dynamics = DynamicsKind::None,
                                double tau_a = 0.0,
                                const NonlinearDynamicsConfig& nl_cfg = {},
                                ConstraintKind constraints = ConstraintKind::None,
                                const SimOptions& opts = {},
                                double leader_length = 0.0,
                                const std::vector<double>* slope = nullptr) {
  return detail::simulate_core(leader, x_f0, v_f0,
                               std::forward<CommandFn>(command), tau_p,
                               dynamics, tau_a, nl_cfg, constraints, opts,
                               leader_length, slope);
}

struct FollowerSetup {
  ModelSpec spec;
  ParameterSet params;
  double leader_length = kDefaultVehicleLength;
  double x_f0 = 0.0;
  double v_f0 = 0.0;
};

// Chains simulate_follower down a platoon: each follower runs behind the
// previous follower's simulated series. A collision truncates every
// downstream run at that time.
inline std::vector<SimResult> simulate_platoon(
    const KinematicSeries& leader, const std::vector<FollowerSetup>& followers,
    const std::vector<double>* slope = nullptr, const SimOptions& opts = {}) {
  std::vector<SimResult> results;
  results.reserve(followers.size());
  KinematicSeries current = leader;
  std::vector<double> current_slope;
  if (slope) current_slope = *slope;
  for (const auto& follower : followers) {
    SimResult result = simulate_follower(
        current, follower.x_f0, follower.v_f0, follower.spec, follower.params,
        follower.leader_length, slope ? &current_slope : nullptr, opts);
    current = result.follower;
    if (slope) current_slope.resize(current.size());
    results.push_back(std::move(result));
  }
  return results;
}

inline void write_sim_result_csv(const SimResult& result,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out.precision(12);
  out << "t,x,v,a,a_cmd,s\n";
  for (std::size_t i = 0; i < result.follower.size(); ++i)
    out << result.follower.t[i] << ',' << result.follower.x[i] << ','
        << result.follower.v[i] << ',' << result.follower.a[i] << ','
        << result.a_cmd[i] << ',' << result.spacing[i] << '\n';
}

inline nlohmann::json sim_result_summary(const SimResult& result) {
  nlohmann::json j;
  j["samples"] = result.follower.size();
  j["gof_start_index"] = result.gof_start_index;
  j["collision"] = result.collision.has_value();
  if (result.collision) {
    j["collision_index"] = result.collision->index;
    j["collision_time"] = result.collision->time;
  }
  return j;
}

}  // namespace accsim
