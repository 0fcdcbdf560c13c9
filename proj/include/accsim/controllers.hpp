#pragma once

#include <algorithm>
#include <cmath>

#include "accsim/errors.hpp"
#include "accsim/models.hpp"
#include "accsim/params.hpp"

namespace accsim {

// Kinematic inputs as the controller perceives them (possibly delayed).
struct PerceivedState {
  double v_f = 0.0;  // ego speed (m/s)
  double s = 0.0;    // spacing to the leader (m)
  double dv = 0.0;   // relative speed v_l - v_f (m/s)
};

// Desired spacing under a constant time headway.
inline double spacing_cth(double v_f, const ParameterSet& p) {
  return p.d0 + p.t_h * v_f;
}

// IDM desired spacing; the dynamic term is floored at zero so the desired
// spacing never drops below d0.
inline double spacing_idm(double v_f, double dv, const ParameterSet& p) {
  const double dynamic =
      p.t_h * v_f - v_f * dv / (2.0 * std::sqrt(-p.a_max * p.a_min));
  return p.d0 + std::max(0.0, dynamic);
}

// Equilibrium distance-speed relation of the Gipps model.
inline double spacing_gipps_eq(double v_f, const ParameterSet& p) {
  return p.d0 + (p.t_h + p.theta) * v_f -
         0.5 * v_f * v_f * (1.0 / p.a_min - 1.0 / p.a_min_hat);
}

inline double idm_command(const PerceivedState& st, const ParameterSet& p) {
  if (!(st.s > 0.0)) throw std::domain_error("idm_command: spacing must be > 0");
  const double s_des = spacing_idm(st.v_f, st.dv, p);
  const double speed_term = std::pow(st.v_f / p.v0, p.delta);
  const double spacing_term = (s_des / st.s) * (s_des / st.s);
  return p.a_max * (1.0 - speed_term - spacing_term);
}

// Planned speed of the Gipps car-following branch. A negative discriminant
// means no safe speed exists; plan a full stop (returns 0).
inline double gipps_cf_speed(const PerceivedState& st, const ParameterSet& p) {
  const double horizon = p.t_h / 2.0 + p.theta;
  const double radicand =
      p.a_min * p.a_min * horizon * horizon -
      p.a_min * (2.0 * (st.s - p.d0) - p.t_h * st.v_f -
                 st.v_f * st.v_f / p.a_min_hat);
  if (radicand < 0.0) return 0.0;
  return std::max(0.0, p.a_min * horizon + std::sqrt(radicand));
}

inline double gipps_free_speed(double v_f, const ParameterSet& p) {
  return v_f + 2.5 * p.a_max * p.t_h * (1.0 - v_f / p.v0) *
                   std::sqrt(0.025 + v_f / p.v0);
}

inline double gipps_command(const PerceivedState& st, const ParameterSet& p) {
  if (!(st.s > 0.0))
    throw std::domain_error("gipps_command: spacing must be > 0");
  const double v_cmd = std::max(
      0.0, std::min(gipps_free_speed(st.v_f, p), gipps_cf_speed(st, p)));
  return (v_cmd - st.v_f) / p.t_h;
}

// Linear control law: spacing/speed-error feedback capped by the set-speed
// term. The spacing policy supplies s_des.
inline double linear_command(const PerceivedState& st, const ParameterSet& p,
                             SpacingPolicy policy) {
  double s_des = 0.0;
  switch (policy) {
    case SpacingPolicy::Cth: s_des = spacing_cth(st.v_f, p); break;
    case SpacingPolicy::IdmDesired: s_des = spacing_idm(st.v_f, st.dv, p); break;
    case SpacingPolicy::GippsEquilibrium:
      s_des = spacing_gipps_eq(st.v_f, p);
      break;
    case SpacingPolicy::Inherent:
      throw ConfigError("linear_command: no inherent spacing policy");
  }
  return std::min(p.k_v * st.dv - p.k_s * (s_des - st.s),
                  p.k_0 * (p.v0 - st.v_f));
}

inline double controller_command(const ModelSpec& spec,
                                 const PerceivedState& st,
                                 const ParameterSet& p) {
  switch (spec.controller) {
    case ControllerKind::Idm: return idm_command(st, p);
    case ControllerKind::Gipps: return gipps_command(st, p);
    case ControllerKind::Linear: return linear_command(st, p, spec.spacing);
  }
  throw ConfigError("controller_command: unknown controller");
}

}  // namespace accsim
