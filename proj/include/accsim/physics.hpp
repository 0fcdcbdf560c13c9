#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accsim/controllers.hpp"
#include "accsim/errors.hpp"

namespace accsim {

// First-order lag state: realized acceleration for linear dynamics, tractive
// acceleration a_t for nonlinear dynamics. Zero at simulation start.
struct DynamicsState {
  double a_lag = 0.0;
};

inline double dynamics_none(double a_cmd) { return a_cmd; }

// Exact zero-order-hold step of tau*da/dt + a = a_cmd. Exact for commands
// held constant over the step, so dt does not bias the calibrated tau.
inline double lag_step(double prev, double a_cmd, double tau, double dt) {
  if (!(tau > 0.0)) throw ConfigError("lag_step: tau must be > 0");
  return a_cmd + (prev - a_cmd) * std::exp(-dt / tau);
}

inline std::pair<double, DynamicsState> dynamics_linear_step(
    const DynamicsState& state, double a_cmd, double tau_a, double dt) {
  const double a_f = lag_step(state.a_lag, a_cmd, tau_a, dt);
  return {a_f, DynamicsState{a_f}};
}

struct NonlinearDynamicsConfig {
  double tau_a = 0.0;    // actuation lag (s)
  double m_0 = 2000.0;   // unladen mass (kg)
  double m_load = 0.0;   // load mass (kg)
  double f_0 = 0.0;      // road load constant term (N)
  double f_1 = 0.0;      // road load linear term (kg/s)
  double f_2 = 0.0;      // road load quadratic term (kg/m)
  double phi_e = 1.05;   // equivalent inertial mass factor (-)
  double g = 9.81;       // gravity (m/s^2)
  double r_w = 0.3;      // wheel radius (m); informational, the wheel torque
                         // cancels out of the tractive force

  double m_f() const { return m_0 + m_load; }
};

// Driveline lag on the tractive acceleration plus road loads. Written as
// a_f = (a_t - F_r/m_f)/phi_e so that zero road loads with phi_e = 1 reduce
// bitwise to the linear-dynamics step.
inline std::pair<double, DynamicsState> dynamics_nonlinear_step(
    const DynamicsState& state, double a_cmd,
    const NonlinearDynamicsConfig& cfg, double v_f, double alpha, double dt) {
  if (!(cfg.m_f() > 0.0))
    throw ConfigError("dynamics_nonlinear_step: vehicle mass must be > 0");
  const double a_t = lag_step(state.a_lag, a_cmd, cfg.tau_a, dt);
  const double road_load =
      (cfg.f_0 * std::cos(alpha) + cfg.f_1 * v_f + cfg.f_2 * v_f * v_f) /
          cfg.m_f() +
      cfg.g * std::sin(alpha);
  const double a_f = (a_t - road_load) / cfg.phi_e;
  return {a_f, DynamicsState{a_t}};
}

inline double constrain_none(double a_f) { return a_f; }

inline double constrain_constant(double a_f, double a_lb, double a_ub) {
  if (!(a_lb < a_ub))
    throw ConfigError("constrain_constant: lower bound must be below upper");
  return std::clamp(a_f, a_lb, a_ub);
}

// Speed-indexed acceleration/deceleration envelope. Piecewise-linear in
// speed, held constant beyond the grid ends.
struct MfcCurves {
  struct Point {
    double v = 0.0;
    double a_ap = 0.0;  // acceleration potential, > 0
    double a_dp = 0.0;  // deceleration potential, < 0
  };
  std::vector<Point> points;

  void validate() const {
    if (points.empty()) throw ConfigError("MfcCurves: empty grid");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && !(points[i].v > points[i - 1].v))
        throw ConfigError("MfcCurves: speed grid must be strictly increasing");
      if (!(points[i].a_ap > 0.0) || !(points[i].a_dp < 0.0))
        throw ConfigError("MfcCurves: need a_dp < 0 < a_ap on the whole grid");
    }
  }

  std::pair<double, double> envelope(double v) const {
    if (points.empty()) throw ConfigError("MfcCurves: empty grid");
    if (v <= points.front().v)
      return {points.front().a_ap, points.front().a_dp};
    if (v >= points.back().v) return {points.back().a_ap, points.back().a_dp};
    std::size_t hi = 1;
    while (points[hi].v < v) ++hi;
    const auto& l = points[hi - 1];
    const auto& r = points[hi];
    const double w = (v - l.v) / (r.v - l.v);
    return {l.a_ap + w * (r.a_ap - l.a_ap), l.a_dp + w * (r.a_dp - l.a_dp)};
  }

  double a_ap(double v) const { return envelope(v).first; }
  double a_dp(double v) const { return envelope(v).second; }

  // Placeholder passenger-car envelope; data/mfc_default.json carries the
  // same values as an editable asset.
  static MfcCurves default_curves() {
    return MfcCurves{{{0.0, 4.0, -6.0},
                      {10.0, 3.0, -6.5},
                      {30.0, 1.5, -6.5},
                      {50.0, 0.8, -6.0}}};
  }

  static MfcCurves from_json(const nlohmann::json& j) {
    MfcCurves curves;
    for (const auto& jp : j)
      curves.points.push_back(Point{jp.at("v").get<double>(),
                                    jp.at("a_ap").get<double>(),
                                    jp.at("a_dp").get<double>()});
    curves.validate();
    return curves;
  }

  static MfcCurves load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open MFC curves file " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("MFC curves JSON: ") + e.what());
    }
    return from_json(j);
  }
};

inline double constrain_mfc(double a_f, double v_f, const MfcCurves& curves) {
  const auto [ap, dp] = curves.envelope(v_f);
  return std::clamp(a_f, dp, ap);
}

// Ring buffer of perceived states on the simulation grid, used to serve the
// controller inputs delayed by tau_p.
class DelayBuffer {
 public:
  DelayBuffer(double tau_p, double dt)
      : tau_p_(tau_p), dt_(dt) {
    if (tau_p < 0.0) throw ConfigError("DelayBuffer: tau_p must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("DelayBuffer: dt must be > 0");
    capacity_ = static_cast<std::size_t>(std::ceil(tau_p / dt)) + 2;
    times_.resize(capacity_);
    states_.resize(capacity_);
  }

  double tau_p() const { return tau_p_; }

  void push(double t, const PerceivedState& st) {
    const std::size_t slot = next_ % capacity_;
    times_[slot] = t;
    states_[slot] = st;
    ++next_;
  }

  bool empty() const { return next_ == 0; }

  // State at time t - tau_p, linearly interpolated between the bracketing
  // grid samples; times before the oldest retained sample hold that sample.
  PerceivedState sample(double t) const {
    if (empty()) throw StateError("DelayBuffer: query on empty buffer");
    const std::size_t count = std::min(next_, capacity_);
    const std::size_t newest = next_ - 1;
    const std::size_t oldest = next_ - count;
    const double query = t - tau_p_;
    const double t_new = times_[newest % capacity_];
    if (query >= t_new) return states_[newest % capacity_];
    const double t_old = times_[oldest % capacity_];
    if (query <= t_old) return states_[oldest % capacity_];
    // Grid arithmetic: steps back from the newest sample. Snap to the grid
    // when the query sits on it (within FP jitter) so grid-aligned delays
    // return stored samples exactly.
    const double back = (t_new - query) / dt_;
    const double snapped = std::round(back);
    if (std::abs(back - snapped) < 1e-9) {
      std::size_t steps = static_cast<std::size_t>(snapped);
      if (steps > count - 1) steps = count - 1;
      return states_[(newest - steps) % capacity_];
    }
    std::size_t steps = static_cast<std::size_t>(std::floor(back));
    if (steps >= count - 1) steps = count - 2;
    const std::size_t hi = newest - steps;
    const std::size_t lo = hi - 1;
    const double w = (query - times_[lo % capacity_]) / dt_;
    const auto& a = states_[lo % capacity_];
    const auto& b = states_[hi % capacity_];
    return PerceivedState{a.v_f + w * (b.v_f - a.v_f), a.s + w * (b.s - a.s),
                          a.dv + w * (b.dv - a.dv)};
  }

 private:
  double tau_p_;
  double dt_;
  std::size_t capacity_ = 0;
  std::size_t next_ = 0;  // total pushes; newest sample is next_-1
  std::vector<double> times_;
  std::vector<PerceivedState> states_;
};

inline PerceivedState perceive(const DelayBuffer& buffer, double t) {
  return buffer.sample(t);
}

}  // namespace accsim
