#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "accsim/errors.hpp"

namespace accsim {

// Tolerated jitter when checking that file timestamps lie on a uniform grid.
inline constexpr double kTimeGridJitter = 1e-6;

// Uniformly sampled kinematics of one vehicle. All channels share the time
// grid t[i] = t0 + i*dt. The acceleration channel may be empty until
// derive_consistent() fills it.
struct KinematicSeries {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> a;

  std::size_t size() const { return t.size(); }

  bool has_acceleration() const { return a.size() == t.size(); }

  // Structural checks: lengths, grid uniformity, non-negative speeds.
  void validate(const std::string& label = "series") const {
    if (t.size() < 2) throw DataError(label + ": needs at least 2 samples");
    if (!(dt > 0.0)) throw DataError(label + ": dt must be > 0");
    if (x.size() != t.size() || v.size() != t.size())
      throw DataError(label + ": channel lengths differ");
    if (!a.empty() && a.size() != t.size())
      throw DataError(label + ": acceleration channel length differs");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (std::abs(t[i] - (t[0] + static_cast<double>(i) * dt)) > kTimeGridJitter)
        throw FormatError(label + ": non-uniform time grid at sample " +
                          std::to_string(i));
      if (v[i] < 0.0)
        throw DataError(label + ": negative speed at sample " +
                        std::to_string(i));
    }
  }
};

inline bool same_grid(const KinematicSeries& a, const KinematicSeries& b) {
  return a.size() == b.size() && a.dt == b.dt && !a.t.empty() &&
         std::abs(a.t[0] - b.t[0]) <= kTimeGridJitter;
}

// s(t) = x_l(t) - x_f(t) - L, pointwise on a shared grid.
inline std::vector<double> spacing_series(const KinematicSeries& leader,
                                          const KinematicSeries& follower,
                                          double length) {
  if (!same_grid(leader, follower))
    throw std::invalid_argument("spacing_series: time grids differ");
  std::vector<double> s(leader.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = leader.x[i] - follower.x[i] - length;
  return s;
}

// Keeps every factor-th sample starting at index 0; dt scales by factor.
inline KinematicSeries decimate(const KinematicSeries& in, int factor) {
  if (factor <= 0) throw std::invalid_argument("decimate: factor must be >= 1");
  if (in.size() <= static_cast<std::size_t>(factor))
    throw std::invalid_argument("decimate: series shorter than factor");
  KinematicSeries out;
  out.dt = in.dt * static_cast<double>(factor);
  for (std::size_t i = 0; i < in.size(); i += static_cast<std::size_t>(factor)) {
    out.t.push_back(in.t[i]);
    out.x.push_back(in.x[i]);
    out.v.push_back(in.v[i]);
    if (in.has_acceleration()) out.a.push_back(in.a[i]);
  }
  return out;
}

// Makes the series exactly consistent with the ballistic update scheme:
// speed is the primary channel, a(t) = (v(t) - v(t-dt))/dt with a(t0) = 0,
// and x is re-integrated by the trapezoid rule from the observed x(0).
inline KinematicSeries derive_consistent(const KinematicSeries& in) {
  if (in.size() < 2 || in.v.size() != in.t.size())
    throw DataError("derive_consistent: speed channel required");
  for (std::size_t i = 0; i < in.v.size(); ++i)
    if (in.v[i] < 0.0)
      throw DataError("derive_consistent: negative speed at sample " +
                      std::to_string(i));
  KinematicSeries out = in;
  out.a.assign(in.size(), 0.0);
  out.x.assign(in.size(), in.x.empty() ? 0.0 : in.x[0]);
  for (std::size_t i = 1; i < in.size(); ++i) {
    out.a[i] = (in.v[i] - in.v[i - 1]) / in.dt;
    out.x[i] = out.x[i - 1] + 0.5 * (in.v[i] + in.v[i - 1]) * in.dt;
  }
  return out;
}

}  // namespace accsim
