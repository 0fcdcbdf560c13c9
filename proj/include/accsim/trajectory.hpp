#pragma once

#include <optional>
#include <string>
#include <vector>

#include "accsim/series.hpp"

namespace accsim {

// Used when a schema supplies no vehicle length; flagged in metadata.
inline constexpr double kDefaultVehicleLength = 5.0;

struct PlatoonVehicle {
  std::string id;
  double length = kDefaultVehicleLength;
  bool default_length_used = false;
  KinematicSeries series;
};

// Ordered vehicles on a shared time grid; index 0 is the platoon leader.
// Slope is an optional per-sample road grade channel (rad).
struct PlatoonTrajectory {
  std::string platoon_id;
  double dt = 0.0;
  std::vector<PlatoonVehicle> vehicles;
  std::optional<std::vector<double>> slope;

  const PlatoonVehicle& vehicle(const std::string& id) const {
    for (const auto& veh : vehicles)
      if (veh.id == id) return veh;
    throw std::invalid_argument("platoon " + platoon_id + ": no vehicle '" +
                                id + "'");
  }

  // Position of a vehicle in the platoon order; 0 is the leader.
  std::size_t position(const std::string& id) const {
    for (std::size_t i = 0; i < vehicles.size(); ++i)
      if (vehicles[i].id == id) return i;
    throw std::invalid_argument("platoon " + platoon_id + ": no vehicle '" +
                                id + "'");
  }

  void validate() const {
    if (vehicles.empty()) throw DataError("platoon: no vehicles");
    for (const auto& veh : vehicles) veh.series.validate(veh.id);
    for (std::size_t i = 1; i < vehicles.size(); ++i)
      if (!same_grid(vehicles[0].series, vehicles[i].series))
        throw FormatError("platoon: vehicle '" + vehicles[i].id +
                          "' is not on the shared time grid");
    if (slope && slope->size() != vehicles[0].series.size())
      throw FormatError("platoon: slope channel length differs");
    // Measured platoon data is collision-free; enforce positive spacing
    // between physical neighbours.
    for (std::size_t i = 1; i < vehicles.size(); ++i) {
      const auto s = spacing_series(vehicles[i - 1].series, vehicles[i].series,
                                    vehicles[i - 1].length);
      for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k] <= 0.0)
          throw DataError("platoon: non-positive spacing ahead of '" +
                          vehicles[i].id + "' at sample " + std::to_string(k));
    }
  }
};

inline PlatoonTrajectory decimate(const PlatoonTrajectory& in, int factor) {
  PlatoonTrajectory out;
  out.platoon_id = in.platoon_id;
  out.vehicles.reserve(in.vehicles.size());
  for (const auto& veh : in.vehicles) {
    PlatoonVehicle deci = veh;
    deci.series = decimate(veh.series, factor);
    out.vehicles.push_back(std::move(deci));
  }
  out.dt = out.vehicles.empty() ? in.dt * factor : out.vehicles[0].series.dt;
  if (in.slope) {
    std::vector<double> slope;
    for (std::size_t i = 0; i < in.slope->size();
         i += static_cast<std::size_t>(factor))
      slope.push_back((*in.slope)[i]);
    out.slope = std::move(slope);
  }
  return out;
}

inline PlatoonTrajectory derive_consistent(const PlatoonTrajectory& in) {
  PlatoonTrajectory out = in;
  for (auto& veh : out.vehicles) veh.series = derive_consistent(veh.series);
  return out;
}

}  // namespace accsim
