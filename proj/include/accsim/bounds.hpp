#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accsim/errors.hpp"
#include "accsim/models.hpp"

namespace accsim {

// The four follower types of the field dataset. Road-load coefficient bounds
// are vehicle-specific; everything else is shared.
enum class VehicleType { Tesla, Bmw, AudiA6, Mercedes };

inline const std::vector<VehicleType>& all_vehicle_types() {
  static const std::vector<VehicleType> types = {
      VehicleType::Tesla, VehicleType::Bmw, VehicleType::AudiA6,
      VehicleType::Mercedes};
  return types;
}

inline std::string to_string(VehicleType type) {
  switch (type) {
    case VehicleType::Tesla: return "Tesla";
    case VehicleType::Bmw: return "BMW";
    case VehicleType::AudiA6: return "AudiA6";
    case VehicleType::Mercedes: return "Mercedes";
  }
  return "?";
}

inline VehicleType vehicle_type_from_string(const std::string& name) {
  if (name == "Tesla") return VehicleType::Tesla;
  if (name == "BMW") return VehicleType::Bmw;
  if (name == "AudiA6") return VehicleType::AudiA6;
  if (name == "Mercedes") return VehicleType::Mercedes;
  throw ConfigError("unknown vehicle type '" + name + "'");
}

// Box bounds per parameter name. An entry with lower == upper pins the
// parameter to that value (the optimizer holds the gene fixed).
class ParameterBounds {
 public:
  using Interval = std::pair<double, double>;

  void set(const std::string& name, double lower, double upper) {
    if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
      throw ConfigError("bounds for '" + name + "': need lower <= upper");
    bounds_[name] = {lower, upper};
  }

  bool has(const std::string& name) const { return bounds_.count(name) > 0; }

  const Interval& get(const std::string& name) const {
    const auto it = bounds_.find(name);
    if (it == bounds_.end())
      throw ConfigError("no bounds for parameter '" + name + "'");
    return it->second;
  }

  const std::map<std::string, Interval>& entries() const { return bounds_; }

  // Bound vectors in the order of a model's parameter list; throws if a
  // required name is missing.
  std::pair<std::vector<double>, std::vector<double>> vectors(
      const std::vector<std::string>& names) const {
    std::vector<double> lower, upper;
    lower.reserve(names.size());
    upper.reserve(names.size());
    for (const auto& name : names) {
      const auto& iv = get(name);
      lower.push_back(iv.first);
      upper.push_back(iv.second);
    }
    return {std::move(lower), std::move(upper)};
  }

  // Calibration defaults. Road-load coefficient bounds depend on the vehicle
  // type; omit it only for models without nonlinear dynamics.
  static ParameterBounds defaults(
      std::optional<VehicleType> vehicle = std::nullopt) {
    ParameterBounds b;
    b.set("delta", 0.1, 10.0);
    b.set("v0", 30.0, 35.0);
    b.set("d0", 1.0, 5.0);
    b.set("t_h", 0.1, 3.0);
    b.set("a_max", 0.5, 5.0);
    b.set("a_min", -5.0, -0.5);
    b.set("a_min_hat", -5.0, -0.5);
    b.set("theta", 0.0, 3.0);
    b.set("tau_a", 0.3, 0.8);
    b.set("tau_p", 0.1, 0.8);
    b.set("m_load", 230.0, 300.0);
    b.set("k_s", 0.01, 5.0);
    b.set("k_v", 0.01, 5.0);
    b.set("k_0", 0.01, 5.0);
    if (vehicle) {
      switch (*vehicle) {
        case VehicleType::Tesla:
          b.set("f_0", 185.1, 226.3);
          b.set("f_1", 0.0, 0.0);  // pinned: measured range collapses to 0
          b.set("f_2", 0.025, 0.031);
          break;
        case VehicleType::Bmw:
          b.set("f_0", 190.3, 232.6);
          b.set("f_1", -0.63, -0.52);
          b.set("f_2", 0.042, 0.051);
          break;
        case VehicleType::AudiA6:
          b.set("f_0", 154.9, 189.4);
          b.set("f_1", 0.64, 0.78);
          b.set("f_2", 0.026, 0.031);
          break;
        case VehicleType::Mercedes:
          b.set("f_0", 139.5, 170.4);
          b.set("f_1", 0.56, 0.69);
          b.set("f_2", 0.027, 0.033);
          break;
      }
    }
    return b;
  }

  // Overlay entries from JSON: {"name": [lower, upper], ...}.
  void merge_json(const nlohmann::json& j) {
    for (const auto& [name, value] : j.items()) {
      if (!value.is_array() || value.size() != 2)
        throw ConfigError("bounds for '" + name + "': expected [lower, upper]");
      set(name, value[0].get<double>(), value[1].get<double>());
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, iv] : bounds_) j[name] = {iv.first, iv.second};
    return j;
  }

 private:
  std::map<std::string, Interval> bounds_;
};

}  // namespace accsim
