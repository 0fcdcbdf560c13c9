#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "accsim/errors.hpp"

namespace accsim {

// Named model parameters. Unset fields are NaN; each model variant declares
// which names it requires (see ModelSpec::parameter_names).
struct ParameterSet {
  double delta = nan();      // IDM speed-term exponent (-)
  double v0 = nan();         // set speed (m/s)
  double d0 = nan();         // standstill spacing (m)
  double t_h = nan();        // time headway (s)
  double a_max = nan();      // maximum acceleration (m/s^2)
  double a_min = nan();      // comfort deceleration, negative (m/s^2)
  double a_min_hat = nan();  // estimated leader deceleration, negative (m/s^2)
  double theta = nan();      // Gipps delay factor (s)
  double k_s = nan();        // spacing-error gain (1/s^2)
  double k_v = nan();        // speed-error gain (1/s)
  double k_0 = nan();        // set-speed gain (1/s)
  double tau_p = nan();      // perception delay (s)
  double tau_a = nan();      // actuation lag (s)
  double m_load = nan();     // load mass (kg)
  double f_0 = nan();        // road load constant term (N)
  double f_1 = nan();        // road load linear term (kg/s)
  double f_2 = nan();        // road load quadratic term (kg/m)

  static constexpr double nan() {
    return std::numeric_limits<double>::quiet_NaN();
  }

  static const std::vector<std::string>& known_names() {
    static const std::vector<std::string> names = {
        "delta", "v0",  "d0",  "t_h",   "a_max",  "a_min", "a_min_hat",
        "theta", "k_s", "k_v", "k_0",   "tau_p",  "tau_a", "m_load",
        "f_0",   "f_1", "f_2"};
    return names;
  }

  double& field(std::string_view name) {
    if (name == "delta") return delta;
    if (name == "v0") return v0;
    if (name == "d0") return d0;
    if (name == "t_h") return t_h;
    if (name == "a_max") return a_max;
    if (name == "a_min") return a_min;
    if (name == "a_min_hat") return a_min_hat;
    if (name == "theta") return theta;
    if (name == "k_s") return k_s;
    if (name == "k_v") return k_v;
    if (name == "k_0") return k_0;
    if (name == "tau_p") return tau_p;
    if (name == "tau_a") return tau_a;
    if (name == "m_load") return m_load;
    if (name == "f_0") return f_0;
    if (name == "f_1") return f_1;
    if (name == "f_2") return f_2;
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }

  double get(std::string_view name) const {
    return const_cast<ParameterSet*>(this)->field(name);
  }

  void set(std::string_view name, double value) { field(name) = value; }

  bool has(std::string_view name) const { return std::isfinite(get(name)); }

  static ParameterSet from_json(const nlohmann::json& j) {
    ParameterSet p;
    for (const auto& [key, value] : j.items()) p.set(key, value.get<double>());
    return p;
  }

  // Serializes only the given names (a model's parameter list).
  nlohmann::json to_json(const std::vector<std::string>& names) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& name : names) j[name] = get(name);
    return j;
  }
};

}  // namespace accsim
