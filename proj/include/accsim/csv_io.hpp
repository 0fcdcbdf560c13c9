#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "accsim/trajectory.hpp"

namespace accsim {

// Column map for one vehicle in a platoon CSV. Empty column names fall back
// to the `<id>_x` / `<id>_v` / `<id>_a` convention.
struct VehicleSchema {
  std::string id;
  std::string x_col;
  std::string v_col;
  std::string a_col;
  std::optional<double> length;
  std::string type;  // vehicle type label for bound lookup; may be empty
};

struct PlatoonSchema {
  std::string platoon_id;
  std::string time_col = "time";
  std::string slope_col = "slope";
  std::vector<VehicleSchema> vehicles;  // empty = infer from header

  static PlatoonSchema from_json(const nlohmann::json& j) {
    PlatoonSchema schema;
    schema.platoon_id = j.value("platoon_id", std::string());
    schema.time_col = j.value("time", std::string("time"));
    schema.slope_col = j.value("slope", std::string("slope"));
    if (j.contains("vehicles")) {
      for (const auto& jv : j.at("vehicles")) {
        VehicleSchema veh;
        veh.id = jv.at("id").get<std::string>();
        veh.x_col = jv.value("x", std::string());
        veh.v_col = jv.value("v", std::string());
        veh.a_col = jv.value("a", std::string());
        if (jv.contains("length") && !jv.at("length").is_null())
          veh.length = jv.at("length").get<double>();
        veh.type = jv.value("type", std::string());
        schema.vehicles.push_back(std::move(veh));
      }
    }
    return schema;
  }

  static PlatoonSchema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("schema file not found: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("schema " + path + ": " + e.what());
    }
    return from_json(j);
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim whitespace and stray carriage returns.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos
                         ? std::string()
                         : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& field, std::size_t line_no,
                           const std::string& col) {
  try {
    std::size_t pos = 0;
    const double value = std::stod(field, &pos);
    if (pos != field.size())
      throw ParseError("line " + std::to_string(line_no) +
                       ": trailing characters in column '" + col + "'");
    return value;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": cannot parse '" + field + "' in column '" + col + "'");
  }
}

}  // namespace detail

// Reads a platoon CSV: header row with a time column, per-vehicle position
// and speed columns (acceleration optional) and an optional slope column.
// Timestamps must lie on a uniform grid within kTimeGridJitter; they are
// canonicalized to t0 + i*dt on load.
inline PlatoonTrajectory load_platoon(const std::string& path,
                                      const PlatoonSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  const auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

  const auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = col_index.find(name);
    if (it == col_index.end()) return std::nullopt;
    return it->second;
  };

  const auto time_idx = find_col(schema.time_col);
  if (!time_idx)
    throw FormatError(path + ": missing time column '" + schema.time_col + "'");

  // Resolve the vehicle list: explicit schema, or every `<id>_x` header
  // column in order of appearance.
  std::vector<VehicleSchema> vehicles = schema.vehicles;
  if (vehicles.empty()) {
    for (const auto& name : header) {
      if (name.size() > 2 && name.compare(name.size() - 2, 2, "_x") == 0) {
        VehicleSchema veh;
        veh.id = name.substr(0, name.size() - 2);
        vehicles.push_back(std::move(veh));
      }
    }
    if (vehicles.empty())
      throw FormatError(path + ": no '<id>_x' columns and no schema given");
  }

  struct ResolvedVehicle {
    VehicleSchema schema;
    std::size_t x = 0, v = 0;
    std::optional<std::size_t> a;
  };
  std::vector<ResolvedVehicle> resolved;
  for (auto& veh : vehicles) {
    ResolvedVehicle rv;
    rv.schema = veh;
    const std::string x_col = veh.x_col.empty() ? veh.id + "_x" : veh.x_col;
    const std::string v_col = veh.v_col.empty() ? veh.id + "_v" : veh.v_col;
    const std::string a_col = veh.a_col.empty() ? veh.id + "_a" : veh.a_col;
    const auto xi = find_col(x_col);
    const auto vi = find_col(v_col);
    if (!xi || !vi)
      throw FormatError(path + ": vehicle '" + veh.id + "' needs columns '" +
                        x_col + "' and '" + v_col + "'");
    rv.x = *xi;
    rv.v = *vi;
    rv.a = find_col(a_col);
    resolved.push_back(std::move(rv));
  }
  const auto slope_idx = find_col(schema.slope_col);

  PlatoonTrajectory traj;
  traj.platoon_id = schema.platoon_id.empty()
                        ? std::filesystem::path(path).stem().string()
                        : schema.platoon_id;
  for (const auto& rv : resolved) {
    PlatoonVehicle veh;
    veh.id = rv.schema.id;
    veh.length = rv.schema.length.value_or(kDefaultVehicleLength);
    veh.default_length_used = !rv.schema.length.has_value();
    traj.vehicles.push_back(std::move(veh));
  }
  std::vector<double> times;
  std::vector<double> slope;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    times.push_back(
        detail::parse_number(fields[*time_idx], line_no, schema.time_col));
    for (std::size_t k = 0; k < resolved.size(); ++k) {
      auto& series = traj.vehicles[k].series;
      const auto& rv = resolved[k];
      series.x.push_back(
          detail::parse_number(fields[rv.x], line_no, header[rv.x]));
      series.v.push_back(
          detail::parse_number(fields[rv.v], line_no, header[rv.v]));
      if (rv.a)
        series.a.push_back(
            detail::parse_number(fields[*rv.a], line_no, header[*rv.a]));
    }
    if (slope_idx)
      slope.push_back(
          detail::parse_number(fields[*slope_idx], line_no, schema.slope_col));
  }
  if (times.size() < 2) throw FormatError(path + ": needs at least 2 rows");

  double dt =
      (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw FormatError(path + ": non-increasing time column");
  // Prefer the shortest decimal step that explains every timestamp; recorded
  // logs carry per-row jitter the raw differences would otherwise bake into
  // the canonical grid.
  for (int decimals = 0; decimals <= 9; ++decimals) {
    const double scale = std::pow(10.0, decimals);
    const double rounded = std::round(dt * scale) / scale;
    if (!(rounded > 0.0)) continue;
    bool consistent = true;
    for (std::size_t i = 0; i < times.size() && consistent; ++i)
      consistent =
          std::abs(times[i] - (times[0] + static_cast<double>(i) * rounded)) <=
          kTimeGridJitter;
    if (consistent) {
      dt = rounded;
      break;
    }
  }
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - (times[0] + static_cast<double>(i) * dt)) >
        kTimeGridJitter)
      throw FormatError(path + ": non-uniform time grid at row " +
                        std::to_string(i + 2));
  std::vector<double> grid(times.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = times[0] + static_cast<double>(i) * dt;

  traj.dt = dt;
  for (auto& veh : traj.vehicles) {
    veh.series.dt = dt;
    veh.series.t = grid;
  }
  if (slope_idx) traj.slope = std::move(slope);
  traj.validate();
  return traj;
}

inline PlatoonTrajectory load_platoon(const std::string& path,
                                      const std::string& schema_path) {
  return load_platoon(path, PlatoonSchema::load(schema_path));
}

// Writes the same CSV dialect load_platoon reads.
inline void save_platoon(const PlatoonTrajectory& traj,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out.precision(12);
  out << "time";
  for (const auto& veh : traj.vehicles) {
    out << ',' << veh.id << "_x," << veh.id << "_v";
    if (veh.series.has_acceleration()) out << ',' << veh.id << "_a";
  }
  if (traj.slope) out << ",slope";
  out << '\n';
  const std::size_t n = traj.vehicles.empty() ? 0 : traj.vehicles[0].series.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << traj.vehicles[0].series.t[i];
    for (const auto& veh : traj.vehicles) {
      out << ',' << veh.series.x[i] << ',' << veh.series.v[i];
      if (veh.series.has_acceleration()) out << ',' << veh.series.a[i];
    }
    if (traj.slope) out << ',' << (*traj.slope)[i];
    out << '\n';
  }
}

}  // namespace accsim
