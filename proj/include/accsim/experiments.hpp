#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accsim/bounds.hpp"
#include "accsim/calibration.hpp"
#include "accsim/csv_io.hpp"
#include "accsim/errors.hpp"
#include "accsim/ga.hpp"
#include "accsim/gof.hpp"
#include "accsim/models.hpp"
#include "accsim/parallel.hpp"
#include "accsim/params.hpp"
#include "accsim/series.hpp"
#include "accsim/simulator.hpp"
#include "accsim/trajectory.hpp"

namespace accsim {

// ---------------------------------------------------------------------------
// Experiment matrix

// One cross-validation cell: calibrate `vehicle` on platoon p_cal, score on
// p_val. p_cal == p_val is a calibration experiment.
struct ExperimentIndex {
  VehicleType vehicle = VehicleType::Tesla;
  int p_cal = 0;
  int p_val = 0;

  bool calibration() const { return p_cal == p_val; }

  friend bool operator==(const ExperimentIndex& a, const ExperimentIndex& b) {
    return a.vehicle == b.vehicle && a.p_cal == b.p_cal && a.p_val == b.p_val;
  }
  friend bool operator<(const ExperimentIndex& a, const ExperimentIndex& b) {
    return std::tie(a.vehicle, a.p_cal, a.p_val) <
           std::tie(b.vehicle, b.p_cal, b.p_val);
  }
};

enum class ExperimentMode { Calibration, Validation };

// Calibration: every (v, p, p). Validation: every (v, p, p') with p != p'.
// 4 vehicles x 7 platoons give 28 and 168 cells respectively.
inline std::vector<ExperimentIndex> build_matrix(
    const std::vector<VehicleType>& vehicles, const std::vector<int>& platoons,
    ExperimentMode mode) {
  std::vector<ExperimentIndex> out;
  for (VehicleType v : vehicles) {
    for (int p : platoons) {
      if (mode == ExperimentMode::Calibration) {
        out.push_back({v, p, p});
      } else {
        for (int q : platoons)
          if (q != p) out.push_back({v, p, q});
      }
    }
  }
  return out;
}

// Follower ordering of the test-track campaign's platoons, positions 2..5.
// Position 1 is always the (externally driven) lead vehicle.
inline std::vector<VehicleType> default_follower_order(int platoon_id) {
  switch (platoon_id) {
    case 1:
    case 2:
      return {VehicleType::AudiA6, VehicleType::Bmw, VehicleType::Mercedes,
              VehicleType::Tesla};
    case 3:
    case 4:
    case 5:
      return {VehicleType::Tesla, VehicleType::Bmw, VehicleType::AudiA6,
              VehicleType::Mercedes};
    case 6:
    case 7:
      return {VehicleType::Mercedes, VehicleType::Bmw, VehicleType::Tesla,
              VehicleType::AudiA6};
    default:
      throw ConfigError("no default follower order for platoon " +
                        std::to_string(platoon_id));
  }
}

// ---------------------------------------------------------------------------
// Small order statistics used by the report tables

namespace stats {

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Linear-interpolation quantile (the numpy default), q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q in [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= xs.size()) return xs.back();
  const double w = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - w) + xs[lo + 1] * w;
}

}  // namespace stats

// ---------------------------------------------------------------------------
// Error normalization across models on a shared trajectory

// Normalizes one trajectory's errors over the minimum across models:
// (x - min) / min. A zero minimum means some model fit perfectly and the
// ratio is undefined; callers fall back to reporting raw values.
inline std::vector<double> normalize_errors(const std::vector<double>& gofs) {
  if (gofs.empty())
    throw DegenerateInputError("normalize_errors: empty input");
  const double lo = *std::min_element(gofs.begin(), gofs.end());
  if (!(lo > 0.0))
    throw DegenerateInputError(
        "normalize_errors: minimum error is zero (perfect fit); report raw "
        "values instead");
  std::vector<double> out;
  out.reserve(gofs.size());
  for (double g : gofs) out.push_back((g - lo) / lo);
  return out;
}

inline std::map<int, double> normalize_errors(
    const std::map<int, double>& by_model) {
  std::vector<double> values;
  values.reserve(by_model.size());
  for (const auto& [id, g] : by_model) values.push_back(g);
  const std::vector<double> norm = normalize_errors(values);
  std::map<int, double> out;
  std::size_t i = 0;
  for (const auto& [id, g] : by_model) out[id] = norm[i++];
  return out;
}

// ---------------------------------------------------------------------------
// Per-run result rows

struct ResultRow {
  int model_id = 0;
  VehicleType vehicle = VehicleType::Tesla;
  int p_cal = 0;
  int p_val = 0;
  std::uint64_t seed = 0;

  bool failed = false;
  std::string error;

  bool collision = false;
  double gof = std::numeric_limits<double>::quiet_NaN();
  MopErrors errors;
  bool has_errors = false;
  ParameterSet params;

  std::vector<double> replicate_objectives;
  double cv = std::numeric_limits<double>::quiet_NaN();
  bool cv_degenerate = false;
  std::size_t evaluations = 0;

  // For validation rows: key of the calibration row that supplied params.
  std::string provenance;

  bool calibration() const { return p_cal == p_val; }

  std::string key() const {
    std::ostringstream os;
    os << model_id << "_" << to_string(vehicle) << "_" << p_cal << "_" << p_val
       << "_" << seed;
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model_id"] = model_id;
    j["vehicle"] = to_string(vehicle);
    j["p_cal"] = p_cal;
    j["p_val"] = p_val;
    j["seed"] = seed;
    j["failed"] = failed;
    if (failed) j["error"] = error;
    j["collision"] = collision;
    if (std::isfinite(gof)) j["gof"] = gof;
    if (has_errors) {
      j["errors"] = {{"rmse_s", errors.rmse_s},   {"rmse_v", errors.rmse_v},
                     {"rmse_a", errors.rmse_a},   {"nrmse_s", errors.nrmse_s},
                     {"nrmse_v", errors.nrmse_v}, {"nrmse_a", errors.nrmse_a}};
    }
    if (!failed) {
      const ModelSpec spec = ModelSpec::from_id(model_id);
      j["params"] = params.to_json(spec.parameter_names());
    }
    if (!replicate_objectives.empty())
      j["replicate_objectives"] = replicate_objectives;
    if (std::isfinite(cv)) j["cv"] = cv;
    j["cv_degenerate"] = cv_degenerate;
    j["evaluations"] = evaluations;
    if (!provenance.empty()) j["provenance"] = provenance;
    return j;
  }

  static ResultRow from_json(const nlohmann::json& j) {
    ResultRow row;
    row.model_id = j.at("model_id").get<int>();
    row.vehicle = vehicle_type_from_string(j.at("vehicle").get<std::string>());
    row.p_cal = j.at("p_cal").get<int>();
    row.p_val = j.at("p_val").get<int>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.failed = j.value("failed", false);
    row.error = j.value("error", std::string());
    row.collision = j.value("collision", false);
    if (j.contains("gof")) row.gof = j["gof"].get<double>();
    if (j.contains("errors")) {
      const auto& e = j["errors"];
      row.errors.rmse_s = e.at("rmse_s").get<double>();
      row.errors.rmse_v = e.at("rmse_v").get<double>();
      row.errors.rmse_a = e.at("rmse_a").get<double>();
      row.errors.nrmse_s = e.at("nrmse_s").get<double>();
      row.errors.nrmse_v = e.at("nrmse_v").get<double>();
      row.errors.nrmse_a = e.at("nrmse_a").get<double>();
      row.has_errors = true;
    }
    if (j.contains("params")) row.params = ParameterSet::from_json(j["params"]);
    if (j.contains("replicate_objectives"))
      row.replicate_objectives =
          j["replicate_objectives"].get<std::vector<double>>();
    if (j.contains("cv")) row.cv = j["cv"].get<double>();
    row.cv_degenerate = j.value("cv_degenerate", false);
    row.evaluations = j.value("evaluations", std::size_t{0});
    row.provenance = j.value("provenance", std::string());
    return row;
  }
};

inline std::string row_key(int model_id, VehicleType vehicle, int p_cal,
                           int p_val, std::uint64_t seed) {
  std::ostringstream os;
  os << model_id << "_" << to_string(vehicle) << "_" << p_cal << "_" << p_val
     << "_" << seed;
  return os.str();
}

inline void save_row_file(const std::filesystem::path& path,
                          const ResultRow& row) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write result row " + path.string());
  out << row.to_json().dump(2) << "\n";
}

inline ResultRow load_row_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read result row " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("result row " + path.string() + ": " + e.what());
  }
  return ResultRow::from_json(j);
}

// ---------------------------------------------------------------------------
// Dataset wiring

// Loaded platoon runs plus the vehicle type occupying each slot. types[k]
// is empty for slots that are never calibrated (the lead vehicle).
struct SweepDataset {
  struct Platoon {
    PlatoonTrajectory traj;
    std::vector<std::optional<VehicleType>> types;
  };
  std::map<int, Platoon> platoons;

  std::vector<int> platoon_ids() const {
    std::vector<int> ids;
    ids.reserve(platoons.size());
    for (const auto& [id, p] : platoons) ids.push_back(id);
    return ids;
  }

  // Vehicle types present in every platoon, in canonical order.
  std::vector<VehicleType> common_vehicles() const {
    std::vector<VehicleType> out;
    for (VehicleType v : all_vehicle_types()) {
      bool everywhere = !platoons.empty();
      for (const auto& [id, p] : platoons) {
        const bool here =
            std::any_of(p.types.begin(), p.types.end(),
                        [v](const auto& t) { return t && *t == v; });
        if (!here) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) out.push_back(v);
    }
    return out;
  }
};

struct FollowerRef {
  const KinematicSeries* leader = nullptr;
  const KinematicSeries* observed = nullptr;
  double leader_length = kDefaultVehicleLength;
  const std::vector<double>* slope = nullptr;
};

inline FollowerRef find_follower(const SweepDataset& ds, VehicleType vehicle,
                                 int platoon) {
  const auto it = ds.platoons.find(platoon);
  if (it == ds.platoons.end())
    throw DataError("platoon " + std::to_string(platoon) + " not in dataset");
  const auto& entry = it->second;
  for (std::size_t k = 0; k < entry.types.size(); ++k) {
    if (!entry.types[k] || *entry.types[k] != vehicle) continue;
    if (k == 0)
      throw DataError("vehicle " + to_string(vehicle) +
                      " occupies the lead slot of platoon " +
                      std::to_string(platoon));
    FollowerRef ref;
    ref.leader = &entry.traj.vehicles[k - 1].series;
    ref.observed = &entry.traj.vehicles[k].series;
    ref.leader_length = entry.traj.vehicles[k - 1].length;
    ref.slope = entry.traj.slope ? &*entry.traj.slope : nullptr;
    return ref;
  }
  throw DataError("vehicle " + to_string(vehicle) + " not found in platoon " +
                  std::to_string(platoon));
}

// Dataset config: {"platoons": [{"id": 1, "file": "P1.csv", "schema": ...,
// "vehicles": [{"column": "v1", "type": "leader"|<vehicle>, "length": ...},
// ...]}]}. Without a "vehicles" array the follower types default to the
// campaign ordering for that platoon id.
inline SweepDataset load_dataset(const nlohmann::json& j,
                                 const std::string& base_dir) {
  if (!j.contains("platoons") || !j["platoons"].is_array() ||
      j["platoons"].empty())
    throw ConfigError("dataset config needs a non-empty 'platoons' array");
  SweepDataset ds;
  for (const auto& pj : j["platoons"]) {
    const int id = pj.at("id").get<int>();
    if (ds.platoons.count(id))
      throw ConfigError("duplicate platoon id " + std::to_string(id));
    auto resolve = [&base_dir](const std::string& file) {
      std::filesystem::path path(file);
      if (path.is_relative() && !base_dir.empty())
        path = std::filesystem::path(base_dir) / path;
      return path.string();
    };
    const std::string file = resolve(pj.at("file").get<std::string>());
    PlatoonTrajectory traj =
        pj.contains("schema")
            ? load_platoon(file, resolve(pj["schema"].get<std::string>()))
            : load_platoon(file);
    traj.platoon_id = std::to_string(id);

    SweepDataset::Platoon entry;
    if (pj.contains("vehicles")) {
      // The config's vehicle list defines the platoon order authoritatively.
      std::vector<PlatoonVehicle> ordered;
      for (const auto& vj : pj["vehicles"]) {
        const std::string column = vj.at("column").get<std::string>();
        PlatoonVehicle veh = traj.vehicle(column);
        if (vj.contains("length")) {
          veh.length = vj["length"].get<double>();
          veh.default_length_used = false;
        }
        ordered.push_back(std::move(veh));
        const std::string type = vj.value("type", std::string("leader"));
        if (type == "leader")
          entry.types.emplace_back(std::nullopt);
        else
          entry.types.emplace_back(vehicle_type_from_string(type));
      }
      traj.vehicles = std::move(ordered);
    } else {
      const auto order = default_follower_order(id);
      if (traj.vehicles.size() != order.size() + 1)
        throw ConfigError("platoon " + std::to_string(id) + ": expected " +
                          std::to_string(order.size() + 1) +
                          " vehicles for the default follower ordering, got " +
                          std::to_string(traj.vehicles.size()));
      entry.types.emplace_back(std::nullopt);
      for (VehicleType v : order) entry.types.emplace_back(v);
    }
    traj.validate();
    entry.traj = std::move(traj);
    ds.platoons.emplace(id, std::move(entry));
  }
  return ds;
}

inline SweepDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset config " + path + ": " + e.what());
  }
  return load_dataset(j, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Sweep configuration

inline GofConfig gof_config_from_json(const nlohmann::json& j) {
  GofConfig cfg;
  if (j.is_string()) {
    cfg.kind = gof_kind_from_string(j.get<std::string>());
    return cfg;
  }
  if (j.contains("kind"))
    cfg.kind = gof_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("beta")) {
    const auto beta = j["beta"].get<std::vector<double>>();
    if (beta.size() != 3)
      throw ConfigError("gof.beta needs exactly 3 weights");
    cfg.beta_0 = beta[0];
    cfg.beta_1 = beta[1];
    cfg.beta_2 = beta[2];
  }
  if (j.contains("start_index"))
    cfg.start_index = j["start_index"].get<std::size_t>();
  return cfg;
}

inline OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  OptimizerConfig cfg;
  if (j.contains("population")) cfg.population = j["population"];
  if (j.contains("max_generations")) cfg.max_generations = j["max_generations"];
  if (j.contains("crossover_rate")) cfg.crossover_rate = j["crossover_rate"];
  if (j.contains("mutation_rate")) cfg.mutation_rate = j["mutation_rate"];
  if (j.contains("mutation_sigma")) cfg.mutation_sigma = j["mutation_sigma"];
  if (j.contains("mutation_sigma_final"))
    cfg.mutation_sigma_final = j["mutation_sigma_final"];
  if (j.contains("elite")) cfg.elite = j["elite"];
  if (j.contains("tournament")) cfg.tournament = j["tournament"];
  if (j.contains("stagnation_window"))
    cfg.stagnation_window = j["stagnation_window"];
  if (j.contains("seed")) cfg.seed = j["seed"];
  if (j.contains("polish_budget")) cfg.polish_budget = j["polish_budget"];
  if (j.contains("threads")) cfg.threads = j["threads"];
  return cfg;
}

struct SweepConfig {
  std::vector<int> model_ids;  // defaults to all 90
  GofConfig gof;
  OptimizerConfig opt;
  std::size_t replicates = 10;
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  nlohmann::json bounds_overrides;  // {"common": {...}, "<vehicle>": {...}}
  SimOptions sim;
  int threads = 1;
  bool run_calibration = true;
  bool run_validation = true;

  ParameterBounds bounds_for(VehicleType vehicle) const {
    ParameterBounds b = ParameterBounds::defaults(vehicle);
    if (bounds_overrides.is_object()) {
      if (bounds_overrides.contains("common"))
        b.merge_json(bounds_overrides["common"]);
      const std::string key = to_string(vehicle);
      if (bounds_overrides.contains(key)) b.merge_json(bounds_overrides[key]);
    }
    return b;
  }
};

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig cfg;
  if (j.contains("models"))
    cfg.model_ids = j["models"].get<std::vector<int>>();
  else
    for (int id = 1; id <= kModelCount; ++id) cfg.model_ids.push_back(id);
  for (int id : cfg.model_ids) ModelSpec::from_id(id);  // range check
  if (j.contains("gof")) cfg.gof = gof_config_from_json(j["gof"]);
  if (j.contains("optimizer"))
    cfg.opt = optimizer_config_from_json(j["optimizer"]);
  if (j.contains("replicates"))
    cfg.replicates = j["replicates"].get<std::size_t>();
  if (j.contains("seed")) {
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.opt.seed = cfg.seed;
  }
  if (j.contains("output_dir"))
    cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("bounds_overrides"))
    cfg.bounds_overrides = j["bounds_overrides"];
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("calibration"))
    cfg.run_calibration = j["calibration"].get<bool>();
  if (j.contains("validation"))
    cfg.run_validation = j["validation"].get<bool>();
  return cfg;
}

// ---------------------------------------------------------------------------
// Sweep driver

struct SweepOutcome {
  std::vector<ResultRow> rows;
  std::size_t computed = 0;
  std::size_t resumed = 0;
  std::size_t failed = 0;
};

namespace detail {

inline CalibrationProblem make_problem(const SweepDataset& ds,
                                       const SweepConfig& cfg,
                                       const ModelSpec& spec,
                                       const ExperimentIndex& idx) {
  const FollowerRef ref = find_follower(ds, idx.vehicle, idx.p_cal);
  CalibrationProblem prob;
  prob.leader = *ref.leader;
  prob.observed = *ref.observed;
  prob.leader_length = ref.leader_length;
  prob.spec = spec;
  prob.bounds = cfg.bounds_for(idx.vehicle);
  prob.gof = cfg.gof;
  prob.sim = cfg.sim;
  prob.slope = ref.slope;
  return prob;
}

}  // namespace detail

// Runs the calibration matrix, then the validation matrix, for every model
// id in the config. Each cell persists to <output_dir>/<key>.json; existing
// files are loaded instead of recomputed, so an interrupted sweep resumes
// where it stopped. Per-cell failures are recorded in the row and do not
// abort the sweep.
inline SweepOutcome run_sweep(const SweepDataset& ds, const SweepConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const std::vector<int> platoons = ds.platoon_ids();
  const std::vector<VehicleType> vehicles = ds.common_vehicles();
  if (vehicles.empty())
    throw DataError("dataset has no vehicle present in every platoon");

  SweepOutcome outcome;
  std::atomic<std::size_t> computed{0}, resumed{0}, failed{0};

  struct Task {
    int model_id;
    ExperimentIndex idx;
  };

  auto run_phase = [&](const std::vector<Task>& tasks, auto&& body) {
    std::vector<ResultRow> rows(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
      const Task& task = tasks[i];
      ResultRow row;
      row.model_id = task.model_id;
      row.vehicle = task.idx.vehicle;
      row.p_cal = task.idx.p_cal;
      row.p_val = task.idx.p_val;
      row.seed = cfg.seed;
      const fs::path file = fs::path(cfg.output_dir) / (row.key() + ".json");
      if (fs::exists(file)) {
        rows[i] = load_row_file(file);
        ++resumed;
        if (rows[i].failed) ++failed;
        return;
      }
      try {
        body(task, row);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        ++failed;
      }
      save_row_file(file, row);
      ++computed;
      rows[i] = row;
    });
    return rows;
  };

  // Phase 1: calibration cells.
  std::vector<Task> cal_tasks;
  const auto cal_matrix =
      build_matrix(vehicles, platoons, ExperimentMode::Calibration);
  for (int id : cfg.model_ids)
    for (const auto& idx : cal_matrix) cal_tasks.push_back({id, idx});

  std::vector<ResultRow> cal_rows;
  if (cfg.run_calibration) {
    cal_rows = run_phase(cal_tasks, [&](const Task& task, ResultRow& row) {
      const ModelSpec spec = ModelSpec::from_id(task.model_id);
      const CalibrationProblem prob =
          detail::make_problem(ds, cfg, spec, task.idx);
      OptimizerConfig opt = cfg.opt;
      opt.seed = cfg.seed;
      opt.threads = 1;  // rows parallelize, runs stay serial
      if (cfg.replicates >= 2) {
        const ReplicateResult rep = replicate(prob, opt, cfg.replicates);
        std::size_t best = 0;
        for (std::size_t r = 1; r < rep.objectives.size(); ++r)
          if (rep.objectives[r] < rep.objectives[best]) best = r;
        const CalibrationResult& win = rep.runs[best];
        row.gof = win.objective;
        row.params = win.params;
        row.errors = win.errors;
        row.has_errors = true;
        row.replicate_objectives = rep.objectives;
        row.cv = rep.cv;
        row.cv_degenerate = rep.degenerate;
        for (const auto& r : rep.runs) row.evaluations += r.evaluations;
      } else {
        const CalibrationResult res = calibrate(prob, opt);
        row.gof = res.objective;
        row.params = res.params;
        row.errors = res.errors;
        row.has_errors = true;
        row.evaluations = res.evaluations;
      }
    });
  } else {
    // Load whatever calibration rows already exist; validation depends on
    // them and reports a per-row failure where they are missing.
    for (const Task& task : cal_tasks) {
      const std::string key = row_key(task.model_id, task.idx.vehicle,
                                      task.idx.p_cal, task.idx.p_val, cfg.seed);
      const fs::path file = fs::path(cfg.output_dir) / (key + ".json");
      if (fs::exists(file)) {
        cal_rows.push_back(load_row_file(file));
        ++resumed;
      }
    }
  }

  std::map<std::string, const ResultRow*> cal_by_key;
  for (const ResultRow& row : cal_rows) cal_by_key[row.key()] = &row;

  // Phase 2: validation cells, reusing the calibrated parameters.
  std::vector<ResultRow> val_rows;
  if (cfg.run_validation) {
    std::vector<Task> val_tasks;
    const auto val_matrix =
        build_matrix(vehicles, platoons, ExperimentMode::Validation);
    for (int id : cfg.model_ids)
      for (const auto& idx : val_matrix) val_tasks.push_back({id, idx});

    val_rows = run_phase(val_tasks, [&](const Task& task, ResultRow& row) {
      const std::string cal_key =
          row_key(task.model_id, task.idx.vehicle, task.idx.p_cal,
                  task.idx.p_cal, cfg.seed);
      const auto it = cal_by_key.find(cal_key);
      if (it == cal_by_key.end() || it->second->failed)
        throw StateError("calibration row " + cal_key +
                         " missing or failed; cannot validate");
      const ResultRow& cal = *it->second;
      const ModelSpec spec = ModelSpec::from_id(task.model_id);
      const FollowerRef ref = find_follower(ds, task.idx.vehicle,
                                            task.idx.p_val);
      const SimResult sim = simulate_follower(
          *ref.leader, ref.observed->x[0], ref.observed->v[0], spec,
          cal.params, ref.leader_length, ref.slope, cfg.sim);
      const ObservedChannels obs = ObservedChannels::from_data(
          *ref.leader, *ref.observed, ref.leader_length);
      row.gof = penalized_objective(sim, obs, cfg.gof);
      row.collision = sim.collision.has_value();
      if (!row.collision) {
        row.errors = per_mop_errors(sim, obs, cfg.gof.start_index);
        row.has_errors = true;
      }
      row.params = cal.params;
      row.provenance = cal_key;
    });
  }

  outcome.rows = std::move(cal_rows);
  outcome.rows.insert(outcome.rows.end(), val_rows.begin(), val_rows.end());
  outcome.computed = computed;
  outcome.resumed = resumed;
  outcome.failed = failed;
  return outcome;
}

// Reads every result-row JSON in a sweep output directory.
inline std::vector<ResultRow> load_rows(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<ResultRow> rows;
  for (const auto& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception&) {
      continue;  // not a row file
    }
    if (!j.is_object() || !j.contains("model_id")) continue;
    rows.push_back(ResultRow::from_json(j));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report tables

struct CalibrationSummaryRow {
  int model_id = 0;
  std::string model_class;
  std::string group;
  std::string constraints;
  std::size_t n = 0;
  double median_norm = std::numeric_limits<double>::quiet_NaN();
  double mean_norm = std::numeric_limits<double>::quiet_NaN();
  double q1_norm = std::numeric_limits<double>::quiet_NaN();
  double q3_norm = std::numeric_limits<double>::quiet_NaN();
  double pct_vs_base = std::numeric_limits<double>::quiet_NaN();
  // Medians of per-trajectory percentage variations relative to the base.
  double pct_rmse_s = std::numeric_limits<double>::quiet_NaN();
  double pct_rmse_v = std::numeric_limits<double>::quiet_NaN();
  double pct_rmse_a = std::numeric_limits<double>::quiet_NaN();
  double pct_gof = std::numeric_limits<double>::quiet_NaN();
};

struct ValidationSummaryRow {
  int model_id = 0;
  std::string model_class;
  std::string group;
  std::string constraints;
  std::size_t n_filtered = 0;  // experiments collision-free for whole class
  double pct_rmse_s = std::numeric_limits<double>::quiet_NaN();
  double pct_rmse_v = std::numeric_limits<double>::quiet_NaN();
  double pct_rmse_a = std::numeric_limits<double>::quiet_NaN();
  double pct_gof_median = std::numeric_limits<double>::quiet_NaN();
  double pct_gof_mean = std::numeric_limits<double>::quiet_NaN();
  double pct_gof_q1 = std::numeric_limits<double>::quiet_NaN();
  double pct_gof_q3 = std::numeric_limits<double>::quiet_NaN();
  std::size_t collisions = 0;
  std::size_t total = 0;
};

struct CollisionFrequencyRow {
  int model_id = 0;
  std::string model_class;
  std::size_t collisions = 0;
  std::size_t total = 0;
  double frequency = 0.0;
};

struct CvRow {
  int model_id = 0;
  std::string model_class;
  VehicleType vehicle = VehicleType::Tesla;
  int p_cal = 0;
  double cv = 0.0;
  bool degenerate = false;
};

struct ReportTables {
  std::vector<CalibrationSummaryRow> calibration;
  std::vector<ValidationSummaryRow> validation;
  std::vector<CollisionFrequencyRow> collisions;
  std::vector<CvRow> cvs;
  // True when some trajectory's minimum error was zero and its normalized
  // column fell back to raw values.
  bool degenerate_normalization = false;
};

inline ReportTables build_reports(const std::vector<ResultRow>& rows) {
  using TrajKey = std::tuple<VehicleType, int, int>;
  ReportTables tables;

  std::vector<const ResultRow*> cal, val;
  for (const ResultRow& row : rows) {
    if (row.calibration()) {
      if (!row.failed) cal.push_back(&row);
    } else {
      val.push_back(&row);
      // Invariant: a validation row's parameters come from the matching
      // calibration cell.
      if (!row.failed) {
        const std::string expected = row_key(row.model_id, row.vehicle,
                                             row.p_cal, row.p_cal, row.seed);
        if (row.provenance != expected)
          throw StateError("validation row " + row.key() +
                           " has provenance '" + row.provenance +
                           "', expected '" + expected + "'");
      }
    }
  }

  std::set<int> model_ids;
  for (const ResultRow& row : rows) model_ids.insert(row.model_id);

  // Eq.-19-style normalization per calibration trajectory, across models.
  std::map<TrajKey, std::map<int, double>> gof_by_traj;
  for (const ResultRow* row : cal)
    gof_by_traj[{row->vehicle, row->p_cal, row->p_val}][row->model_id] =
        row->gof;
  std::map<TrajKey, std::map<int, double>> norm_by_traj;
  for (const auto& [traj, by_model] : gof_by_traj) {
    try {
      norm_by_traj[traj] = normalize_errors(by_model);
    } catch (const DegenerateInputError&) {
      norm_by_traj[traj] = by_model;  // perfect fit present: report raw
      tables.degenerate_normalization = true;
    }
  }

  // Per-trajectory channel lookups for variation-vs-base statistics.
  std::map<std::pair<int, TrajKey>, const ResultRow*> cal_cell;
  for (const ResultRow* row : cal)
    cal_cell[{row->model_id, {row->vehicle, row->p_cal, row->p_val}}] = row;

  auto pct_vs_base_medians = [](auto&& cell_lookup, int model_id, int base_id,
                                const std::vector<TrajKey>& trajs) {
    std::array<std::vector<double>, 4> rel;  // rmse_s, rmse_v, rmse_a, gof
    for (const TrajKey& traj : trajs) {
      const ResultRow* self = cell_lookup(model_id, traj);
      const ResultRow* base = cell_lookup(base_id, traj);
      if (!self || !base || !self->has_errors || !base->has_errors) continue;
      const double num[4] = {self->errors.rmse_s, self->errors.rmse_v,
                             self->errors.rmse_a, self->gof};
      const double den[4] = {base->errors.rmse_s, base->errors.rmse_v,
                             base->errors.rmse_a, base->gof};
      for (int c = 0; c < 4; ++c)
        if (den[c] > 0.0) rel[c].push_back(100.0 * (num[c] - den[c]) / den[c]);
    }
    return rel;
  };

  std::vector<TrajKey> cal_trajs;
  for (const auto& [traj, by_model] : gof_by_traj) cal_trajs.push_back(traj);

  // Calibration summary.
  std::map<int, double> median_norm_by_model;
  for (int id : model_ids) {
    std::vector<double> norm;
    for (const auto& [traj, by_model] : norm_by_traj) {
      const auto it = by_model.find(id);
      if (it != by_model.end()) norm.push_back(it->second);
    }
    if (!norm.empty()) median_norm_by_model[id] = stats::median(norm);
  }
  for (int id : model_ids) {
    const ModelSpec spec = ModelSpec::from_id(id);
    CalibrationSummaryRow out;
    out.model_id = id;
    out.model_class = spec.class_name();
    out.group = spec.extension_group();
    out.constraints = to_string(spec.constraints);
    std::vector<double> norm;
    for (const auto& [traj, by_model] : norm_by_traj) {
      const auto it = by_model.find(id);
      if (it != by_model.end()) norm.push_back(it->second);
    }
    out.n = norm.size();
    if (!norm.empty()) {
      out.median_norm = stats::median(norm);
      out.mean_norm = stats::mean(norm);
      out.q1_norm = stats::quantile(norm, 0.25);
      out.q3_norm = stats::quantile(norm, 0.75);
    }
    const int base_id = spec.base_id();
    if (id != base_id && median_norm_by_model.count(id) &&
        median_norm_by_model.count(base_id) &&
        median_norm_by_model[base_id] > 0.0)
      out.pct_vs_base = 100.0 *
                        (median_norm_by_model[id] -
                         median_norm_by_model[base_id]) /
                        median_norm_by_model[base_id];
    if (id != base_id) {
      auto lookup = [&cal_cell](int m, const TrajKey& t) -> const ResultRow* {
        const auto it = cal_cell.find({m, t});
        return it == cal_cell.end() ? nullptr : it->second;
      };
      const auto rel = pct_vs_base_medians(lookup, id, base_id, cal_trajs);
      out.pct_rmse_s = stats::median(rel[0]);
      out.pct_rmse_v = stats::median(rel[1]);
      out.pct_rmse_a = stats::median(rel[2]);
      out.pct_gof = stats::median(rel[3]);
    }
    tables.calibration.push_back(out);
  }

  // Validation: collision counts, then class-filtered variation medians.
  std::map<std::pair<int, TrajKey>, const ResultRow*> val_cell;
  std::map<int, std::pair<std::size_t, std::size_t>> collision_count;
  std::set<TrajKey> val_trajs;
  for (const ResultRow* row : val) {
    collision_count[row->model_id].second += 1;
    if (!row->failed && row->collision)
      collision_count[row->model_id].first += 1;
    if (!row->failed) {
      val_cell[{row->model_id, {row->vehicle, row->p_cal, row->p_val}}] = row;
      val_trajs.insert({row->vehicle, row->p_cal, row->p_val});
    }
  }

  // Group the swept models by class for the collision-free filter.
  std::map<int, std::vector<int>> class_members;  // base_id -> ids
  for (int id : model_ids)
    class_members[ModelSpec::from_id(id).base_id()].push_back(id);

  std::map<int, std::vector<TrajKey>> kept_by_class;
  for (const auto& [base_id, members] : class_members) {
    std::vector<TrajKey> kept;
    for (const TrajKey& traj : val_trajs) {
      bool all_clean = true;
      for (int id : members) {
        const auto it = val_cell.find({id, traj});
        if (it == val_cell.end() || it->second->collision) {
          all_clean = false;
          break;
        }
      }
      if (all_clean) kept.push_back(traj);
    }
    kept_by_class[base_id] = std::move(kept);
  }

  for (int id : model_ids) {
    const ModelSpec spec = ModelSpec::from_id(id);
    const int base_id = spec.base_id();
    ValidationSummaryRow out;
    out.model_id = id;
    out.model_class = spec.class_name();
    out.group = spec.extension_group();
    out.constraints = to_string(spec.constraints);
    const auto& kept = kept_by_class[base_id];
    out.n_filtered = kept.size();
    const auto cc = collision_count.find(id);
    if (cc != collision_count.end()) {
      out.collisions = cc->second.first;
      out.total = cc->second.second;
    }
    if (id != base_id) {
      auto lookup = [&val_cell](int m, const TrajKey& t) -> const ResultRow* {
        const auto it = val_cell.find({m, t});
        return it == val_cell.end() ? nullptr : it->second;
      };
      const auto rel = pct_vs_base_medians(lookup, id, base_id, kept);
      out.pct_rmse_s = stats::median(rel[0]);
      out.pct_rmse_v = stats::median(rel[1]);
      out.pct_rmse_a = stats::median(rel[2]);
      out.pct_gof_median = stats::median(rel[3]);
      out.pct_gof_mean = stats::mean(rel[3]);
      out.pct_gof_q1 = stats::quantile(rel[3], 0.25);
      out.pct_gof_q3 = stats::quantile(rel[3], 0.75);
    }
    tables.validation.push_back(out);
  }

  for (int id : model_ids) {
    const auto cc = collision_count.find(id);
    if (cc == collision_count.end()) continue;
    CollisionFrequencyRow out;
    out.model_id = id;
    out.model_class = ModelSpec::from_id(id).class_name();
    out.collisions = cc->second.first;
    out.total = cc->second.second;
    out.frequency = out.total
                        ? static_cast<double>(out.collisions) /
                              static_cast<double>(out.total)
                        : 0.0;
    tables.collisions.push_back(out);
  }

  for (const ResultRow* row : cal) {
    if (!std::isfinite(row->cv)) continue;
    CvRow out;
    out.model_id = row->model_id;
    out.model_class = ModelSpec::from_id(row->model_id).class_name();
    out.vehicle = row->vehicle;
    out.p_cal = row->p_cal;
    out.cv = row->cv;
    out.degenerate = row->cv_degenerate;
    tables.cvs.push_back(out);
  }

  return tables;
}

namespace detail {

inline std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace detail

inline void write_reports(const ReportTables& tables, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "calibration_summary.csv");
    out << "model_id,class,group,constraints,n,median_norm_gof,mean_norm_gof,"
           "q1_norm_gof,q3_norm_gof,pct_vs_base,pct_rmse_s,pct_rmse_v,"
           "pct_rmse_a,pct_gof\n";
    for (const auto& r : tables.calibration)
      out << r.model_id << "," << r.model_class << "," << r.group << ","
          << r.constraints << "," << r.n << ","
          << detail::csv_num(r.median_norm) << ","
          << detail::csv_num(r.mean_norm) << "," << detail::csv_num(r.q1_norm)
          << "," << detail::csv_num(r.q3_norm) << ","
          << detail::csv_num(r.pct_vs_base) << ","
          << detail::csv_num(r.pct_rmse_s) << ","
          << detail::csv_num(r.pct_rmse_v) << ","
          << detail::csv_num(r.pct_rmse_a) << "," << detail::csv_num(r.pct_gof)
          << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "validation_summary.csv");
    out << "model_id,class,group,constraints,n_filtered,pct_rmse_s,pct_rmse_v,"
           "pct_rmse_a,pct_gof_median,pct_gof_mean,pct_gof_q1,pct_gof_q3,"
           "collisions,total\n";
    for (const auto& r : tables.validation)
      out << r.model_id << "," << r.model_class << "," << r.group << ","
          << r.constraints << "," << r.n_filtered << ","
          << detail::csv_num(r.pct_rmse_s) << ","
          << detail::csv_num(r.pct_rmse_v) << ","
          << detail::csv_num(r.pct_rmse_a) << ","
          << detail::csv_num(r.pct_gof_median) << ","
          << detail::csv_num(r.pct_gof_mean) << ","
          << detail::csv_num(r.pct_gof_q1) << ","
          << detail::csv_num(r.pct_gof_q3) << "," << r.collisions << ","
          << r.total << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "collision_frequency.csv");
    out << "model_id,class,collisions,total,frequency\n";
    for (const auto& r : tables.collisions)
      out << r.model_id << "," << r.model_class << "," << r.collisions << ","
          << r.total << "," << detail::csv_num(r.frequency) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "cv_distribution.csv");
    out << "model_id,class,vehicle,p_cal,cv,degenerate\n";
    for (const auto& r : tables.cvs)
      out << r.model_id << "," << r.model_class << "," << to_string(r.vehicle)
          << "," << r.p_cal << "," << detail::csv_num(r.cv) << ","
          << (r.degenerate ? 1 : 0) << "\n";
  }
}

}  // namespace accsim
