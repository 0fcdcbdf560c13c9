// Command-line front end: single-run simulation, single-experiment
// calibration, and the batch sweep / validation / report pipeline.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <accsim/accsim.hpp>

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw accsim::ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw accsim::ParseError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw accsim::DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

// Positions a follower inside a loaded platoon. The follower argument is
// either a vehicle type name (resolved through the default platoon ordering)
// or a vehicle column id from the file.
struct ResolvedFollower {
  std::size_t position = 0;  // index in platoon order; leader is position-1
  std::optional<accsim::VehicleType> vehicle;
};

ResolvedFollower resolve_follower(const accsim::PlatoonTrajectory& traj,
                                  int platoon_id,
                                  const std::string& follower) {
  ResolvedFollower out;
  std::optional<accsim::VehicleType> vehicle;
  try {
    vehicle = accsim::vehicle_type_from_string(follower);
  } catch (const accsim::ConfigError&) {
    // Not a type name: treat as a vehicle column id.
  }
  if (vehicle) {
    const auto order = accsim::default_follower_order(platoon_id);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == *vehicle) {
        out.position = i + 1;
        out.vehicle = vehicle;
        if (out.position >= traj.vehicles.size())
          throw accsim::ConfigError(
              "platoon file has too few vehicles for position " +
              std::to_string(out.position + 1));
        return out;
      }
    }
    throw accsim::ConfigError("vehicle " + follower +
                              " not in the platoon ordering");
  }
  out.position = traj.position(follower);
  if (out.position == 0)
    throw accsim::ConfigError("follower '" + follower +
                              "' is the platoon leader");
  return out;
}

accsim::PlatoonTrajectory load_data(const std::string& data,
                                    const std::string& schema) {
  return schema.empty() ? accsim::load_platoon(data)
                        : accsim::load_platoon(data, schema);
}

int run_simulate(const std::string& data, const std::string& schema,
                 int platoon, const std::string& follower, int model_id,
                 const std::string& params_path, const std::string& out_csv,
                 const std::string& summary_path, const std::string& mfc_path,
                 double leader_length) {
  const auto traj = load_data(data, schema);
  const auto rf = resolve_follower(traj, platoon, follower);
  const auto& leader = traj.vehicles[rf.position - 1];
  const auto& observed = traj.vehicles[rf.position];

  const auto spec = accsim::ModelSpec::from_id(model_id);
  const auto params = accsim::ParameterSet::from_json(read_json_file(params_path));
  accsim::SimOptions opts;
  if (!mfc_path.empty()) opts.mfc = accsim::MfcCurves::load(mfc_path);
  const double length = leader_length > 0.0 ? leader_length : leader.length;

  const auto result = accsim::simulate_follower(
      leader.series, observed.series.x[0], observed.series.v[0], spec, params,
      length, traj.slope ? &*traj.slope : nullptr, opts);
  accsim::write_sim_result_csv(result, out_csv);

  json summary = accsim::sim_result_summary(result);
  summary["model_id"] = model_id;
  summary["model_class"] = spec.class_name();
  summary["follower"] = follower;
  summary["leader_length"] = length;
  if (!summary_path.empty())
    write_json_file(summary_path, summary);
  else
    std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_calibrate(const std::string& data, const std::string& schema,
                  int platoon, const std::string& follower, int model_id,
                  const std::string& gof_name, std::uint64_t seed,
                  std::size_t replicates, const std::string& bounds_path,
                  const std::string& out_path, const std::string& mfc_path,
                  int population, int generations, bool raw_channels) {
  auto traj = load_data(data, schema);
  const auto rf = resolve_follower(traj, platoon, follower);

  // The comparison needs an acceleration channel consistent with the
  // integrator; derive it unless the caller opts out.
  if (!raw_channels)
    for (auto& veh : traj.vehicles)
      veh.series = accsim::derive_consistent(veh.series);

  accsim::CalibrationProblem problem;
  problem.leader = traj.vehicles[rf.position - 1].series;
  problem.observed = traj.vehicles[rf.position].series;
  problem.leader_length = traj.vehicles[rf.position - 1].length;
  problem.spec = accsim::ModelSpec::from_id(model_id);
  problem.bounds = accsim::ParameterBounds::defaults(rf.vehicle);
  if (!bounds_path.empty())
    problem.bounds.merge_json(read_json_file(bounds_path));
  problem.gof.kind = accsim::gof_kind_from_string(gof_name);
  if (!mfc_path.empty()) problem.sim.mfc = accsim::MfcCurves::load(mfc_path);
  std::vector<double> slope;
  if (traj.slope) {
    slope = *traj.slope;
    problem.slope = &slope;
  }

  accsim::OptimizerConfig opt;
  opt.seed = seed;
  if (population > 0) opt.population = population;
  if (generations > 0) opt.max_generations = generations;

  json out;
  out["model_id"] = model_id;
  out["gof"] = gof_name;
  out["seed"] = seed;
  const auto names = problem.spec.parameter_names();
  auto result_json = [&names](const accsim::CalibrationResult& r) {
    json j;
    j["parameters"] = r.params.to_json(names);
    j["objective"] = r.objective;
    j["errors"] = {{"rmse_s", r.errors.rmse_s},   {"rmse_v", r.errors.rmse_v},
                   {"rmse_a", r.errors.rmse_a},   {"nrmse_s", r.errors.nrmse_s},
                   {"nrmse_v", r.errors.nrmse_v}, {"nrmse_a", r.errors.nrmse_a}};
    j["evaluations"] = r.evaluations;
    return j;
  };

  if (replicates >= 2) {
    const auto rep = accsim::replicate(problem, opt, replicates);
    std::size_t best = 0;
    for (std::size_t i = 1; i < rep.objectives.size(); ++i)
      if (rep.objectives[i] < rep.objectives[best]) best = i;
    out.update(result_json(rep.runs[best]));
    out["replicates"] = rep.objectives;
    out["cv"] = rep.cv;
    out["cv_degenerate"] = rep.degenerate;
  } else {
    out.update(result_json(accsim::calibrate(problem, opt)));
  }
  write_json_file(out_path, out);
  std::cout << "calibration written to " << out_path << "\n";
  return 0;
}

accsim::SweepConfig config_from_file(const json& j) {
  return accsim::sweep_config_from_json(j);
}

accsim::SweepDataset dataset_from_config(const json& j,
                                         const std::string& config_path) {
  const std::string base =
      std::filesystem::path(config_path).parent_path().string();
  if (j.contains("dataset_file")) {
    std::filesystem::path p(j["dataset_file"].get<std::string>());
    if (p.is_relative() && !base.empty())
      p = std::filesystem::path(base) / p;
    return accsim::load_dataset_file(p.string());
  }
  if (j.contains("dataset")) return accsim::load_dataset(j["dataset"], base);
  throw accsim::ConfigError("config needs 'dataset' or 'dataset_file'");
}

int run_sweep_cmd(const std::string& config_path, bool validation_only) {
  const json j = read_json_file(config_path);
  auto cfg = config_from_file(j);
  if (validation_only) {
    cfg.run_calibration = false;
    cfg.run_validation = true;
  }
  const auto ds = dataset_from_config(j, config_path);
  const auto outcome = accsim::run_sweep(ds, cfg);
  std::cout << "rows: " << outcome.rows.size() << " (computed "
            << outcome.computed << ", resumed " << outcome.resumed
            << ", failed " << outcome.failed << ")\n";
  const auto tables = accsim::build_reports(outcome.rows);
  accsim::write_reports(tables, cfg.output_dir);
  std::cout << "reports written to " << cfg.output_dir << "\n";
  if (tables.degenerate_normalization)
    std::cout << "note: at least one trajectory had a zero minimum error; "
                 "its normalized column reports raw values\n";
  return 0;
}

int run_report(const std::string& results_dir, const std::string& out_dir) {
  const auto rows = accsim::load_rows(results_dir);
  if (rows.empty()) throw accsim::DataError("no result rows in " + results_dir);
  const auto tables = accsim::build_reports(rows);
  accsim::write_reports(tables, out_dir.empty() ? results_dir : out_dir);
  std::cout << "reports for " << rows.size() << " rows written to "
            << (out_dir.empty() ? results_dir : out_dir) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Car-following/ACC model simulation, calibration and "
               "cross-validation toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "Simulate one follower behind a recorded "
                                 "leader with a chosen model variant");
  std::string sim_data, sim_schema, sim_follower, sim_params, sim_out;
  std::string sim_summary, sim_mfc;
  int sim_platoon = 0, sim_model = 1;
  double sim_leader_length = 0.0;
  sim->add_option("--data", sim_data, "Platoon CSV file")->required();
  sim->add_option("--schema", sim_schema, "Column schema JSON");
  sim->add_option("--platoon", sim_platoon,
                  "Platoon id (resolves vehicle type positions)");
  sim->add_option("--follower", sim_follower,
                  "Vehicle type name or vehicle column id")->required();
  sim->add_option("--model-id", sim_model, "Model variant id, 1..90")
      ->required()->check(CLI::Range(1, accsim::kModelCount));
  sim->add_option("--params", sim_params, "Parameter JSON file")->required();
  sim->add_option("--out", sim_out, "Output trajectory CSV")->required();
  sim->add_option("--summary", sim_summary, "Summary JSON path (else stdout)");
  sim->add_option("--mfc", sim_mfc, "MFC envelope JSON file");
  sim->add_option("--leader-length", sim_leader_length,
                  "Override leader vehicle length (m)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "Calibrate one model variant against one "
                                 "observed follower run");
  std::string cal_data, cal_schema, cal_follower, cal_bounds, cal_out, cal_mfc;
  std::string cal_gof = "NRMSE_sva";
  int cal_platoon = 0, cal_model = 1, cal_pop = 0, cal_gens = 0;
  std::uint64_t cal_seed = 1;
  std::size_t cal_replicates = 1;
  bool cal_raw = false;
  cal->add_option("--data", cal_data, "Platoon CSV file")->required();
  cal->add_option("--schema", cal_schema, "Column schema JSON");
  cal->add_option("--platoon", cal_platoon,
                  "Platoon id (resolves vehicle type positions)");
  cal->add_option("--follower", cal_follower,
                  "Vehicle type name or vehicle column id")->required();
  cal->add_option("--model-id", cal_model, "Model variant id, 1..90")
      ->required()->check(CLI::Range(1, accsim::kModelCount));
  cal->add_option("--gof", cal_gof,
                  "Objective: RMSE_s, RMSE_v, TheilU_sv, TheilU_sva, "
                  "NRMSE_sv, NRMSE_sva");
  cal->add_option("--seed", cal_seed, "Optimizer RNG seed");
  cal->add_option("--replicates", cal_replicates,
                  "Independent calibration runs (>=2 adds CV statistics)");
  cal->add_option("--bounds", cal_bounds, "Bounds override JSON file");
  cal->add_option("--out", cal_out, "Result JSON path")->required();
  cal->add_option("--mfc", cal_mfc, "MFC envelope JSON file");
  cal->add_option("--population", cal_pop, "GA population size");
  cal->add_option("--generations", cal_gens, "GA generation budget");
  cal->add_flag("--raw-channels", cal_raw,
                "Compare against file channels as-is instead of deriving an "
                "integrator-consistent acceleration");

  // sweep / validate
  auto* sweep = app.add_subcommand("sweep",
                                   "Run the calibration + validation matrix "
                                   "from a config file");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "Sweep config JSON")->required();

  auto* val = app.add_subcommand("validate",
                                 "Run only the validation matrix against "
                                 "existing calibration rows");
  std::string val_config;
  val->add_option("--config", val_config, "Sweep config JSON")->required();

  // report
  auto* rep = app.add_subcommand("report",
                                 "Aggregate result rows into summary CSVs");
  std::string rep_results, rep_out;
  rep->add_option("--results", rep_results, "Directory with result row JSONs")
      ->required();
  rep->add_option("--out", rep_out, "Report output directory (default: results)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_simulate(sim_data, sim_schema, sim_platoon, sim_follower,
                          sim_model, sim_params, sim_out, sim_summary, sim_mfc,
                          sim_leader_length);
    if (cal->parsed())
      return run_calibrate(cal_data, cal_schema, cal_platoon, cal_follower,
                           cal_model, cal_gof, cal_seed, cal_replicates,
                           cal_bounds, cal_out, cal_mfc, cal_pop, cal_gens,
                           cal_raw);
    if (sweep->parsed()) return run_sweep_cmd(sweep_config, false);
    if (val->parsed()) return run_sweep_cmd(val_config, true);
    if (rep->parsed()) return run_report(rep_results, rep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
