// hvacctl: command-line driver for training, transfer, and evaluation.
//
// All runs are configured through an optional JSON file (--config) with
// sections {building, equipment, weather, hyperparams, scenario}; anything
// omitted falls back to the catalog presets and desk-scale defaults.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hvacx/control.hpp"
#include "hvacx/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hvacx;

namespace {

struct RunConfig {
  json raw;

  std::string building_preset = "4-zone-1";
  std::string equipment_preset;  // empty: keep the building's default
  std::string weather_profile = "riverside";
  std::string weather_csv;       // overrides the profile when set
  int weather_days = 31;
  TrainConfig train = desk_config();
  json scenario;                 // overrides applied to a ScenarioSpec
};

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  in >> cfg.raw;

  if (cfg.raw.contains("building")) {
    const auto& b = cfg.raw["building"];
    cfg.building_preset = b.value("preset", cfg.building_preset);
  }
  if (cfg.raw.contains("equipment")) {
    cfg.equipment_preset = cfg.raw["equipment"].value("preset", "");
  }
  if (cfg.raw.contains("weather")) {
    const auto& w = cfg.raw["weather"];
    cfg.weather_profile = w.value("profile", cfg.weather_profile);
    cfg.weather_csv = w.value("csv", "");
    cfg.weather_days = w.value("days", cfg.weather_days);
  }
  if (cfg.raw.contains("hyperparams")) {
    const auto& h = cfg.raw["hyperparams"];
    TrainConfig& t = cfg.train;
    t.ep = h.value("ep", t.ep);
    t.lr1 = h.value("lr1", t.lr1);
    t.lr2 = h.value("lr2", t.lr2);
    t.l_max = h.value("l_max", t.l_max);
    t.target_update_steps = h.value("target_update_steps",
                                    t.target_update_steps);
    t.eps0 = h.value("eps0", t.eps0);
    t.eps_low = h.value("eps_low", t.eps_low);
    t.d_eps = h.value("d_eps", t.d_eps);
    t.gamma = h.value("gamma", t.gamma);
    t.batch_size = h.value("batch_size", t.batch_size);
    t.buffer_capacity = h.value("buffer_capacity", t.buffer_capacity);
    t.w_cost = h.value("w_cost", t.w_cost);
    t.w_vio = h.value("w_vio", t.w_vio);
    t.t_lower = h.value("t_lower", t.t_lower);
    t.t_upper = h.value("t_upper", t.t_upper);
    t.epoch_days = h.value("epoch_days", t.epoch_days);
    t.reward_scale = h.value("reward_scale", t.reward_scale);
  }
  if (cfg.raw.contains("scenario")) cfg.scenario = cfg.raw["scenario"];
  return cfg;
}

BuildingModel make_model(const RunConfig& cfg) {
  BuildingModel model = preset_building(cfg.building_preset);
  if (!cfg.equipment_preset.empty()) {
    model.equipment = preset_equipment(cfg.equipment_preset);
  }
  return model;
}

WeatherSeries make_weather(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.weather_csv.empty()) return WeatherSeries::load(cfg.weather_csv);
  return WeatherSeries::synth(preset_profile(cfg.weather_profile),
                              cfg.weather_days, seed);
}

ScenarioSpec make_scenario(const RunConfig& cfg, const std::string& name) {
  ScenarioSpec spec = preset_scenario(
      !name.empty() ? name : cfg.scenario.value("name", "transfer-4z1-to-4z2"));
  const json& s = cfg.scenario;
  if (s.contains("seeds")) spec.seeds = s["seeds"].get<std::vector<std::uint64_t>>();
  if (s.contains("frontend_epochs")) spec.frontend_epochs = s["frontend_epochs"];
  if (s.contains("finetune_epochs")) spec.finetune_epochs = s["finetune_epochs"];
  if (s.contains("onoff_upper_bounds")) {
    spec.onoff_upper_bounds = s["onoff_upper_bounds"].get<std::vector<double>>();
  }
  return spec;
}

InverseNet train_backend_for(const BuildingModel& model, const RunConfig& cfg,
                             double upper_bound, std::uint64_t seed) {
  const WeatherSeries warmup = make_weather(cfg, seed * 2246822519ULL + 3);
  OnOffController onoff =
      OnOffController::for_equipment(model.equipment, upper_bound);
  const auto log =
      collect_onoff_data(model, warmup, onoff, 14.0 * 24 * 60);
  const auto ds = build_dataset(log, model.equipment.levels() - 1);
  return train_inverse(ds, model.n_zones(), model.equipment.levels(), 15,
                       cfg.train.lr2, 64, seed)
      .net;
}

void report(const Metrics& m) {
  std::cout << "cost $" << m.total_cost << "  A-theta " << m.a_theta * 100
            << "%  M-theta " << m.m_theta * 100 << "%  A-mu " << m.a_mu
            << "  M-mu " << m.m_mu << "  comfort "
            << (m.pass_flag ? "pass" : "FAIL") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transferable two-network HVAC controller toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand too

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 1;
  int epochs = -1;
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--epochs", epochs, "override training epochs");

  std::string frontend_path, backend_path, scenario_name;
  double upper_bound = 23.0;
  int weeks = 3;

  auto* cmd_train_f = app.add_subcommand(
      "train-frontend", "train the building-agnostic Q frontend");
  auto* cmd_train_b = app.add_subcommand(
      "train-backend", "collect warm-up data and train the inverse net");
  cmd_train_b->add_option("--upper", upper_bound,
                          "warm-up thermostat upper bound");
  auto* cmd_transfer = app.add_subcommand(
      "transfer", "deploy an existing frontend on a new building");
  cmd_transfer->add_option("--frontend", frontend_path, "frontend checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  auto* cmd_eval = app.add_subcommand(
      "evaluate", "closed-loop evaluation of a checkpoint pair");
  cmd_eval->add_option("--frontend", frontend_path, "frontend checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--backend", backend_path, "backend checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  auto* cmd_baseline =
      app.add_subcommand("baseline", "ON-OFF thermostat evaluation");
  cmd_baseline->add_option("--upper", upper_bound, "thermostat upper bound");
  auto* cmd_scenario =
      app.add_subcommand("scenario", "run a named experiment scenario");
  cmd_scenario->add_option("name", scenario_name, "scenario name (see --list)");
  bool list_scenarios = false;
  cmd_scenario->add_flag("--list", list_scenarios, "list scenario names");
  auto* cmd_curve = app.add_subcommand(
      "finetune-curve", "weekly cost/comfort curve during fine-tuning");
  cmd_curve->add_option("name", scenario_name, "scenario name");
  cmd_curve->add_option("--weeks", weeks, "fine-tuning weeks");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path);
    if (epochs >= 0) cfg.train.ep = epochs;
    fs::create_directories(out_dir);

    if (cmd_train_f->parsed()) {
      const BuildingModel model = make_model(cfg);
      InverseNet backend =
          train_backend_for(model, cfg, upper_bound, seed);
      FrontendTrainOptions options;
      options.cfg = cfg.train;
      WeatherSource source =
          cfg.weather_csv.empty()
              ? profile_weather_source(preset_profile(cfg.weather_profile),
                                       cfg.train.epoch_days, seed)
              : WeatherSource([&cfg](int) {
                  return WeatherSeries::load(cfg.weather_csv);
                });
      auto result = train_frontend(model, source, backend, options, seed);
      const auto fe = (fs::path(out_dir) / "frontend.json").string();
      const auto be = (fs::path(out_dir) / "backend.json").string();
      save_frontend(fe, result.net);
      save_inverse(be, backend);
      write_training_log_csv((fs::path(out_dir) / "training_log.csv").string(),
                             result.log);
      std::cout << "wrote " << fe << " and " << be << '\n';
    } else if (cmd_train_b->parsed()) {
      const BuildingModel model = make_model(cfg);
      InverseNet backend = train_backend_for(model, cfg, upper_bound, seed);
      const auto be = (fs::path(out_dir) / "backend.json").string();
      save_inverse(be, backend);
      std::cout << "wrote " << be << '\n';
    } else if (cmd_transfer->parsed()) {
      const BuildingModel model = make_model(cfg);
      FrontEndNet frontend = load_frontend(frontend_path);
      InverseNet backend = train_backend_for(model, cfg, 23.0, seed);
      check_compatibility(frontend, backend, model);
      DeployedController deployed(frontend, backend);
      const WeatherSeries month = make_weather(cfg, kEvalWeatherSeed);
      const Trajectory traj = run_episode(deployed, model, month,
                                          cfg.weather_days * 24.0 * 60,
                                          cfg.train);
      const auto be = (fs::path(out_dir) / "backend.json").string();
      save_inverse(be, backend);
      write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(),
                           traj);
      report(compute_metrics(traj));
    } else if (cmd_eval->parsed()) {
      const BuildingModel model = make_model(cfg);
      DeployedController deployed =
          load_deployed(frontend_path, backend_path, model);
      const WeatherSeries month = make_weather(cfg, kEvalWeatherSeed);
      const Trajectory traj = run_episode(deployed, model, month,
                                          cfg.weather_days * 24.0 * 60,
                                          cfg.train);
      write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(),
                           traj);
      report(compute_metrics(traj));
    } else if (cmd_baseline->parsed()) {
      const BuildingModel model = make_model(cfg);
      OnOffController onoff =
          OnOffController::for_equipment(model.equipment, upper_bound);
      const WeatherSeries month = make_weather(cfg, kEvalWeatherSeed);
      const Trajectory traj = run_episode(onoff, model, month,
                                          cfg.weather_days * 24.0 * 60,
                                          cfg.train);
      write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(),
                           traj);
      report(compute_metrics(traj));
    } else if (cmd_scenario->parsed()) {
      if (list_scenarios) {
        for (const auto& name : scenario_names()) std::cout << name << '\n';
        return 0;
      }
      ScenarioSpec spec = make_scenario(cfg, scenario_name);
      if (epochs >= 0) spec.frontend_epochs = epochs;
      auto artifacts = run_scenario(spec, cfg.train, out_dir);
      std::cout << results_csv_header() << '\n';
      for (const auto& row : artifacts.rows) {
        std::cout << to_csv_row(row) << '\n';
      }
    } else if (cmd_curve->parsed()) {
      ScenarioSpec spec = make_scenario(cfg, scenario_name);
      if (epochs >= 0) spec.frontend_epochs = epochs;
      auto curve = finetune_curve(spec, cfg.train, out_dir, weeks);
      std::cout << "t_min,cost,m_theta,a_theta\n";
      for (const auto& p : curve) {
        std::cout << p.t_min << ',' << p.cost << ',' << p.m_theta << ','
                  << p.a_theta << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
