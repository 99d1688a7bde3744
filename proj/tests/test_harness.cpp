#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hvacx/harness.hpp"

using namespace hvacx;

namespace {

Trajectory make_traj(const std::vector<std::vector<double>>& temps,
                     double step_cost = 0.0) {
  Trajectory traj;
  double t = 0.0;
  for (const auto& zone_temps : temps) {
    TrajectoryStep step;
    step.state.t = t;
    step.state.s_in = zone_temps;
    step.state.s_out.t_out = {30, 30, 30, 30};
    step.state.s_out.sun_out = {0, 0, 0, 0};
    step.action.assign(zone_temps.size(), 0);
    step.cost = step_cost;
    step.reward = 0.0;
    traj.steps.push_back(std::move(step));
    t += kControlPeriodMin;
  }
  return traj;
}

}  // namespace

TEST_CASE("metrics arithmetic on a hand-built trajectory") {
  // Zone 0: violates once in 100 steps (25.11 degC); zone 1: never.
  std::vector<std::vector<double>> temps(100, {22.0, 21.0});
  temps[40] = {25.11, 21.0};
  auto m = compute_metrics(make_traj(temps, 0.02));
  REQUIRE(m.theta.size() == 2);
  CHECK(m.theta[0] == doctest::Approx(0.01));
  CHECK(m.theta[1] == 0.0);
  CHECK(m.mu[0] == doctest::Approx(1.11));
  CHECK(m.mu[1] == 0.0);
  CHECK(m.a_theta == doctest::Approx(0.005));
  CHECK(m.m_theta == doctest::Approx(0.01));
  CHECK(m.a_mu == doctest::Approx(0.555));
  CHECK(m.m_mu == doctest::Approx(1.11));
  CHECK(m.total_cost == doctest::Approx(2.0));
  CHECK(m.pass_flag);  // both rates below 5%
}

TEST_CASE("metrics count violations below the band too") {
  std::vector<std::vector<double>> temps(10, {17.5});
  auto m = compute_metrics(make_traj(temps));
  CHECK(m.theta[0] == 1.0);
  CHECK(m.mu[0] == doctest::Approx(1.5));
  CHECK_FALSE(m.pass_flag);
}

TEST_CASE("metrics fail exactly at the 5% threshold") {
  std::vector<std::vector<double>> temps(100, {22.0});
  for (int i = 0; i < 5; ++i) temps[i] = {25.0};
  CHECK_FALSE(compute_metrics(make_traj(temps)).pass_flag);
  temps[4] = {22.0};
  CHECK(compute_metrics(make_traj(temps)).pass_flag);
}

TEST_CASE("metrics are invariant to zone relabeling") {
  std::vector<std::vector<double>> temps(50, {22.0, 25.5, 18.0});
  auto m1 = compute_metrics(make_traj(temps));
  for (auto& row : temps) std::swap(row[0], row[2]);
  auto m2 = compute_metrics(make_traj(temps));
  CHECK(m1.a_theta == doctest::Approx(m2.a_theta));
  CHECK(m1.m_theta == doctest::Approx(m2.m_theta));
  CHECK(m1.a_mu == doctest::Approx(m2.a_mu));
  CHECK(m1.m_mu == doctest::Approx(m2.m_mu));
  CHECK(m1.theta[0] == m2.theta[2]);
}

TEST_CASE("metrics reject an empty trajectory") {
  Trajectory empty;
  CHECK_THROWS_AS(compute_metrics(empty), ValidationError);
}

TEST_CASE("desk config keeps published constants") {
  auto cfg = desk_config();
  CHECK(cfg.lr1 == 3e-4);
  CHECK(cfg.lr2 == 1e-4);
  CHECK(cfg.target_update_steps == 240);
  CHECK(cfg.eps0 == 1.0);
  CHECK(cfg.eps_low == 0.1);
  CHECK(cfg.l_max == 1);
  CHECK(cfg.epoch_days == 31);
  // Desk-scale knobs differ from the full-scale defaults.
  TrainConfig full;
  CHECK(cfg.ep < full.ep);
  CHECK(cfg.batch_size <= full.batch_size);
  CHECK(cfg.d_eps >= full.d_eps);
}

TEST_CASE("scenario catalog") {
  auto names = scenario_names();
  CHECK(names.size() >= 10);
  for (const auto& name : names) {
    auto spec = preset_scenario(name);
    CHECK(spec.name == name);
    CHECK_FALSE(spec.seeds.empty());
    CHECK_FALSE(spec.onoff_upper_bounds.empty());
  }
  CHECK_THROWS_AS(preset_scenario("no-such-scenario"), CatalogError);

  auto zones = preset_scenario("transfer-4z1-to-7z1");
  CHECK(zones.source_building == "4-zone-1");
  CHECK(zones.target_building == "7-zone-1");

  auto equip = preset_scenario("equipment-ac1-to-ac2");
  CHECK(equip.source_equipment == "AC1");
  CHECK(equip.target_equipment == "AC2");

  auto wx = preset_scenario("weather-riverside-to-la");
  CHECK(wx.source_weather == "riverside");
  CHECK(wx.target_weather == "la");

  auto sweep = preset_scenario("onoff-boundary");
  CHECK(sweep.onoff_upper_bounds.size() >= 3);
}

TEST_CASE("config hash is stable and sensitive") {
  auto cfg = desk_config();
  auto spec = preset_scenario("transfer-4z1-to-4z2");
  auto h1 = config_hash(cfg, spec);
  CHECK(h1 == config_hash(cfg, spec));
  cfg.gamma = 0.95;
  CHECK(h1 != config_hash(cfg, spec));
  auto other = preset_scenario("transfer-4z1-to-5z1");
  CHECK(config_hash(desk_config(), other) != h1);
}

TEST_CASE("csv writers emit one row per entry") {
  ResultRow row;
  row.scenario = "transfer-4z1-to-4z2";
  row.method = "ours";
  row.building = "4-zone-2";
  row.weather = "riverside";
  row.ep = 0;
  row.seed = 1;
  row.metrics = compute_metrics(make_traj({{22.0, 22.0}, {25.0, 22.0}}, 0.5));
  row.config_hash = "abc";
  row.checkpoint_id = "ckpt";

  const std::string path = "test_harness_rows.csv";
  write_results_csv(path, {row, row});
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == results_csv_header());
  CHECK(lines[1] == lines[2]);
  CHECK(lines[1].find("ours") != std::string::npos);
  // Header and rows agree on column count.
  auto commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(commas(lines[0]) == commas(lines[1]));
  std::remove(path.c_str());
}

TEST_CASE("trajectory csv has one row per control step") {
  auto traj = make_traj(std::vector<std::vector<double>>(5, {22.0, 23.0}), 0.1);
  const std::string path = "test_harness_traj.csv";
  write_trajectory_csv(path, traj);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  std::remove(path.c_str());
}

TEST_CASE("frontend checkpoint path depends on source settings only") {
  auto cfg = desk_config();
  auto a = preset_scenario("transfer-4z1-to-4z2");
  auto b = preset_scenario("transfer-4z1-to-5z1");
  // Same source building/weather/equipment: the trained frontend is reusable.
  CHECK(frontend_checkpoint_path("out", a, cfg, 1) ==
        frontend_checkpoint_path("out", b, cfg, 1));
  CHECK(frontend_checkpoint_path("out", a, cfg, 1) !=
        frontend_checkpoint_path("out", a, cfg, 2));
  auto wx = preset_scenario("weather-la-to-riverside");
  CHECK(frontend_checkpoint_path("out", wx, cfg, 1) !=
        frontend_checkpoint_path("out", a, cfg, 1));
}

TEST_CASE("tiny scenario run emits rows and checkpoints") {
  ScenarioSpec spec = preset_scenario("transfer-4z1-to-4z2");
  spec.frontend_epochs = 1;
  spec.finetune_epochs = 0;
  spec.seeds = {1};
  auto cfg = desk_config();
  cfg.epoch_days = 1;
  cfg.batch_size = 4;

  const std::string out_dir = "test_harness_out";
  auto artifacts = run_scenario(spec, cfg, out_dir);
  // One ON-OFF row plus one EP=0 row.
  REQUIRE(artifacts.rows.size() == 2);
  CHECK(artifacts.rows[0].method == "ON-OFF");
  CHECK(artifacts.rows[1].method == "ours");
  CHECK(artifacts.rows[1].ep == 0);
  CHECK(artifacts.rows[1].metrics.theta.size() == 4);
  CHECK_FALSE(artifacts.checkpoint_paths.empty());

  // Second run reuses the cached frontend and reproduces the rows.
  auto again = run_scenario(spec, cfg, out_dir);
  CHECK(again.rows.size() == 2);
  CHECK(to_csv_row(again.rows[1]) == to_csv_row(artifacts.rows[1]));

  std::error_code ec;
  std::filesystem::remove_all(out_dir, ec);
}
