#include <doctest.h>

#include <cstdio>

#include "hvacx/control.hpp"

using namespace hvacx;

namespace {

SystemState state_at(std::vector<double> temps) {
  SystemState s;
  s.t = 0.0;
  s.s_in = std::move(temps);
  s.s_out.t_out = {30.0, 30.0, 30.0, 30.0};
  s.s_out.sun_out = {0.0, 0.0, 0.0, 0.0};
  return s;
}

}  // namespace

TEST_CASE("on-off thermostat engages, releases, and latches") {
  OnOffController ctl(23.0, 19.0, 1);
  CHECK(ctl.act(state_at({21.0, 21.0})) == ActionVector({0, 0}));  // start off
  CHECK(ctl.act(state_at({26.0, 21.0})) == ActionVector({1, 0}));  // engage
  CHECK(ctl.act(state_at({21.0, 21.0})) == ActionVector({1, 0}));  // latched
  CHECK(ctl.act(state_at({18.0, 21.0})) == ActionVector({0, 0}));  // release
  CHECK(ctl.act(state_at({21.0, 21.0})) == ActionVector({0, 0}));  // stays off
  // Exact bounds trigger.
  CHECK(ctl.act(state_at({23.0, 19.0})) == ActionVector({1, 0}));
  ctl.reset();
  CHECK(ctl.act(state_at({21.0, 21.0})) == ActionVector({0, 0}));
}

TEST_CASE("for_equipment engages at the top level") {
  auto ac2 = preset_equipment("AC2");
  auto ctl = OnOffController::for_equipment(ac2);
  CHECK(ctl.act(state_at({25.0})) == ActionVector({4}));
  CHECK(ctl.upper_bound() == 23.0);
}

TEST_CASE("on-off keeps a hot month inside the band") {
  auto model = preset_building("4-zone-1");
  auto weather = WeatherSeries::synth(preset_profile("riverside"), 31, 4);
  auto ctl = OnOffController::for_equipment(model.equipment);
  auto traj = run_episode(ctl, model, weather, 31.0 * 24 * 60);
  REQUIRE(traj.steps.size() == 2976);
  CHECK(traj.total_cost() > 0.0);
  int violations = 0;
  for (const auto& step : traj.steps) {
    for (double t : step.state.s_in) {
      if (t < 19.0 - 0.5 || t > 24.0 + 0.5) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("run_episode bookkeeping") {
  auto model = preset_building("1-zone-1");
  auto weather = WeatherSeries::synth(preset_profile("la"), 2, 6);
  auto ctl = OnOffController::for_equipment(model.equipment);
  TrainConfig cfg;
  auto traj = run_episode(ctl, model, weather, 2.0 * 24 * 60, cfg);
  REQUIRE(traj.steps.size() == 192);
  CHECK(traj.steps.front().state.t == 0.0);
  CHECK(traj.steps[1].state.t == 15.0);
  double sum = 0.0;
  for (const auto& s : traj.steps) sum += s.cost;
  CHECK(traj.total_cost() == doctest::Approx(sum));
  // Rewards follow the configured composition against the post-step state.
  for (const auto& s : traj.steps) {
    CHECK(s.reward <= 0.0);
    CHECK(s.action.size() == 1);
  }

  ctl.reset();
  auto again = run_episode(ctl, model, weather, 2.0 * 24 * 60, cfg);
  CHECK(again.total_cost() == doctest::Approx(traj.total_cost()));

  CHECK_THROWS_AS(run_episode(ctl, model, weather, 40.0 * 24 * 60),
                  HorizonError);
}

TEST_CASE("zero tariff means zero cost") {
  auto model = preset_building("1-zone-1");
  for (auto& r : model.prices.hourly_rate) r = 0.0;
  auto weather = WeatherSeries::synth(preset_profile("riverside"), 1, 6);
  auto ctl = OnOffController::for_equipment(model.equipment);
  auto traj = run_episode(ctl, model, weather, 24 * 60.0);
  CHECK(traj.total_cost() == 0.0);
}

TEST_CASE("deployed controller is deterministic and shape-safe") {
  auto model = preset_building("4-zone-1");
  DeployedController ctl(make_frontend(10),
                         make_inverse(4, model.equipment.levels(), 11));
  auto s = state_at({22.0, 23.0, 24.0, 21.0});
  auto a = ctl.act(s);
  REQUIRE(a.size() == 4);
  CHECK(ctl.act(s) == a);
  for (int lvl : a) {
    CHECK(lvl >= 0);
    CHECK(lvl < model.equipment.levels());
  }
}

TEST_CASE("compatibility checks") {
  auto model = preset_building("4-zone-1");  // AC1, m = 2
  auto fe = make_frontend(1);
  CHECK_NOTHROW(check_compatibility(fe, make_inverse(4, 2, 2), model));
  // Wrong zone count.
  CHECK_THROWS_AS(check_compatibility(fe, make_inverse(5, 2, 2), model),
                  ValidationError);
  // Wrong level count (backend trained for AC2).
  CHECK_THROWS_AS(check_compatibility(fe, make_inverse(4, 5, 2), model),
                  ValidationError);
  // Mismatched bin grids.
  BinParams coarse{2.0, 10};
  CHECK_THROWS_AS(check_compatibility(fe, make_inverse(4, 2, 2, coarse), model),
                  ValidationError);
}

TEST_CASE("load_deployed validates checkpoints against the building") {
  auto model = preset_building("4-zone-1");
  save_frontend("ctl_fe.json", make_frontend(3));
  save_inverse("ctl_be.json", make_inverse(4, 2, 4));
  save_inverse("ctl_be_bad.json", make_inverse(7, 2, 4));
  CHECK_NOTHROW(load_deployed("ctl_fe.json", "ctl_be.json", model));
  CHECK_THROWS_AS(load_deployed("ctl_fe.json", "ctl_be_bad.json", model),
                  ValidationError);
  std::remove("ctl_fe.json");
  std::remove("ctl_be.json");
  std::remove("ctl_be_bad.json");
}

TEST_CASE("fine_tune with zero epochs returns the controller unchanged") {
  auto model = preset_building("4-zone-1");
  DeployedController ctl(make_frontend(20),
                         make_inverse(4, model.equipment.levels(), 21));
  auto weather = profile_weather_source(preset_profile("riverside"), 2, 30);
  TrainConfig cfg;
  auto result = fine_tune(ctl, model, weather, 0, cfg, 99, 2);
  CHECK(result.controller.frontend().subnet.weights[0] ==
        ctl.frontend().subnet.weights[0]);
  CHECK(result.controller.backend().net.weights[0] ==
        ctl.backend().net.weights[0]);
  CHECK(result.log.empty());
}

TEST_CASE("fine_tune updates weights without exploration noise") {
  auto model = preset_building("1-zone-1");
  DeployedController ctl(make_frontend(40),
                         make_inverse(1, model.equipment.levels(), 41));
  auto weather = profile_weather_source(preset_profile("riverside"), 1, 50);
  TrainConfig cfg;
  cfg.batch_size = 4;
  auto result = fine_tune(ctl, model, weather, 1, cfg, 7, 1);
  CHECK(result.controller.frontend().subnet.weights[0] !=
        ctl.frontend().subnet.weights[0]);
  CHECK(result.controller.frontend().subnet.all_finite());
  REQUIRE(result.log.size() == 96);
  for (const auto& entry : result.log) CHECK(entry.eps == 0.0);
  CHECK(result.trajectory.steps.size() == 96);
}
