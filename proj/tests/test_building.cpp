#include <doctest.h>

#include <cmath>

#include "hvacx/building.hpp"

using namespace hvacx;

namespace {

WeatherSeries constant_weather(double temp, double solar, int days = 5) {
  std::vector<double> amb(days * kStepsPerDay, temp);
  std::vector<double> sol(days * kStepsPerDay, solar);
  return WeatherSeries("2020-08-01T00:00:00", std::move(amb), std::move(sol));
}

BuildingModel single_zone(double c = 1.0e6, double r = 0.04, double g = 0.0) {
  BuildingModel b = preset_building("1-zone-1");
  b.zones[0] = {c, r, g};
  return b;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point") {
  auto model = preset_building("4-zone-1");
  auto w = constant_weather(20.0, 0.0);
  SystemState s = make_initial_state(model, w, 20.0);
  ActionVector off(4, 0);
  SystemState next = step(model, s, off, w);
  for (double t : next.s_in) CHECK(t == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(next.t == 15.0);
}

TEST_CASE("max cooling lowers temperature at equal ambient") {
  auto model = single_zone();
  auto w = constant_weather(30.0, 0.0);
  SystemState s = make_initial_state(model, w, 30.0);
  SystemState next = step(model, s, {1}, w);
  CHECK(next.s_in[0] < 30.0);
}

TEST_CASE("free response matches the closed-form linear ODE within 0.05 degC") {
  const double r = 0.04, c = 1.0e6, t_amb = 35.0, t0 = 22.0;
  auto model = single_zone(c, r, 0.0);
  auto w = constant_weather(t_amb, 0.0);
  SystemState s = make_initial_state(model, w, t0);
  for (int k = 0; k < 4; ++k) s = step(model, s, {0}, w);  // one hour
  const double expected = t_amb + (t0 - t_amb) * std::exp(-3600.0 / (r * c));
  CHECK(std::abs(s.s_in[0] - expected) < 0.05);
}

TEST_CASE("sub-step refinement drift below 0.01 degC") {
  auto model = preset_building("4-zone-2");
  auto w = constant_weather(38.0, 600.0);
  SystemState s = make_initial_state(model, w, 24.0);
  SystemState coarse = step(model, s, {1, 0, 1, 0}, w, 60);
  SystemState fine = step(model, s, {1, 0, 1, 0}, w, 120);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(coarse.s_in[i] - fine.s_in[i]) < 0.01);
  }
}

TEST_CASE("symmetric building gives identical zone trajectories") {
  BuildingModel b = preset_building("4-zone-1");
  for (auto& z : b.zones) z = {1.0e6, 0.04, 0.2};
  for (auto& [i, j, r] : b.inter_zone_resistance) r = 0.05;
  auto w = constant_weather(33.0, 400.0);
  SystemState s = make_initial_state(b, w, 25.0);
  for (int k = 0; k < 8; ++k) {
    s = step(b, s, {1, 1, 1, 1}, w);
    for (int i = 1; i < 4; ++i) {
      CHECK(s.s_in[i] == doctest::Approx(s.s_in[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("comparison principle with HVAC off and no solar") {
  auto model = preset_building("4-zone-1");
  auto w = constant_weather(35.0, 0.0);
  SystemState s = make_initial_state(model, w, 22.0);
  ActionVector off(4, 0);
  for (int k = 0; k < 96; ++k) {
    s = step(model, s, off, w);
    for (double t : s.s_in) {
      CHECK(t >= 22.0 - 1e-9);
      CHECK(t <= 35.0 + 1e-9);
    }
  }
}

TEST_CASE("step validates shapes and action range") {
  auto model = preset_building("4-zone-1");
  auto w = constant_weather(30.0, 0.0);
  SystemState s = make_initial_state(model, w, 22.0);
  CHECK_THROWS_AS(step(model, s, {1, 1}, w), ShapeError);
  CHECK_THROWS_AS(step(model, s, {0, 0, 0, 2}, w), ValidationError);
  SystemState bad = s;
  bad.s_in.resize(3);
  CHECK_THROWS_AS(step(model, bad, {0, 0, 0, 0}, w), ShapeError);
}

TEST_CASE("energy cost arithmetic") {
  BuildingModel b = preset_building("1-zone-1");
  b.equipment.airflow_per_level = {0.0, 0.05};
  b.equipment.power_per_level = {0.0, 1000.0};
  for (auto& r : b.prices.hourly_rate) r = 0.2;

  CHECK(energy_cost(b, {0}, 0.0) == 0.0);
  // 1 kW for 15 min at 0.2 $/kWh.
  CHECK(energy_cost(b, {1}, 0.0) == doctest::Approx(0.05));

  BuildingModel doubled = b;
  doubled.equipment.power_per_level = {0.0, 2000.0};
  CHECK(energy_cost(doubled, {1}, 0.0) ==
        doctest::Approx(2.0 * energy_cost(b, {1}, 0.0)));
}

TEST_CASE("cost uses the hourly rate at t") {
  BuildingModel b = preset_building("1-zone-1");
  // Default tariff peaks 12:00-18:00 at 3x.
  const double off_peak = energy_cost(b, {1}, 0.0);
  const double peak = energy_cost(b, {1}, 13 * 60.0);
  CHECK(peak == doctest::Approx(3.0 * off_peak));
}

TEST_CASE("cost is additive across zones") {
  BuildingModel b = preset_building("4-zone-1");
  const double one = energy_cost(b, {1, 0, 0, 0}, 0.0);
  const double all = energy_cost(b, {1, 1, 1, 1}, 0.0);
  CHECK(all == doctest::Approx(4.0 * one));
}

TEST_CASE("building presets") {
  CHECK(preset_building("4-zone-1").n_zones() == 4);
  CHECK(preset_building("7-zone-1").n_zones() == 7);
  CHECK(preset_building("5-zone-1").n_zones() == 5);
  CHECK(preset_building("1-zone-1").n_zones() == 1);
  CHECK_THROWS_AS(preset_building("8-zone-9"), CatalogError);

  auto b1 = preset_building("4-zone-1");
  auto b2 = preset_building("4-zone-2");
  bool differs = false;
  for (int i = 0; i < 4; ++i) {
    if (b1.zones[i].heat_capacity != b2.zones[i].heat_capacity ||
        b1.zones[i].r_to_ambient != b2.zones[i].r_to_ambient) {
      differs = true;
    }
  }
  CHECK(differs);
  CHECK(b1.inter_zone_resistance != b2.inter_zone_resistance);

  auto b3 = preset_building("4-zone-3");
  for (int i = 0; i < 4; ++i) {
    // Larger rooms: scaled-up capacity, same layout and wall materials.
    CHECK(b3.zones[i].heat_capacity > b2.zones[i].heat_capacity);
    CHECK(b3.zones[i].r_to_ambient == b2.zones[i].r_to_ambient);
  }
}

TEST_CASE("equipment presets") {
  auto ac1 = preset_equipment("AC1");
  auto ac2 = preset_equipment("AC2");
  auto ac3 = preset_equipment("AC3");
  CHECK(ac1.levels() == 2);
  CHECK(ac2.levels() == 5);
  CHECK(ac3.airflow_per_level.back() ==
        doctest::Approx(2.0 * ac1.airflow_per_level.back()));
  CHECK(ac3.power_per_level.back() ==
        doctest::Approx(2.0 * ac1.power_per_level.back()));
  CHECK(ac1.supply_temp == 10.0);
  CHECK_THROWS_AS(preset_equipment("AC9"), CatalogError);
}

TEST_CASE("equipment validation") {
  HvacEquipment eq;
  eq.airflow_per_level = {0.0, 0.05, 0.04};  // decreasing
  eq.power_per_level = {0.0, 100.0, 200.0};
  CHECK_THROWS_AS(eq.validate(), ValidationError);
  eq.airflow_per_level = {0.01, 0.05};  // level 0 not off
  eq.power_per_level = {0.0, 100.0};
  CHECK_THROWS_AS(eq.validate(), ValidationError);
}
