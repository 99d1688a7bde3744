#include "hvacx/building.hpp"

#include <cmath>

namespace hvacx {

void HvacEquipment::validate() const {
  if (levels() < 2) {
    throw ValidationError("equipment needs at least 2 levels");
  }
  if (power_per_level.size() != airflow_per_level.size()) {
    throw ValidationError("airflow and power level counts differ");
  }
  if (airflow_per_level[0] != 0.0 || power_per_level[0] != 0.0) {
    throw ValidationError("level 0 must have zero flow and zero power");
  }
  for (int l = 1; l < levels(); ++l) {
    if (airflow_per_level[l] < airflow_per_level[l - 1] ||
        power_per_level[l] < power_per_level[l - 1]) {
      throw ValidationError("airflow/power must be nondecreasing in level");
    }
  }
}

void BuildingModel::validate() const {
  if (zones.empty()) {
    throw ValidationError("building has no zones");
  }
  for (const auto& z : zones) {
    if (z.heat_capacity <= 0 || z.r_to_ambient <= 0 || z.solar_gain_coeff < 0) {
      throw ValidationError("invalid zone thermal parameters");
    }
  }
  for (const auto& [i, j, r] : inter_zone_resistance) {
    if (i < 0 || j < 0 || i >= n_zones() || j >= n_zones() || i == j) {
      throw ValidationError("inter-zone adjacency references bad zone index");
    }
    if (r <= 0) {
      throw ValidationError("inter-zone resistance must be positive");
    }
  }
  equipment.validate();
  for (double rate : prices.hourly_rate) {
    if (rate <= 0) {
      throw ValidationError("hourly rates must be positive");
    }
  }
}

PriceSchedule default_prices() {
  PriceSchedule p;
  for (int h = 0; h < 24; ++h) {
    p.hourly_rate[h] = (h >= 12 && h < 18) ? 0.30 : 0.10;
  }
  return p;
}

SystemState step(const BuildingModel& model, const SystemState& state,
                 const ActionVector& action, const WeatherSeries& weather,
                 int substeps) {
  const int n = model.n_zones();
  if (state.n_zones() != n) {
    throw ShapeError("state zone count does not match the model");
  }
  if (static_cast<int>(action.size()) != n) {
    throw ShapeError("action length does not match the zone count");
  }
  const int m = model.equipment.levels();
  for (int a : action) {
    if (a < 0 || a >= m) {
      throw ValidationError("action level out of range [0, " +
                            std::to_string(m) + ")");
    }
  }
  if (substeps < 1) {
    throw ValidationError("substeps must be >= 1");
  }

  // Ambient and irradiance held at the period's start values (zero-order hold
  // over one control period).
  const double t_amb = weather.ambient_at(state.t);
  const double irr = weather.solar_at(state.t);
  const double dt = kControlPeriodMin * 60.0 / substeps;  // s

  std::vector<double> temps = state.s_in;
  std::vector<double> flux(n);
  for (int s = 0; s < substeps; ++s) {
    for (int i = 0; i < n; ++i) {
      const ZoneParams& z = model.zones[i];
      double q = (t_amb - temps[i]) / z.r_to_ambient + z.solar_gain_coeff * irr;
      const double flow = model.equipment.airflow_per_level[action[i]];
      q += flow * kAirSpecificHeat * (model.equipment.supply_temp - temps[i]);
      flux[i] = q;
    }
    for (const auto& [i, j, r] : model.inter_zone_resistance) {
      const double q = (temps[j] - temps[i]) / r;
      flux[i] += q;
      flux[j] -= q;
    }
    for (int i = 0; i < n; ++i) {
      temps[i] += dt * flux[i] / model.zones[i].heat_capacity;
    }
  }

  SystemState next;
  next.t = state.t + kControlPeriodMin;
  next.s_in = std::move(temps);
  next.s_out = weather.outside_state(next.t);
  return next;
}

double energy_cost(const BuildingModel& model, const ActionVector& action,
                   double t_min) {
  const int m = model.equipment.levels();
  double power_w = 0.0;
  for (int a : action) {
    if (a < 0 || a >= m) {
      throw ValidationError("action level out of range");
    }
    power_w += model.equipment.power_per_level[a];
  }
  const double kwh = power_w * (kControlPeriodMin / 60.0) / 1000.0;
  return kwh * model.prices.rate_at(t_min);
}

SystemState make_initial_state(const BuildingModel& model,
                               const WeatherSeries& weather,
                               double initial_temp) {
  SystemState s;
  s.t = 0.0;
  s.s_in.assign(model.n_zones(), initial_temp);
  s.s_out = weather.outside_state(0.0);
  return s;
}

HvacEquipment preset_equipment(const std::string& name) {
  HvacEquipment eq;
  eq.supply_temp = 10.0;
  if (name == "AC1") {
    eq.airflow_per_level = {0.0, 0.08};
    eq.power_per_level = {0.0, 1200.0};
  } else if (name == "AC2") {
    eq.airflow_per_level = {0.0, 0.02, 0.04, 0.06, 0.08};
    eq.power_per_level = {0.0, 300.0, 600.0, 900.0, 1200.0};
  } else if (name == "AC3") {
    eq.airflow_per_level = {0.0, 0.16};
    eq.power_per_level = {0.0, 2400.0};
  } else {
    throw CatalogError("unknown equipment preset '" + name + "'");
  }
  eq.validate();
  return eq;
}

namespace {

BuildingModel make_building(std::string name, std::vector<ZoneParams> zones,
                            std::vector<std::tuple<int, int, double>> adj) {
  BuildingModel b;
  b.name = std::move(name);
  b.zones = std::move(zones);
  b.inter_zone_resistance = std::move(adj);
  b.equipment = preset_equipment("AC1");
  b.prices = default_prices();
  b.validate();
  return b;
}

}  // namespace

BuildingModel preset_building(const std::string& name) {
  // Capacities in J/degC, resistances in degC/W, apertures in m^2.
  // Time constants are kept above 1 h so the Euler stepper has wide margin.
  if (name == "1-zone-1") {
    return make_building(name, {{2.40e6, 0.040, 0.20}}, {});
  }
  if (name == "4-zone-1") {
    // Square layout, four perimeter zones in a ring.
    return make_building(name,
                         {{2.00e6, 0.040, 0.20},
                          {2.20e6, 0.038, 0.24},
                          {2.20e6, 0.042, 0.18},
                          {2.10e6, 0.036, 0.22}},
                         {{0, 1, 0.05}, {1, 2, 0.05}, {2, 3, 0.05}, {0, 3, 0.05}});
  }
  if (name == "4-zone-2" || name == "4-zone-3") {
    // Hub-and-spoke layout with different wall materials than 4-zone-1.
    std::vector<ZoneParams> zones = {{1.60e6, 0.034, 0.26},
                                     {2.20e6, 0.045, 0.16},
                                     {1.90e6, 0.039, 0.22},
                                     {2.30e6, 0.031, 0.26}};
    if (name == "4-zone-3") {
      // Larger rooms: more thermal mass and proportionally more glazing.
      // The extra solar gain keeps the daily peak near midday; with the
      // original aperture the peak drifts into the evening and the
      // thermostat's release ride-down ends in the cold night hours.
      for (auto& z : zones) {
        z.heat_capacity *= 1.2;
        z.solar_gain_coeff *= 1.5;
      }
    }
    return make_building(name, std::move(zones),
                         {{0, 1, 0.04}, {0, 2, 0.04}, {0, 3, 0.04}});
  }
  if (name == "5-zone-1") {
    // Four perimeter zones around an interior core (zone 4).
    return make_building(
        name,
        {{1.80e6, 0.037, 0.22},
         {2.40e6, 0.041, 0.18},
         {2.00e6, 0.039, 0.24},
         {2.20e6, 0.035, 0.20},
         {2.80e6, 0.050, 0.10}},
        {{0, 1, 0.06}, {1, 2, 0.06}, {2, 3, 0.06}, {0, 3, 0.06},
         {0, 4, 0.045}, {1, 4, 0.045}, {2, 4, 0.045}, {3, 4, 0.045}});
  }
  if (name == "7-zone-1") {
    // Two rows of offices (0-3 south, 4-6 north), larger rooms.
    return make_building(
        name,
        {{2.04e6, 0.033, 0.24},
         {2.40e6, 0.040, 0.20},
         {2.76e6, 0.037, 0.22},
         {2.28e6, 0.034, 0.26},
         {3.00e6, 0.042, 0.16},
         {2.52e6, 0.046, 0.14},
         {2.16e6, 0.036, 0.18}},
        {{0, 1, 0.055}, {1, 2, 0.055}, {2, 3, 0.055},
         {4, 5, 0.055}, {5, 6, 0.055},
         {0, 4, 0.055}, {1, 5, 0.055}, {2, 6, 0.055}});
  }
  throw CatalogError("unknown building preset '" + name + "'");
}

}  // namespace hvacx
