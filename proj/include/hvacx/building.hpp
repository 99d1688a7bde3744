#pragma once

#include <array>
#include <string>
#include <tuple>
#include <vector>

#include "hvacx/types.hpp"
#include "hvacx/weather.hpp"

namespace hvacx {

// Lumped thermal parameters of one zone.
struct ZoneParams {
  double heat_capacity;     // J/degC
  double r_to_ambient;      // degC/W
  double solar_gain_coeff;  // effective aperture, m^2
};

// VAV equipment with m discrete levels. Level 0 is off (zero flow and power);
// airflow and electrical power are nondecreasing in level.
struct HvacEquipment {
  std::vector<double> airflow_per_level;  // kg/s
  std::vector<double> power_per_level;    // W electrical
  double supply_temp = 10.0;              // degC

  int levels() const { return static_cast<int>(airflow_per_level.size()); }
  void validate() const;
};

// Time-of-use tariff, one rate per hour of day.
struct PriceSchedule {
  std::array<double, 24> hourly_rate;  // $/kWh

  double rate_at(double t_min) const {
    return hourly_rate[static_cast<int>(hour_of_day(t_min))];
  }
};

// Default tariff with a 3x afternoon peak (12:00-18:00).
PriceSchedule default_prices();

// RC-network multi-zone building with VAV equipment and a TOU tariff.
struct BuildingModel {
  std::string name;
  std::vector<ZoneParams> zones;
  // Symmetric adjacency: (i, j, resistance degC/W) with i < j.
  std::vector<std::tuple<int, int, double>> inter_zone_resistance;
  HvacEquipment equipment;
  PriceSchedule prices;

  int n_zones() const { return static_cast<int>(zones.size()); }
  void validate() const;
};

// Integrates one control period (15 min) of zone dynamics under `action`
// with fixed explicit-Euler sub-steps; advances t and refreshes s_out.
SystemState step(const BuildingModel& model, const SystemState& state,
                 const ActionVector& action, const WeatherSeries& weather,
                 int substeps = 60);

// Electrical energy cost of holding `action` for one control period starting
// at t, under the model's tariff.
double energy_cost(const BuildingModel& model, const ActionVector& action,
                   double t_min);

// Initial state at t=0 with all zones at `initial_temp`.
SystemState make_initial_state(const BuildingModel& model,
                               const WeatherSeries& weather,
                               double initial_temp = 22.0);

// Catalog presets. Buildings: 1-zone-1, 4-zone-1, 4-zone-2, 4-zone-3,
// 5-zone-1, 7-zone-1. Equipment: AC1 (2 levels), AC2 (5 levels),
// AC3 (AC1 with doubled max airflow and power).
BuildingModel preset_building(const std::string& name);
HvacEquipment preset_equipment(const std::string& name);

}  // namespace hvacx
