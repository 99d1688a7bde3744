#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvacx {

// Control period of the VAV system (one decision per 15 minutes).
inline constexpr int kControlPeriodMin = 15;
inline constexpr int kStepsPerDay = 24 * 60 / kControlPeriodMin;  // 96
inline constexpr double kAirSpecificHeat = 1005.0;                // J/(kg*degC), dry air

// One VAV level index per zone, level in [0, m).
using ActionVector = std::vector<int>;

// 8-feature outside state: ambient temperature and solar irradiance,
// now and at the same clock time 1/2/3 days ahead.
struct OutsideState {
  std::array<double, 4> t_out;    // degC
  std::array<double, 4> sun_out;  // W/m^2

  std::array<double, 8> features() const {
    return {t_out[0], t_out[1], t_out[2], t_out[3],
            sun_out[0], sun_out[1], sun_out[2], sun_out[3]};
  }
};

struct SystemState {
  double t = 0.0;             // minutes since simulation start, multiple of 15
  std::vector<double> s_in;   // per-zone temperature, degC
  OutsideState s_out{};

  int n_zones() const { return static_cast<int>(s_in.size()); }
};

// Fractional hour-of-day in [0, 24). Simulations start at midnight.
inline double hour_of_day(double t_min) {
  double h = t_min / 60.0;
  h -= 24.0 * std::floor(h / 24.0);
  return h;
}

// One control period of a closed-loop run.
struct TrajectoryStep {
  SystemState state;    // state observed at the start of the period
  ActionVector action;  // action held for the period
  double cost;          // $ for this period
  double reward;        // reward observed at this state
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;

  double total_cost() const {
    double c = 0.0;
    for (const auto& s : steps) c += s.cost;
    return c;
  }
};

// Error types used across modules.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hvacx
