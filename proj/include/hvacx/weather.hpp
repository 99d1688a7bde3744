#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hvacx/types.hpp"

namespace hvacx {

// Parameters of a synthetic weather profile. Profiles emulate climates with
// different daily ranges and variance (a hot high-variance inland climate vs
// milder coastal/northern ones).
struct WeatherProfile {
  std::string name;
  double daily_mean;        // degC
  double daily_amplitude;   // degC
  double noise_std;         // degC
  double peak_irradiance;   // W/m^2
  double day_length_hours;  // h
};

// Profile presets selectable by name: "riverside", "la", "buffalo".
WeatherProfile preset_profile(const std::string& name);

// Immutable ambient-temperature / solar-irradiance series on a 15-minute grid.
// Series start at midnight of day 0.
class WeatherSeries {
 public:
  WeatherSeries(std::string start_iso, std::vector<double> ambient_c,
                std::vector<double> solar_wm2);

  // CSV with header `timestamp,ambient_temp_c,solar_wm2`, ISO-8601 timestamps
  // at strict 15-minute cadence.
  static WeatherSeries load(const std::string& path);

  // Deterministic synthetic series: daily sinusoid plus Gaussian noise for
  // ambient, clipped half-sine for irradiance. Covers `days` plus the 3-day
  // forecast lookahead.
  static WeatherSeries synth(const WeatherProfile& profile, int days,
                             std::uint64_t seed);

  // Exact grid reads; t must be a multiple of the cadence.
  double ambient_at(double t_min) const;
  double solar_at(double t_min) const;

  // The 8-feature outside state at t (requires t + 3 days inside the series).
  OutsideState outside_state(double t_min) const;

  // True when the series covers `duration_min` of simulation plus the
  // 3-day forecast lookahead.
  bool covers(double duration_min) const;

  int size() const { return static_cast<int>(ambient_.size()); }
  const std::string& start_time() const { return start_iso_; }
  const std::vector<double>& ambient() const { return ambient_; }
  const std::vector<double>& solar() const { return solar_; }

 private:
  int index_of(double t_min) const;

  std::string start_iso_;
  std::vector<double> ambient_;
  std::vector<double> solar_;
};

}  // namespace hvacx
