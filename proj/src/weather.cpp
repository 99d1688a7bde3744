#include "hvacx/weather.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

namespace hvacx {

namespace {

constexpr int kForecastDays = 3;
constexpr int kLookaheadSamples = kForecastDays * kStepsPerDay;

// Minutes since epoch-of-day-0 for an ISO-8601 timestamp. Only differences
// matter, so a simplified civil-calendar conversion is sufficient.
long long iso_to_minutes(const std::string& iso, int line_no) {
  int y, mo, d, h, mi;
  int s = 0;
  char sep;
  std::istringstream in(iso);
  in >> y >> sep >> mo >> sep >> d >> sep >> h >> sep >> mi;
  if (in.fail() || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 ||
      mi < 0 || mi > 59) {
    throw ParseError("weather csv line " + std::to_string(line_no) +
                     ": bad timestamp '" + iso + "'");
  }
  if (in.peek() == ':') {
    in >> sep >> s;
  }
  // Days since 0000-03-01 (Howard Hinnant's civil algorithm).
  y -= mo <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const long long days = era * 146097 + static_cast<long long>(doe) - 719468;
  return days * 1440 + h * 60 + mi + s / 60;
}

}  // namespace

WeatherProfile preset_profile(const std::string& name) {
  if (name == "riverside") {
    // Hot inland climate: very wide daily swing (cool nights, hot
    // afternoons) whose ambient range covers the mild profiles below.
    return {"riverside", 28.0, 10.5, 1.2, 950.0, 13.0};
  }
  if (name == "la") {
    // Mild coastal climate: small range, low variance.
    return {"la", 21.0, 2.5, 0.4, 400.0, 11.0};
  }
  if (name == "buffalo") {
    return {"buffalo", 20.0, 4.0, 1.2, 500.0, 12.0};
  }
  throw CatalogError("unknown weather profile '" + name + "'");
}

WeatherSeries::WeatherSeries(std::string start_iso,
                             std::vector<double> ambient_c,
                             std::vector<double> solar_wm2)
    : start_iso_(std::move(start_iso)),
      ambient_(std::move(ambient_c)),
      solar_(std::move(solar_wm2)) {
  if (ambient_.empty()) {
    throw ValidationError("weather series is empty");
  }
  if (ambient_.size() != solar_.size()) {
    throw ValidationError("ambient and solar sequences differ in length");
  }
  for (std::size_t i = 0; i < solar_.size(); ++i) {
    if (!std::isfinite(ambient_[i]) || !std::isfinite(solar_[i])) {
      throw ValidationError("non-finite weather sample at index " +
                            std::to_string(i));
    }
    if (solar_[i] < 0.0) {
      throw ValidationError("negative solar irradiance at index " +
                            std::to_string(i));
    }
  }
}

WeatherSeries WeatherSeries::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open weather file '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("weather file '" + path + "' is empty");
  }
  std::string start_iso;
  std::vector<double> ambient, solar;
  long long prev_minutes = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ts, temp_s, solar_s;
    if (!std::getline(row, ts, ',') || !std::getline(row, temp_s, ',') ||
        !std::getline(row, solar_s)) {
      throw ParseError("weather csv line " + std::to_string(line_no) +
                       ": expected 3 fields");
    }
    double temp, sol;
    try {
      temp = std::stod(temp_s);
      sol = std::stod(solar_s);
    } catch (const std::exception&) {
      throw ParseError("weather csv line " + std::to_string(line_no) +
                       ": bad numeric field");
    }
    const long long minutes = iso_to_minutes(ts, line_no);
    if (!ambient.empty() && minutes - prev_minutes != kControlPeriodMin) {
      throw ValidationError("weather csv line " + std::to_string(line_no) +
                            ": cadence is " +
                            std::to_string(minutes - prev_minutes) +
                            " min, expected 15");
    }
    if (ambient.empty()) start_iso = ts;
    prev_minutes = minutes;
    ambient.push_back(temp);
    solar.push_back(sol);
  }
  if (ambient.empty()) {
    throw ValidationError("weather file '" + path + "' has no data rows");
  }
  return WeatherSeries(start_iso, std::move(ambient), std::move(solar));
}

WeatherSeries WeatherSeries::synth(const WeatherProfile& profile, int days,
                                   std::uint64_t seed) {
  if (days < 1) {
    throw ValidationError("synth_weather: days must be >= 1");
  }
  if (profile.daily_amplitude < 0 || profile.noise_std < 0 ||
      profile.peak_irradiance < 0) {
    throw ValidationError("synth_weather: negative profile parameter");
  }
  const int total_days = days + kForecastDays;
  // One extra record so the terminal state of a `days`-long run still has a
  // full outside reading.
  const int n = total_days * kStepsPerDay + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> ambient(n), solar(n);
  const double sunrise = 12.0 - profile.day_length_hours / 2.0;
  for (int k = 0; k < n; ++k) {
    const double t_min = static_cast<double>(k) * kControlPeriodMin;
    const double h = hour_of_day(t_min);
    // Daily sinusoid peaking at 15:00.
    const double phase = 2.0 * std::numbers::pi * (h - 9.0) / 24.0;
    double temp = profile.daily_mean + profile.daily_amplitude * std::sin(phase);
    if (profile.noise_std > 0) temp += profile.noise_std * noise(rng);
    ambient[k] = temp;
    double irr = 0.0;
    if (profile.day_length_hours > 0 && h > sunrise &&
        h < sunrise + profile.day_length_hours) {
      irr = profile.peak_irradiance *
            std::sin(std::numbers::pi * (h - sunrise) / profile.day_length_hours);
    }
    solar[k] = std::max(0.0, irr);
  }
  return WeatherSeries("2020-08-01T00:00:00", std::move(ambient),
                       std::move(solar));
}

int WeatherSeries::index_of(double t_min) const {
  if (t_min < 0) {
    throw HorizonError("weather query before series start");
  }
  const double steps = t_min / kControlPeriodMin;
  const long long idx = std::llround(steps);
  if (std::abs(steps - static_cast<double>(idx)) > 1e-9) {
    throw ValidationError("weather query not aligned to the 15-min grid");
  }
  if (idx >= size()) {
    throw HorizonError("weather query at t=" + std::to_string(t_min) +
                       " min beyond series coverage");
  }
  return static_cast<int>(idx);
}

double WeatherSeries::ambient_at(double t_min) const {
  return ambient_[index_of(t_min)];
}

double WeatherSeries::solar_at(double t_min) const {
  return solar_[index_of(t_min)];
}

OutsideState WeatherSeries::outside_state(double t_min) const {
  const int base = index_of(t_min);
  if (base + kLookaheadSamples >= size()) {
    throw HorizonError("outside_state at t=" + std::to_string(t_min) +
                       " min: series does not cover the 3-day lookahead");
  }
  OutsideState out;
  for (int d = 0; d <= kForecastDays; ++d) {
    const int idx = base + d * kStepsPerDay;
    out.t_out[d] = ambient_[idx];
    out.sun_out[d] = solar_[idx];
  }
  return out;
}

bool WeatherSeries::covers(double duration_min) const {
  const double needed = duration_min + kForecastDays * 24 * 60;
  return needed / kControlPeriodMin < size();
}

}  // namespace hvacx
