#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "hvacx/weather.hpp"

using namespace hvacx;

namespace {

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size() - 1);
}

std::string write_temp_csv(const std::string& body) {
  std::string path = "test_weather_tmp.csv";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("load parses valid 15-min rows") {
  auto path = write_temp_csv(
      "timestamp,ambient_temp_c,solar_wm2\n"
      "2020-08-01T00:00:00,25.0,0\n"
      "2020-08-01T00:15:00,25.5,0\n"
      "2020-08-01T00:30:00,26.0,10\n"
      "2020-08-01T00:45:00,26.5,20\n");
  auto w = WeatherSeries::load(path);
  CHECK(w.size() == 4);
  CHECK(w.ambient_at(15.0) == doctest::Approx(25.5));
  std::remove(path.c_str());
}

TEST_CASE("load rejects wrong cadence") {
  auto path = write_temp_csv(
      "timestamp,ambient_temp_c,solar_wm2\n"
      "2020-08-01T00:00:00,25.0,0\n"
      "2020-08-01T00:10:00,25.5,0\n");
  CHECK_THROWS_AS(WeatherSeries::load(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("load rejects negative solar") {
  auto path = write_temp_csv(
      "timestamp,ambient_temp_c,solar_wm2\n"
      "2020-08-01T00:00:00,25.0,-5\n");
  CHECK_THROWS_AS(WeatherSeries::load(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("load rejects malformed rows and empty files") {
  auto path = write_temp_csv(
      "timestamp,ambient_temp_c,solar_wm2\n"
      "2020-08-01T00:00:00,abc,0\n");
  CHECK_THROWS_AS(WeatherSeries::load(path), ParseError);
  std::remove(path.c_str());

  auto empty = write_temp_csv("timestamp,ambient_temp_c,solar_wm2\n");
  CHECK_THROWS_AS(WeatherSeries::load(empty), ValidationError);
  std::remove(empty.c_str());
}

TEST_CASE("synth is deterministic per seed") {
  auto p = preset_profile("riverside");
  auto a = WeatherSeries::synth(p, 5, 42);
  auto b = WeatherSeries::synth(p, 5, 42);
  CHECK(a.ambient() == b.ambient());
  CHECK(a.solar() == b.solar());
  auto c = WeatherSeries::synth(p, 5, 43);
  CHECK(a.ambient() != c.ambient());
}

TEST_CASE("synth degenerate profile gives constant ambient") {
  WeatherProfile flat{"flat", 22.0, 0.0, 0.0, 0.0, 12.0};
  auto w = WeatherSeries::synth(flat, 2, 7);
  for (double t : w.ambient()) CHECK(t == doctest::Approx(22.0));
  for (double s : w.solar()) CHECK(s == 0.0);
}

TEST_CASE("synth rejects zero days") {
  CHECK_THROWS_AS(WeatherSeries::synth(preset_profile("la"), 0, 1),
                  ValidationError);
}

TEST_CASE("riverside has larger variance than la") {
  auto r = WeatherSeries::synth(preset_profile("riverside"), 31, 9);
  auto l = WeatherSeries::synth(preset_profile("la"), 31, 9);
  CHECK(sample_variance(r.ambient()) > sample_variance(l.ambient()));
}

TEST_CASE("outside_state layout and constant series") {
  std::vector<double> amb(5 * kStepsPerDay, 20.0);
  std::vector<double> sol(5 * kStepsPerDay, 100.0);
  WeatherSeries w("2020-08-01T00:00:00", amb, sol);
  auto s = w.outside_state(0.0);
  auto f = s.features();
  CHECK(f.size() == 8);
  for (int d = 0; d < 4; ++d) {
    CHECK(f[d] == doctest::Approx(20.0));
    CHECK(f[4 + d] == doctest::Approx(100.0));
  }
}

TEST_CASE("forecast features read the same clock time k days ahead") {
  auto w = WeatherSeries::synth(preset_profile("riverside"), 4, 5);
  const double noon = 12 * 60;
  auto s = w.outside_state(noon);
  CHECK(s.t_out[1] == doctest::Approx(w.ambient_at(noon + 24 * 60)));
  CHECK(s.t_out[3] == doctest::Approx(w.ambient_at(noon + 3 * 24 * 60)));
  CHECK(s.sun_out[2] == doctest::Approx(w.solar_at(noon + 2 * 24 * 60)));
}

TEST_CASE("outside_state boundary and horizon error") {
  auto w = WeatherSeries::synth(preset_profile("la"), 1, 3);  // 4 days total
  const double last_valid = (w.size() - 1 - 3 * kStepsPerDay) * 15.0;
  CHECK_NOTHROW(w.outside_state(last_valid));
  CHECK_THROWS_AS(w.outside_state(last_valid + 15.0), HorizonError);
}

TEST_CASE("outside_state is pure and 24h-periodic series has equal forecasts") {
  // Noise-free profile: every day is identical, so T0..T3 coincide.
  WeatherProfile clean{"clean", 25.0, 8.0, 0.0, 700.0, 12.0};
  auto w = WeatherSeries::synth(clean, 3, 0);
  for (double t : {0.0, 375.0, 720.0, 1200.0}) {
    auto a = w.outside_state(t);
    auto b = w.outside_state(t);
    CHECK(a.features() == b.features());
    for (int d = 1; d < 4; ++d) {
      CHECK(a.t_out[d] == doctest::Approx(a.t_out[0]));
      CHECK(a.sun_out[d] == doctest::Approx(a.sun_out[0]));
    }
  }
}

TEST_CASE("misaligned query rejected") {
  auto w = WeatherSeries::synth(preset_profile("la"), 1, 3);
  CHECK_THROWS_AS(w.ambient_at(7.5), ValidationError);
}

TEST_CASE("unknown profile name") {
  CHECK_THROWS_AS(preset_profile("mars"), CatalogError);
}
