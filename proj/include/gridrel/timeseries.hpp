#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/rng.hpp"

namespace gridrel {

struct HourlySeries {
  std::vector<double> values;
  double timestep_hours = 1.0;
  std::string label;

  void validate() const {
    if (values.empty()) throw validation_error("HourlySeries '" + label + "': empty series");
    if (!(timestep_hours > 0.0)) {
      throw validation_error("HourlySeries '" + label + "': timestep must be positive");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < 0.0) {
        throw validation_error("HourlySeries '" + label + "': value at index " +
                               std::to_string(i) + " is negative or non-finite");
      }
    }
  }

  double span_hours() const { return static_cast<double>(values.size()) * timestep_hours; }
};

// load_shape: per unit of annual peak (max value 1). ghi_shape: per unit of
// 1 kW/m^2 standard irradiance, zero whenever the sun is down.
struct ProfilePair {
  HourlySeries load_shape;
  HourlySeries ghi_shape;
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

// Reads one named column from a header-row CSV. Data rows are numbered from 1
// in error messages.
inline HourlySeries import_csv_series(const std::string& path, const std::string& column,
                                      double timestep_hours = 1.0) {
  if (!(timestep_hours > 0.0)) throw validation_error("import_csv_series: timestep must be positive");
  std::ifstream in(path);
  if (!in) throw io_error("import_csv_series: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error("import_csv_series: '" + path + "' is empty");
  const auto header = detail::split_csv_row(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) { col = i; break; }
  }
  if (col == header.size()) {
    throw validation_error("import_csv_series: column '" + column + "' not found in '" + path + "'");
  }
  HourlySeries out;
  out.timestep_hours = timestep_hours;
  out.label = column;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_row(line);
    if (col >= cells.size()) {
      throw validation_error("import_csv_series: row " + std::to_string(row) +
                             " has no cell for column '" + column + "'");
    }
    const std::string& cell = cells[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw validation_error("import_csv_series: row " + std::to_string(row) +
                             " column '" + column + "': '" + cell + "' is not a number");
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw validation_error("import_csv_series: row " + std::to_string(row) +
                             " column '" + column + "': negative or non-finite value");
    }
    out.values.push_back(v);
  }
  out.validate();
  return out;
}

inline HourlySeries normalize_to_peak(const HourlySeries& s) {
  s.validate();
  double peak = 0.0;
  for (double v : s.values) peak = std::max(peak, v);
  if (peak <= 0.0) throw validation_error("normalize_to_peak: series '" + s.label + "' is all zero");
  HourlySeries out = s;
  for (double& v : out.values) v /= peak;
  return out;
}

// Synthetic one-year profile generator, shaped like a sunny mid-latitude
// city (think coastal Southern California): low overnight load, a small
// morning bump at 08:00, a daytime cooling load that tracks the sun, a
// dominant evening peak at 19:00, a +/-20% seasonal swing, and mostly-clear
// irradiance with a 9.7-14.3 h day length span. The constants below are the
// only tuning surface and are documented in the README config reference.
// Fully determined by (seed, year_hours, timestep_hours).
inline ProfilePair synth_profiles(std::uint64_t seed, int year_hours = 8760,
                                  double timestep_hours = 1.0) {
  if (year_hours < 24) throw validation_error("synth_profiles: year_hours must be at least 24");
  if (!(timestep_hours > 0.0) || timestep_hours > 24.0) {
    throw validation_error("synth_profiles: timestep must lie in (0, 24] hours");
  }
  const auto n = static_cast<std::size_t>(std::llround(year_hours / timestep_hours));
  if (!(std::fabs(n * timestep_hours - year_hours) < 1e-9)) {
    throw validation_error("synth_profiles: year_hours must be a whole number of timesteps");
  }
  const double days_in_year = year_hours / 24.0;

  HourlySeries load{{}, timestep_hours, "synthetic-load"};
  HourlySeries ghi{{}, timestep_hours, "synthetic-ghi"};
  load.values.resize(n);
  ghi.values.resize(n);

  constexpr double kBaseLoad = 0.085;
  constexpr double kMorningAmp = 0.24, kMorningHour = 8.0, kMorningWidth = 1.6;
  // Daytime cooling load tracks the clear-sky irradiance shape (AC usage
  // follows insolation), so it rises and falls with the sun.
  constexpr double kCoolLoad = 0.50;
  // Evening peak rises sharply toward 19:00 and tapers slowly into the night.
  constexpr double kEveningAmp = 0.60, kEveningHour = 19.0;
  constexpr double kEveningRise = 1.4, kEveningTau = 2.4;
  constexpr double kSeasonAmp = 0.20;       // +/-20% seasonal swing on load
  constexpr double kLoadNoise = 0.04;
  constexpr double kLoadFloor = 0.05;
  constexpr double kClearSkyBase = 0.85, kClearSkySeason = 0.13;
  constexpr double kCloudDepth = 0.35;      // deepest per-day attenuation
  constexpr double kGhiJitter = 0.03;
  constexpr double kTwoPi = 6.283185307179586;

  double cloud_day = 1.0;
  long long cached_day = -1;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * timestep_hours;
    const auto day = static_cast<long long>(t / 24.0);
    const double hod = t - 24.0 * static_cast<double>(day);
    // Summer-peaking season terms; solar peaks near day 172, load near day 199.
    const double season_sun = std::cos(kTwoPi * (static_cast<double>(day) - 172.0) / days_in_year);
    const double season_load = std::cos(kTwoPi * (static_cast<double>(day) - 199.0) / days_in_year);

    if (day != cached_day) {
      SplitMix64 day_rng(derive_seed(seed, stream::kProfileDay, static_cast<std::uint64_t>(day)));
      const double u = day_rng.uniform01();
      cloud_day = 1.0 - kCloudDepth * u * u * u * u;  // skewed toward clear days
      cached_day = day;
    }
    const double day_len = 12.0 + 1.6 * season_sun;
    const double sunrise = 12.0 - 0.5 * day_len;
    double clear_sun = 0.0;  // clear-sky irradiance shape, before clouds
    if (hod > sunrise && hod < sunrise + day_len) {
      const double elev = std::sin((hod - sunrise) / day_len * 3.14159265358979324);
      clear_sun = elev * (kClearSkyBase + kClearSkySeason * season_sun);
    }

    const double mb = (hod - kMorningHour) / kMorningWidth;
    double ev_since = hod - kEveningHour;  // hours past the evening peak, wrapped
    if (ev_since < 0.0) ev_since += 24.0;
    double ev_until = kEveningHour - hod;  // hours until the evening peak, wrapped
    if (ev_until < 0.0) ev_until += 24.0;
    const double rb = ev_until / kEveningRise;
    const double ev = kEveningAmp *
                      std::max(std::exp(-ev_since / kEveningTau), std::exp(-0.5 * rb * rb));
    double lv = kBaseLoad + kMorningAmp * std::exp(-0.5 * mb * mb) +
                kCoolLoad * clear_sun + ev;
    lv *= 1.0 + kSeasonAmp * season_load;
    SplitMix64 step_rng(derive_seed(seed, stream::kProfileStep, k));
    lv *= 1.0 + kLoadNoise * (2.0 * step_rng.uniform01() - 1.0);
    load.values[k] = std::max(lv, kLoadFloor);

    ghi.values[k] = clear_sun * cloud_day * (1.0 - kGhiJitter * step_rng.uniform01());
  }

  double peak = 0.0;
  for (double v : load.values) peak = std::max(peak, v);
  for (double& v : load.values) v /= peak;
  return {std::move(load), std::move(ghi)};
}

}  // namespace gridrel
