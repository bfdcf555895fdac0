#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/rng.hpp"

namespace gridrel {

constexpr double kHoursPerYear = 8760.0;

struct LoadPointParams {
  double lambda_per_year = 0.0;       // sustained interruption frequency
  double outage_hours_per_year = 0.0; // annual unavailability U
  std::size_t customers = 0;

  void validate() const {
    if (!(lambda_per_year > 0.0)) throw validation_error("LoadPointParams: lambda must be positive");
    if (!(outage_hours_per_year > 0.0)) {
      throw validation_error("LoadPointParams: outage hours must be positive");
    }
    if (customers == 0) throw validation_error("LoadPointParams: customers must be positive");
  }

  double mean_repair_hours() const { return outage_hours_per_year / lambda_per_year; }
  double lambda_per_hour() const { return lambda_per_year / kHoursPerYear; }
  double mu_per_hour() const { return 1.0 / mean_repair_hours(); }
};

// Time to failure from a uniform draw r in (0, 1]: -ln(r)/lambda, hours.
inline double draw_ttf(double r, double lambda_per_hour) {
  if (!(r > 0.0) || r > 1.0) throw validation_error("draw_ttf: r must lie in (0, 1]");
  if (!(lambda_per_hour > 0.0)) throw validation_error("draw_ttf: lambda must be positive");
  return -std::log(r) / lambda_per_hour;
}

inline double draw_ttr(double r, double mu_per_hour) {
  if (!(r > 0.0) || r > 1.0) throw validation_error("draw_ttr: r must lie in (0, 1]");
  if (!(mu_per_hour > 0.0)) throw validation_error("draw_ttr: mu must be positive");
  return -std::log(r) / mu_per_hour;
}

// One supply interruption in continuous time, clipped to the horizon.
struct OutageEvent {
  double begin_hours;
  double end_hours;
  double duration() const { return end_hours - begin_hours; }
};

// Alternating up/down renewal process sampled in continuous time. Draw order
// per failure is fixed (TTF uniform first, then TTR uniform) so histories are
// reproducible from the rng seed alone. Events never overlap and are clipped
// at the horizon; an interruption that begins before the horizon counts even
// if its repair completes after it.
inline std::vector<OutageEvent> draw_outage_events(const LoadPointParams& params,
                                                   double horizon_hours, SplitMix64& rng) {
  params.validate();
  if (!(horizon_hours > 0.0)) throw validation_error("draw_outage_events: horizon must be positive");
  const double lam = params.lambda_per_hour();
  const double mu = params.mu_per_hour();
  std::vector<OutageEvent> events;
  double t = 0.0;
  for (;;) {
    const double ttf = draw_ttf(rng.uniform_open(), lam);
    const double fail = t + ttf;
    if (fail >= horizon_hours) break;
    const double ttr = draw_ttr(rng.uniform_open(), mu);
    const double repaired = fail + ttr;
    const double end = std::min(repaired, horizon_hours);
    if (end > fail) events.push_back({fail, end});
    t = repaired;
    if (t >= horizon_hours) break;
  }
  return events;
}

// Supply history for one load point: the continuous interruption record plus
// the grid discretization parameters. s_lp() rasterizes with both endpoints
// snapped outward, so a timestep is down whenever any part of it overlaps an
// interruption; the grid never understates downtime.
struct OutageHistory {
  std::vector<OutageEvent> events;
  double horizon_hours = 0.0;
  double timestep_hours = 1.0;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround(horizon_hours / timestep_hours));
  }

  std::vector<std::uint8_t> s_lp() const {
    const std::size_t n = steps();
    std::vector<std::uint8_t> grid(n, 1);
    for (const auto& ev : events) {
      auto k0 = static_cast<long long>(std::floor(ev.begin_hours / timestep_hours));
      auto k1 = static_cast<long long>(std::ceil(ev.end_hours / timestep_hours));
      k0 = std::max<long long>(k0, 0);
      k1 = std::min<long long>(k1, static_cast<long long>(n));
      for (long long k = k0; k < k1; ++k) grid[static_cast<std::size_t>(k)] = 0;
    }
    return grid;
  }
};

inline OutageHistory synth_history(const LoadPointParams& params, double horizon_hours,
                                   double timestep_hours, SplitMix64& rng) {
  if (!(timestep_hours > 0.0)) throw validation_error("synth_history: timestep must be positive");
  const double steps = horizon_hours / timestep_hours;
  if (std::fabs(steps - std::llround(steps)) > 1e-9) {
    throw validation_error("synth_history: horizon must be a whole number of timesteps");
  }
  OutageHistory h;
  h.horizon_hours = horizon_hours;
  h.timestep_hours = timestep_hours;
  h.events = draw_outage_events(params, horizon_hours, rng);
  return h;
}

// Walks a sorted, disjoint event list forward and reports overlap with the
// query window [t0, t1). Amortized O(1) per step when queries advance.
class EventCursor {
 public:
  explicit EventCursor(const std::vector<OutageEvent>& events) : events_(&events) {}

  double overlap_hours(double t0, double t1) {
    const auto& ev = *events_;
    while (k_ < ev.size() && ev[k_].end_hours <= t0) ++k_;
    double o = 0.0;
    for (std::size_t j = k_; j < ev.size() && ev[j].begin_hours < t1; ++j) {
      o += std::min(t1, ev[j].end_hours) - std::max(t0, ev[j].begin_hours);
    }
    return o;
  }

 private:
  const std::vector<OutageEvent>* events_;
  std::size_t k_ = 0;
};

// Customer-weighted annual interruption frequency and duration seen at the
// load points (the utility's book view).
inline std::pair<double, double> perceived_indices(const std::vector<LoadPointParams>& points) {
  if (points.empty()) throw validation_error("perceived_indices: no load points");
  double num_f = 0.0, num_d = 0.0, denom = 0.0;
  for (const auto& lp : points) {
    lp.validate();
    num_f += lp.lambda_per_year * lp.customers;
    num_d += lp.outage_hours_per_year * lp.customers;
    denom += lp.customers;
  }
  return {num_f / denom, num_d / denom};
}

}  // namespace gridrel
