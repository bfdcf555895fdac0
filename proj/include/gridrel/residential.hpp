#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/loadpoint.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/timeseries.hpp"

namespace gridrel {

// Two-state exponential failure/repair model for a DER component.
struct ComponentParams {
  double lambda_per_year = 0.0;  // zero disables failures entirely
  double mttr_hours = 0.0;

  void validate() const {
    if (lambda_per_year < 0.0) throw validation_error("ComponentParams: lambda must be >= 0");
    if (lambda_per_year > 0.0 && !(mttr_hours > 0.0)) {
      throw validation_error("ComponentParams: mttr must be positive when lambda > 0");
    }
  }
};

struct ResidenceSpec {
  double peak_load_kw = 4.0;
  double x = 0.0;  // PV capacity, kW per kW of peak load
  double y = 0.0;  // storage energy, kWh per kW of peak load
  double derating = 0.8;
  double eta_charge = 0.95;
  double eta_discharge = 0.95;
  double soc_min = 0.0;
  double soc_max = 1.0;
  double soc_init = 0.5;
  // Converter limits as a fraction of storage capacity per hour (C-rate).
  double charge_c_per_hour = 0.5;
  double discharge_c_per_hour = 0.5;
  ComponentParams pv_comp{0.10, 168.0};
  ComponentParams es_comp{0.05, 168.0};

  double pv_cap_kw() const { return x * peak_load_kw; }
  double es_cap_kwh() const { return y * peak_load_kw; }

  void validate() const {
    if (!(peak_load_kw > 0.0)) throw validation_error("ResidenceSpec: peak load must be positive");
    if (x < 0.0 || y < 0.0) throw validation_error("ResidenceSpec: x and y must be >= 0");
    if (!(derating > 0.0) || derating > 1.0) {
      throw validation_error("ResidenceSpec: derating must lie in (0, 1]");
    }
    if (!(eta_charge > 0.0) || eta_charge > 1.0 || !(eta_discharge > 0.0) || eta_discharge > 1.0) {
      throw validation_error("ResidenceSpec: efficiencies must lie in (0, 1]");
    }
    if (soc_min < 0.0 || soc_max > 1.0 || !(soc_max > soc_min)) {
      throw validation_error("ResidenceSpec: need 0 <= soc_min < soc_max <= 1");
    }
    if (soc_init < soc_min || soc_init > soc_max) {
      throw validation_error("ResidenceSpec: soc_init must lie in [soc_min, soc_max]");
    }
    if (!(charge_c_per_hour > 0.0) || !(discharge_c_per_hour > 0.0)) {
      throw validation_error("ResidenceSpec: converter C-rates must be positive");
    }
    pv_comp.validate();
    es_comp.validate();
  }
};

// AC output of the array: nameplate capacity times a flat derating factor
// times irradiance in per-unit of standard test conditions; zero while the
// component is failed.
inline double pv_output_kw(double pv_cap_kw, double derating, double ghi_pu,
                           bool pv_available = true) {
  if (pv_cap_kw < 0.0) throw validation_error("pv_output_kw: capacity must be >= 0");
  if (!(derating > 0.0) || derating > 1.0) {
    throw validation_error("pv_output_kw: derating must lie in (0, 1]");
  }
  if (ghi_pu < 0.0) throw validation_error("pv_output_kw: irradiance must be >= 0");
  return pv_available ? pv_cap_kw * derating * ghi_pu : 0.0;
}

// SOC transition for one step. charge_kwh is energy drawn at the AC terminals
// (stored amount is eta_charge * charge), discharge_kwh is energy delivered
// (drawn amount is discharge / eta_discharge). Exactly one of the two may be
// nonzero, and the result must stay inside [soc_min, soc_max].
inline double es_step_soc(double soc, double charge_kwh, double discharge_kwh,
                          const ResidenceSpec& spec) {
  if (charge_kwh < 0.0 || discharge_kwh < 0.0) {
    throw validation_error("es_step_soc: energies must be >= 0");
  }
  if (charge_kwh > 0.0 && discharge_kwh > 0.0) {
    throw validation_error("es_step_soc: simultaneous charge and discharge");
  }
  const double cap = spec.es_cap_kwh();
  if (!(cap > 0.0)) throw validation_error("es_step_soc: no storage capacity");
  double next = soc + (spec.eta_charge * charge_kwh - discharge_kwh / spec.eta_discharge) / cap;
  constexpr double slack = 1e-9;
  if (next < spec.soc_min - slack || next > spec.soc_max + slack) {
    throw validation_error("es_step_soc: step leaves [soc_min, soc_max]");
  }
  return std::fmin(std::fmax(next, spec.soc_min), spec.soc_max);
}

// Energy bookkeeping for one dispatch step. All *_kwh fields are energies over
// the step; the two balances hold to rounding:
//   pv_to_load + pv_to_storage + pv_curtailed = pv_kw * dt
//   pv_to_load + es_to_load + grid_import + unserved = load_kw * dt
struct DispatchResult {
  double net_load_kw = 0.0;  // load minus PV corrected for storage flows
  double soc = 0.0;
  bool supplied = false;     // local generation and storage cover the load
  double pv_to_load_kwh = 0.0;
  double pv_to_storage_kwh = 0.0;
  double pv_curtailed_kwh = 0.0;
  double es_to_load_kwh = 0.0;
  double grid_import_kwh = 0.0;
  double unserved_kwh = 0.0;
};

// Self-consumption dispatch for one step: PV serves load first, surplus PV
// charges storage (curtailing what cannot be absorbed), any remaining deficit
// discharges storage, and the rest is imported. The same policy runs whether
// the grid is up or down; during an interruption the import lane is simply
// unavailable, so the residual deficit goes unserved for the fraction of the
// step the supply is actually down.
inline DispatchResult dispatch_step(double load_kw, double pv_kw, double soc, bool es_available,
                                    double grid_down_fraction, const ResidenceSpec& spec,
                                    double dt_hours) {
  if (load_kw < 0.0 || pv_kw < 0.0) throw validation_error("dispatch_step: negative power");
  if (!(dt_hours > 0.0)) throw validation_error("dispatch_step: dt must be positive");
  if (grid_down_fraction < 0.0 || grid_down_fraction > 1.0) {
    throw validation_error("dispatch_step: down fraction must lie in [0, 1]");
  }

  const double load_kwh = load_kw * dt_hours;
  const double pv_kwh = pv_kw * dt_hours;
  DispatchResult r;
  r.pv_to_load_kwh = std::fmin(pv_kwh, load_kwh);
  double surplus = pv_kwh - r.pv_to_load_kwh;
  double deficit = load_kwh - r.pv_to_load_kwh;

  const double cap = spec.es_cap_kwh();
  double charge = 0.0, discharge = 0.0;
  if (cap > 0.0 && es_available) {
    if (surplus > 0.0) {
      const double headroom = (spec.soc_max - soc) * cap / spec.eta_charge;
      charge = std::fmin(surplus, std::fmin(spec.charge_c_per_hour * cap * dt_hours, headroom));
    } else if (deficit > 0.0) {
      const double stored = (soc - spec.soc_min) * cap * spec.eta_discharge;
      discharge =
          std::fmin(deficit, std::fmin(spec.discharge_c_per_hour * cap * dt_hours, stored));
    }
    r.soc = (charge > 0.0 || discharge > 0.0) ? es_step_soc(soc, charge, discharge, spec) : soc;
  } else {
    r.soc = soc;  // an unavailable or absent battery holds its state
  }

  r.pv_to_storage_kwh = charge;
  r.pv_curtailed_kwh = surplus - charge;
  r.es_to_load_kwh = discharge;
  deficit -= discharge;
  if (deficit < 1e-12) deficit = 0.0;

  r.net_load_kw = (load_kwh - pv_kwh + charge - discharge) / dt_hours;
  r.supplied = deficit == 0.0;
  r.unserved_kwh = deficit * grid_down_fraction;
  r.grid_import_kwh = deficit - r.unserved_kwh;
  return r;
}

inline std::vector<OutageEvent> draw_component_events(const ComponentParams& comp,
                                                      double horizon_hours, SplitMix64& rng) {
  comp.validate();
  if (comp.lambda_per_year == 0.0) return {};
  LoadPointParams as_lp{comp.lambda_per_year, comp.lambda_per_year * comp.mttr_hours, 1};
  return draw_outage_events(as_lp, horizon_hours, rng);
}

// Availability series on the timestep grid, 1 = available. Snapping matches
// the supply grid: any overlap with a failure marks the step unavailable.
inline std::vector<std::uint8_t> component_history(const ComponentParams& comp,
                                                   double horizon_hours, double timestep_hours,
                                                   SplitMix64& rng) {
  OutageHistory h;
  h.horizon_hours = horizon_hours;
  h.timestep_hours = timestep_hours;
  h.events = draw_component_events(comp, horizon_hours, rng);
  return h.s_lp();
}

// Counts supplied -> interrupted transitions within a binary residence state
// series: indices t >= 1 with s_r(t-1) = 1 and s_r(t) = 0. A series that
// starts at 0 contributes no event at t = 0.
inline long long detect_interruptions(const std::vector<std::uint8_t>& s_r) {
  if (s_r.empty()) throw validation_error("detect_interruptions: empty series");
  long long events = 0;
  for (std::size_t t = 1; t < s_r.size(); ++t) {
    if (s_r[t - 1] == 1 && s_r[t] == 0) ++events;
  }
  return events;
}

struct ResidenceMetrics {
  double aif = 0.0;        // interruptions per year
  double aid_hours = 0.0;  // interrupted hours per year
  double aens_kwh = 0.0;   // unserved energy per year
  long long events = 0;
  double horizon_years = 0.0;
};

// Simulates one residence against a supply history. Component failure
// processes are drawn from comp_rng (PV first, then storage; order is part of
// the determinism contract). Per step: the supply state s_lp comes from the
// outward-snapped outage overlap, the local balance state s_n from dispatch,
// and the residence state is s_r = s_lp OR s_n. An interruption is a 1 -> 0
// transition of s_r. Interrupted time within a failed step is the continuous
// down-overlap of that step, not the whole step, so durations carry no
// snapping bias; unserved energy uses the same weighting.
inline ResidenceMetrics simulate_residence(const ResidenceSpec& spec, const ProfilePair& profiles,
                                           const OutageHistory& supply, SplitMix64& comp_rng) {
  spec.validate();
  profiles.load_shape.validate();
  profiles.ghi_shape.validate();
  const double dt = supply.timestep_hours;
  if (std::fabs(profiles.load_shape.timestep_hours - dt) > 1e-12 ||
      std::fabs(profiles.ghi_shape.timestep_hours - dt) > 1e-12) {
    throw validation_error("simulate_residence: profile timestep differs from supply grid");
  }
  if (std::fabs(profiles.load_shape.span_hours() - kHoursPerYear) > 1e-6 ||
      std::fabs(profiles.ghi_shape.span_hours() - kHoursPerYear) > 1e-6) {
    throw validation_error("simulate_residence: profiles must span one year");
  }
  const double years = supply.horizon_hours / kHoursPerYear;
  if (!(years > 0.0) || std::fabs(years - std::llround(years)) > 1e-9) {
    throw validation_error("simulate_residence: horizon must be a whole number of years");
  }

  const auto pv_events = draw_component_events(spec.pv_comp, supply.horizon_hours, comp_rng);
  const auto es_events = draw_component_events(spec.es_comp, supply.horizon_hours, comp_rng);
  EventCursor lp_cur(supply.events), pv_cur(pv_events), es_cur(es_events);

  const std::size_t n = supply.steps();
  const std::size_t year_steps = profiles.load_shape.values.size();
  const double pv_cap = spec.pv_cap_kw();
  const bool has_pv = pv_cap > 0.0;

  ResidenceMetrics m;
  m.horizon_years = years;
  double down_hours = 0.0, unserved_kwh = 0.0;
  double soc = spec.soc_init;
  bool prev_sr = true;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double t1 = t0 + dt;
    const double down = lp_cur.overlap_hours(t0, t1);
    const bool pv_ok = !has_pv || pv_cur.overlap_hours(t0, t1) == 0.0;
    const bool es_ok = es_cur.overlap_hours(t0, t1) == 0.0;

    const double load_kw = spec.peak_load_kw * profiles.load_shape.values[idx];
    const double pv_kw =
        (has_pv && pv_ok) ? pv_cap * spec.derating * profiles.ghi_shape.values[idx] : 0.0;
    const auto step = dispatch_step(load_kw, pv_kw, soc, es_ok, down / dt, spec, dt);
    soc = step.soc;

    const bool s_lp = down == 0.0;
    const bool s_r = s_lp || step.supplied;
    if (k > 0 && prev_sr && !s_r) ++m.events;
    if (!s_r) {
      down_hours += down;
      unserved_kwh += step.unserved_kwh;
    }
    prev_sr = s_r;
    if (++idx == year_steps) idx = 0;
  }

  m.aif = static_cast<double>(m.events) / years;
  m.aid_hours = down_hours / years;
  m.aens_kwh = unserved_kwh / years;
  return m;
}

}  // namespace gridrel
