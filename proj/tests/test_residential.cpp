#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/residential.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/timeseries.hpp"

using namespace gridrel;

namespace {

ResidenceSpec make_spec(double x, double y) {
  ResidenceSpec r;
  r.peak_load_kw = 4.0;
  r.x = x;
  r.y = y;
  return r;
}

}  // namespace

TEST_CASE("pv output scales capacity by derating and irradiance") {
  REQUIRE(pv_output_kw(5.0, 0.8, 0.5) == Catch::Approx(2.0).epsilon(1e-14));
  REQUIRE(pv_output_kw(5.0, 0.8, 0.0) == 0.0);
  REQUIRE(pv_output_kw(0.0, 0.8, 1.0) == 0.0);
  REQUIRE(pv_output_kw(5.0, 0.8, 0.5, false) == 0.0);  // failed array produces nothing
  REQUIRE_THROWS_AS(pv_output_kw(-1.0, 0.8, 0.5), validation_error);
  REQUIRE_THROWS_AS(pv_output_kw(1.0, 0.0, 0.5), validation_error);
  REQUIRE_THROWS_AS(pv_output_kw(1.0, 1.1, 0.5), validation_error);
  REQUIRE_THROWS_AS(pv_output_kw(1.0, 0.8, -0.1), validation_error);
}

TEST_CASE("storage state transitions apply efficiencies on both paths") {
  ResidenceSpec spec = make_spec(0.0, 13.5 / 4.0);  // 13.5 kWh capacity
  REQUIRE(spec.es_cap_kwh() == Catch::Approx(13.5));

  // Charging 1 kWh at 95% efficiency stores 0.95 kWh: 0.5 + 0.95/13.5.
  REQUIRE(es_step_soc(0.5, 1.0, 0.0, spec) == Catch::Approx(0.5703703703703704).epsilon(1e-12));
  // Discharging 1 kWh draws 1/0.95 kWh from storage: 0.5 - (1/0.95)/13.5.
  REQUIRE(es_step_soc(0.5, 0.0, 1.0, spec) == Catch::Approx(0.42202729044834307).epsilon(1e-12));
  // No flow, no movement.
  REQUIRE(es_step_soc(0.37, 0.0, 0.0, spec) == 0.37);

  REQUIRE_THROWS_AS(es_step_soc(0.5, 1.0, 1.0, spec), validation_error);
  REQUIRE_THROWS_AS(es_step_soc(0.5, -1.0, 0.0, spec), validation_error);
  // Overcharge and overdraw violate the SOC window.
  REQUIRE_THROWS_AS(es_step_soc(0.99, 1.0, 0.0, spec), validation_error);
  REQUIRE_THROWS_AS(es_step_soc(0.01, 0.0, 1.0, spec), validation_error);
  // No capacity at all.
  REQUIRE_THROWS_AS(es_step_soc(0.5, 1.0, 0.0, make_spec(0.0, 0.0)), validation_error);
}

TEST_CASE("dispatch serves load from pv first") {
  const ResidenceSpec spec = make_spec(1.0, 1.0);  // 4 kW PV, 4 kWh storage
  // PV 3 kW, load 2 kW: load fully served, surplus charges storage.
  const auto r = dispatch_step(2.0, 3.0, 0.5, true, 0.0, spec, 1.0);
  REQUIRE(r.pv_to_load_kwh == Catch::Approx(2.0));
  REQUIRE(r.pv_to_storage_kwh == Catch::Approx(1.0));
  REQUIRE(r.pv_curtailed_kwh == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(r.es_to_load_kwh == 0.0);
  REQUIRE(r.grid_import_kwh == 0.0);
  REQUIRE(r.unserved_kwh == 0.0);
  REQUIRE(r.supplied);
  REQUIRE(r.soc == Catch::Approx(0.5 + 0.95 * 1.0 / 4.0));
  REQUIRE(r.net_load_kw == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("dispatch respects the charge rate limit and headroom") {
  ResidenceSpec spec = make_spec(2.0, 1.0);  // 8 kW PV, 4 kWh storage, 2 kWh/h charge cap
  // Surplus 6 kWh, C-rate allows 2 kWh, headroom allows (1-0.5)*4/0.95.
  const auto r = dispatch_step(1.0, 7.0, 0.5, true, 0.0, spec, 1.0);
  REQUIRE(r.pv_to_storage_kwh == Catch::Approx(2.0));
  REQUIRE(r.pv_curtailed_kwh == Catch::Approx(4.0));
  REQUIRE(r.soc == Catch::Approx(0.5 + 0.95 * 2.0 / 4.0));

  // Near-full storage: headroom binds instead of the C-rate.
  const auto h = dispatch_step(1.0, 7.0, 0.9, true, 0.0, spec, 1.0);
  const double headroom_kwh = (1.0 - 0.9) * 4.0 / 0.95;
  REQUIRE(h.pv_to_storage_kwh == Catch::Approx(headroom_kwh));
  REQUIRE(h.soc == Catch::Approx(1.0));
}

TEST_CASE("dispatch discharges storage for the remaining deficit") {
  const ResidenceSpec spec = make_spec(0.0, 1.0);  // no PV, 4 kWh storage
  // Load 1 kW for an hour, grid up: storage covers it, nothing imported.
  const auto r = dispatch_step(1.0, 0.0, 0.5, true, 0.0, spec, 1.0);
  REQUIRE(r.es_to_load_kwh == Catch::Approx(1.0));
  REQUIRE(r.grid_import_kwh == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(r.supplied);
  REQUIRE(r.soc == Catch::Approx(0.5 - 1.0 / 0.95 / 4.0));

  // Empty storage: the whole load imports from the grid.
  const auto e = dispatch_step(1.0, 0.0, 0.0, true, 0.0, spec, 1.0);
  REQUIRE(e.es_to_load_kwh == 0.0);
  REQUIRE(e.grid_import_kwh == Catch::Approx(1.0));
  REQUIRE_FALSE(e.supplied);

  // Discharge rate limit: 2 kWh/h cap against a 3 kW load.
  const auto c = dispatch_step(3.0, 0.0, 1.0, true, 0.0, spec, 1.0);
  REQUIRE(c.es_to_load_kwh == Catch::Approx(2.0));
  REQUIRE(c.grid_import_kwh == Catch::Approx(1.0));
  REQUIRE_FALSE(c.supplied);
}

TEST_CASE("an unavailable battery holds its state and moves no energy") {
  const ResidenceSpec spec = make_spec(0.0, 1.0);
  const auto r = dispatch_step(1.0, 0.0, 0.62, false, 0.0, spec, 1.0);
  REQUIRE(r.es_to_load_kwh == 0.0);
  REQUIRE(r.soc == 0.62);
  REQUIRE(r.grid_import_kwh == Catch::Approx(1.0));

  const auto s = dispatch_step(0.0, 3.0, 0.62, false, 0.0, spec, 1.0);
  REQUIRE(s.pv_to_storage_kwh == 0.0);
  REQUIRE(s.soc == 0.62);
  REQUIRE(s.pv_curtailed_kwh == Catch::Approx(3.0));
}

TEST_CASE("the grid-down fraction splits the deficit into unserved energy") {
  const ResidenceSpec spec = make_spec(0.0, 0.0);
  // Fully down step: the whole residual deficit is unserved.
  const auto d = dispatch_step(2.0, 0.0, 0.0, false, 1.0, spec, 1.0);
  REQUIRE(d.unserved_kwh == Catch::Approx(2.0));
  REQUIRE(d.grid_import_kwh == Catch::Approx(0.0).margin(1e-12));
  // Quarter-down step: unserved energy weights by the down overlap.
  const auto q = dispatch_step(2.0, 0.0, 0.0, false, 0.25, spec, 1.0);
  REQUIRE(q.unserved_kwh == Catch::Approx(0.5));
  REQUIRE(q.grid_import_kwh == Catch::Approx(1.5));
}

TEST_CASE("dispatch rejects invalid inputs") {
  const ResidenceSpec spec = make_spec(1.0, 1.0);
  REQUIRE_THROWS_AS(dispatch_step(-1.0, 0.0, 0.5, true, 0.0, spec, 1.0), validation_error);
  REQUIRE_THROWS_AS(dispatch_step(0.0, -1.0, 0.5, true, 0.0, spec, 1.0), validation_error);
  REQUIRE_THROWS_AS(dispatch_step(1.0, 0.0, 0.5, true, -0.1, spec, 1.0), validation_error);
  REQUIRE_THROWS_AS(dispatch_step(1.0, 0.0, 0.5, true, 1.1, spec, 1.0), validation_error);
  REQUIRE_THROWS_AS(dispatch_step(1.0, 0.0, 0.5, true, 0.0, spec, 0.0), validation_error);
}

TEST_CASE("randomized dispatch steps conserve energy and respect bounds") {
  // Property sweep over random operating points, including zero-capacity and
  // failed-battery corners. Both energy balances must close to rounding.
  SplitMix64 rng(31415);
  ResidenceSpec spec = make_spec(0.0, 0.0);
  for (int i = 0; i < 20000; ++i) {
    spec.x = rng.uniform01() < 0.1 ? 0.0 : 3.5 * rng.uniform01();
    spec.y = rng.uniform01() < 0.1 ? 0.0 : 6.75 * rng.uniform01();
    const double load = 4.0 * rng.uniform01();
    const double pv = spec.pv_cap_kw() * 0.8 * rng.uniform01();
    const double soc = rng.uniform01();
    const bool es_ok = rng.uniform01() < 0.8;
    const double down = rng.uniform01() < 0.5 ? 0.0 : rng.uniform01();
    const double dt = 1.0;

    const auto r = dispatch_step(load, pv, soc, es_ok, down, spec, dt);

    // Production balance and consumption balance.
    REQUIRE(r.pv_to_load_kwh + r.pv_to_storage_kwh + r.pv_curtailed_kwh ==
            Catch::Approx(pv * dt).margin(1e-9));
    REQUIRE(r.pv_to_load_kwh + r.es_to_load_kwh + r.grid_import_kwh + r.unserved_kwh ==
            Catch::Approx(load * dt).margin(1e-9));

    // Flows are non-negative and the state stays inside its window.
    REQUIRE(r.pv_to_load_kwh >= 0.0);
    REQUIRE(r.pv_to_storage_kwh >= 0.0);
    REQUIRE(r.pv_curtailed_kwh >= -1e-12);
    REQUIRE(r.es_to_load_kwh >= 0.0);
    REQUIRE(r.grid_import_kwh >= -1e-12);
    REQUIRE(r.unserved_kwh >= -1e-12);
    REQUIRE(r.soc >= spec.soc_min - 1e-12);
    REQUIRE(r.soc <= spec.soc_max + 1e-12);

    // Stored-energy change matches the net flow through the converter.
    if (spec.es_cap_kwh() > 0.0) {
      const double dsoc = 0.95 * r.pv_to_storage_kwh / spec.es_cap_kwh() -
                          r.es_to_load_kwh / 0.95 / spec.es_cap_kwh();
      REQUIRE(r.soc - soc == Catch::Approx(dsoc).margin(1e-9));
    } else {
      REQUIRE(r.soc == soc);
    }
    if (!es_ok) {
      REQUIRE(r.soc == soc);
      REQUIRE(r.pv_to_storage_kwh == 0.0);
      REQUIRE(r.es_to_load_kwh == 0.0);
    }

    // The local-balance flag is exactly "no residual deficit".
    const double residual = load * dt - r.pv_to_load_kwh - r.es_to_load_kwh;
    REQUIRE(r.supplied == (residual < 1e-12));
  }
}

TEST_CASE("interruption counting finds supplied-to-interrupted transitions") {
  REQUIRE(detect_interruptions({1, 1, 0, 1, 0, 0, 1}) == 2);
  REQUIRE(detect_interruptions({1, 1, 1}) == 0);
  REQUIRE(detect_interruptions({0, 0, 0}) == 0);
  REQUIRE(detect_interruptions({0, 1, 0, 1, 0}) == 2);
  REQUIRE(detect_interruptions({1}) == 0);
  REQUIRE(detect_interruptions({1, 0}) == 1);
  REQUIRE_THROWS_AS(detect_interruptions({}), validation_error);
}

TEST_CASE("component histories follow the two-state availability model") {
  const ComponentParams comp{0.10, 168.0};
  SplitMix64 rng(8);
  const double horizon = 20000.0 * kHoursPerYear;
  const auto s = component_history(comp, horizon, 1.0, rng);
  double up = 0.0;
  for (auto v : s) up += v;
  // Availability = MTTF / (MTTF + MTTR) = 87600 / (87600 + 168); the grid
  // overstates downtime by at most one step per edge.
  const double expect = 87600.0 / (87600.0 + 168.0);
  REQUIRE(up / static_cast<double>(s.size()) == Catch::Approx(expect).margin(0.001));

  ComponentParams off{0.0, 0.0};
  const auto t = component_history(off, 8760.0, 1.0, rng);
  REQUIRE(std::all_of(t.begin(), t.end(), [](std::uint8_t v) { return v == 1; }));
}

TEST_CASE("a residence with no local resources mirrors its supply history") {
  const auto profiles = synth_profiles(7);
  const LoadPointParams lp{0.30, 3.47, 1};
  SplitMix64 lp_rng(derive_seed(1000, stream::kLoadPoint, 0));
  const auto supply = synth_history(lp, 1000.0 * kHoursPerYear, 1.0, lp_rng);

  SplitMix64 comp_rng(derive_seed(1000, stream::kComponents, 0));
  const auto m = simulate_residence(make_spec(0.0, 0.0), profiles, supply, comp_rng);

  // Count events and downtime straight off the event list.
  REQUIRE(m.events == static_cast<long long>(supply.events.size()));
  double down = 0.0;
  for (const auto& e : supply.events) down += e.duration();
  REQUIRE(m.aid_hours == Catch::Approx(down / 1000.0).epsilon(1e-9));
  REQUIRE(m.horizon_years == Catch::Approx(1000.0));
  REQUIRE(m.aif == Catch::Approx(static_cast<double>(supply.events.size()) / 1000.0));
}

TEST_CASE("an always-up supply yields zero interruption metrics") {
  const auto profiles = synth_profiles(7);
  OutageHistory supply;
  supply.horizon_hours = 2.0 * kHoursPerYear;
  supply.timestep_hours = 1.0;

  ResidenceSpec spec = make_spec(1.0, 1.0);
  spec.pv_comp = {0.0, 0.0};  // disable component failures
  spec.es_comp = {0.0, 0.0};
  SplitMix64 comp_rng(4);
  const auto m = simulate_residence(spec, profiles, supply, comp_rng);
  REQUIRE(m.events == 0);
  REQUIRE(m.aif == 0.0);
  REQUIRE(m.aid_hours == 0.0);
  REQUIRE(m.aens_kwh == 0.0);
}

TEST_CASE("residence simulation validates grid compatibility") {
  const auto profiles = synth_profiles(7);
  const ResidenceSpec spec = make_spec(0.0, 0.0);
  SplitMix64 rng(5);

  OutageHistory bad_dt;
  bad_dt.horizon_hours = kHoursPerYear;
  bad_dt.timestep_hours = 0.5;  // profiles are hourly
  REQUIRE_THROWS_AS(simulate_residence(spec, profiles, bad_dt, rng), validation_error);

  OutageHistory partial;
  partial.horizon_hours = 0.5 * kHoursPerYear;  // not a whole year
  partial.timestep_hours = 1.0;
  REQUIRE_THROWS_AS(simulate_residence(spec, profiles, partial, rng), validation_error);

  auto short_profiles = profiles;
  short_profiles.load_shape.values.resize(100);  // no longer spans a year
  OutageHistory ok;
  ok.horizon_hours = kHoursPerYear;
  ok.timestep_hours = 1.0;
  REQUIRE_THROWS_AS(simulate_residence(spec, short_profiles, ok, rng), validation_error);
}

TEST_CASE("ample local resources let a residence ride through short outages") {
  // A large array plus battery with failures disabled covers every one of a
  // handful of short outages, driving the interruption count to zero. The
  // array matters: under self-consumption the battery serves the house load
  // whenever generation falls short, so only daily solar charging keeps it
  // full enough to bridge an outage.
  const auto profiles = synth_profiles(7);
  ResidenceSpec spec = make_spec(3.0, 6.75);  // 12 kW PV, 27 kWh storage
  spec.pv_comp = {0.0, 0.0};
  spec.es_comp = {0.0, 0.0};
  spec.soc_init = 1.0;

  OutageHistory supply;
  supply.horizon_hours = kHoursPerYear;
  supply.timestep_hours = 1.0;
  supply.events = {{100.0, 101.5}, {2000.25, 2001.0}, {5000.0, 5002.0}};

  SplitMix64 rng(6);
  const auto m = simulate_residence(spec, profiles, supply, rng);
  REQUIRE(m.events == 0);
  REQUIRE(m.aid_hours == 0.0);

  // The same outages interrupt the identical residence without storage.
  SplitMix64 rng2(6);
  const auto bare = simulate_residence(make_spec(0.0, 0.0), profiles, supply, rng2);
  REQUIRE(bare.events == 3);
}

TEST_CASE("local shortfalls during an outage can split one feeder event in two") {
  // Storage that covers the evening but dies overnight makes the residence
  // state oscillate inside a single long feeder outage, so the customer logs
  // more interruptions than the feeder does.
  const auto profiles = synth_profiles(7);
  ResidenceSpec spec = make_spec(0.0, 0.5);  // 2 kWh only
  spec.pv_comp = {0.0, 0.0};
  spec.es_comp = {0.0, 0.0};
  spec.soc_init = 1.0;

  OutageHistory supply;
  supply.horizon_hours = kHoursPerYear;
  supply.timestep_hours = 1.0;
  // One two-day outage.
  supply.events = {{1000.0, 1048.0}};

  SplitMix64 rng(6);
  const auto m = simulate_residence(spec, profiles, supply, rng);
  // With no PV the battery cannot recharge mid-outage, so its state is
  // non-increasing across the outage and exactly one transition happens.
  REQUIRE(m.events == 1);

  // With PV the battery refills each morning and the state can cycle.
  ResidenceSpec pv_spec = make_spec(2.0, 0.5);
  pv_spec.pv_comp = {0.0, 0.0};
  pv_spec.es_comp = {0.0, 0.0};
  pv_spec.soc_init = 1.0;
  SplitMix64 rng2(6);
  const auto cyc = simulate_residence(pv_spec, profiles, supply, rng2);
  REQUIRE(cyc.events >= 2);  // more end-user interruptions than feeder events
}

TEST_CASE("adding storage never worsens the interruption count on one supply") {
  const auto profiles = synth_profiles(7);
  const LoadPointParams lp{1.0, 8.0, 1};  // frequent short outages
  SplitMix64 lp_rng(77);
  const auto supply = synth_history(lp, 50.0 * kHoursPerYear, 1.0, lp_rng);

  double prev_aif = std::numeric_limits<double>::infinity();
  for (double y : {0.0, 1.0, 3.0, 6.0}) {
    ResidenceSpec spec = make_spec(0.0, y);
    spec.pv_comp = {0.0, 0.0};
    spec.es_comp = {0.0, 0.0};
    if (y > 0.0) {
      // Fix the converter limit in kWh/h (not per unit of capacity) so the
      // comparison isolates stored energy; an unbounded rate plus no PV makes
      // ride-through monotone in capacity.
      spec.charge_c_per_hour = 8.0 / spec.es_cap_kwh();
      spec.discharge_c_per_hour = 8.0 / spec.es_cap_kwh();
    }
    SplitMix64 rng(1);
    const auto m = simulate_residence(spec, profiles, supply, rng);
    // Without PV the battery never recharges mid-outage, so a bigger battery
    // can only extend ride-through: AIF is non-increasing in y.
    REQUIRE(m.aif <= prev_aif + 1e-12);
    prev_aif = m.aif;
  }
}

TEST_CASE("unserved energy accrues only while the residence is interrupted") {
  const auto profiles = synth_profiles(7);
  const ResidenceSpec spec = make_spec(0.0, 0.0);

  OutageHistory supply;
  supply.horizon_hours = kHoursPerYear;
  supply.timestep_hours = 1.0;
  supply.events = {{10.0, 12.0}};

  SplitMix64 rng(9);
  const auto m = simulate_residence(spec, profiles, supply, rng);
  const double expected = 4.0 * (profiles.load_shape.values[10] + profiles.load_shape.values[11]);
  REQUIRE(m.aens_kwh == Catch::Approx(expected).epsilon(1e-12));
  REQUIRE(m.aid_hours == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(m.events == 1);
}

TEST_CASE("sub-step outages charge only their continuous overlap as downtime") {
  const auto profiles = synth_profiles(7);
  const ResidenceSpec spec = make_spec(0.0, 0.0);

  OutageHistory supply;
  supply.horizon_hours = kHoursPerYear;
  supply.timestep_hours = 1.0;
  supply.events = {{20.25, 20.75}};  // half an hour inside step 20

  SplitMix64 rng(9);
  const auto m = simulate_residence(spec, profiles, supply, rng);
  REQUIRE(m.events == 1);
  REQUIRE(m.aid_hours == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(m.aens_kwh ==
          Catch::Approx(0.5 * 4.0 * profiles.load_shape.values[20]).epsilon(1e-12));
}
