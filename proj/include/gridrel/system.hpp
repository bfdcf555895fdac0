#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "gridrel/adoption.hpp"
#include "gridrel/errors.hpp"
#include "gridrel/indices.hpp"
#include "gridrel/loadpoint.hpp"
#include "gridrel/mcengine.hpp"
#include "gridrel/residential.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/timeseries.hpp"

namespace gridrel {

// Full study definition: the feeder-level system, the residence template
// every customer instantiates, and the sampling scale knobs.
struct SystemSpec {
  std::vector<LoadPointParams> load_points;
  ProfilePair profiles;
  ResidenceSpec residence_template;  // x and y are overwritten per customer
  std::size_t sample_customers = 200;  // simulated residences per MC sample
  double horizon_years = 10.0;
  double timestep_hours = 1.0;
  // When set, one outage history per load point per sample, shared by its
  // customers; otherwise each simulated customer draws an independent history
  // (identical marginal law, far lower per-sample variance across customers).
  bool shared_lp_history = true;
  CommercialBlock commercial;

  std::size_t residential_customers() const {
    std::size_t n = 0;
    for (const auto& lp : load_points) n += lp.customers;
    return n;
  }

  void validate() const {
    if (load_points.empty()) throw validation_error("system: needs at least one load point");
    for (const auto& lp : load_points) lp.validate();
    profiles.load_shape.validate();
    profiles.ghi_shape.validate();
    residence_template.validate();
    if (sample_customers < 1) throw validation_error("system: sample_customers must be >= 1");
    if (sample_customers > residential_customers()) {
      throw validation_error("system: sample_customers exceeds residential customer count");
    }
    if (!(horizon_years >= 1.0)) throw validation_error("system: horizon_years must be >= 1");
    if (!(timestep_hours > 0.0)) throw validation_error("system: timestep must be positive");
  }
};

// Even split with the remainder going to the lowest-index points.
inline std::vector<std::size_t> allocate_customers(std::size_t total, std::size_t n_points) {
  if (n_points == 0) throw validation_error("allocate_customers: n_points must be >= 1");
  std::vector<std::size_t> out(n_points, total / n_points);
  for (std::size_t i = 0; i < total % n_points; ++i) out[i] += 1;
  return out;
}

namespace detail {

// Simulated customer c stands in for real customer floor(c * total / m), so
// the subset weights load points proportionally to their allocations.
inline std::size_t customer_loadpoint(const SystemSpec& spec, std::size_t c) {
  const std::size_t total = spec.residential_customers();
  const std::size_t rep = c * total / spec.sample_customers;
  std::size_t cum = 0;
  for (std::size_t lp = 0; lp < spec.load_points.size(); ++lp) {
    cum += spec.load_points[lp].customers;
    if (rep < cum) return lp;
  }
  return spec.load_points.size() - 1;
}

inline double frac(double x) { return x - std::floor(x); }

}  // namespace detail

constexpr std::uint64_t scenario_tag(const AdoptionScenario& sc) noexcept {
  return static_cast<std::uint64_t>(kind_index(sc.pv_kind)) * 4u +
         static_cast<std::uint64_t>(kind_index(sc.es_kind));
}

struct ScenarioResult {
  AdoptionScenario scenario;
  AdaptiveResult stats;
};

// Adaptive estimation of experienced SAIFI/SAIDI for one adoption scenario.
//
// Randomness layout: the scenario seed is keyed by (master, scenario cell) so
// each cell is a self-contained study; outage and component histories are
// keyed by (master, batch, sample, customer) only, so all cells of a sweep
// see common histories and differ purely in adoption. Each batch shares one
// adoption cloud (v_c, w_c per customer); each sample rotates the cloud's PV
// coordinate by its stratified base uniform, which stratifies the macroscopic
// adoption level across the batch while keeping marginals exact.
inline ScenarioResult run_adaptive(const SystemSpec& system, const AdoptionScenario& scenario,
                                   const MCConfig& mc, std::size_t workers = 1) {
  system.validate();
  mc.validate();
  const std::uint64_t scen_master =
      derive_seed(mc.master_seed, stream::kScenario, scenario_tag(scenario));
  const std::size_t m = system.sample_customers;
  const double total_res = static_cast<double>(system.residential_customers());
  const double n_com = static_cast<double>(system.commercial.count);
  const double horizon_hours = system.horizon_years * kHoursPerYear;

  struct Cloud {
    std::vector<double> v, w;
  };
  Cloud cloud;
  cloud.v.resize(m);
  cloud.w.resize(m);

  BatchHook hook = [&](std::size_t batch) {
    SplitMix64 rng(derive_seed(scen_master, stream::kBatchCloud, batch));
    for (std::size_t c = 0; c < m; ++c) {
      cloud.v[c] = rng.uniform01();
      cloud.w[c] = rng.uniform01();
    }
  };

  SampleEvaluator evaluate = [&](const SampleContext& ctx) -> SampleMetrics {
    // Shared mode: one history per load point, drawn up front in LP order.
    std::vector<OutageHistory> lp_hist;
    if (system.shared_lp_history) {
      lp_hist.reserve(system.load_points.size());
      for (std::size_t lp = 0; lp < system.load_points.size(); ++lp) {
        SplitMix64 rng(derive_seed(ctx.sample_key, stream::kLoadPoint, lp));
        lp_hist.push_back(synth_history(system.load_points[lp], horizon_hours,
                                        system.timestep_hours, rng));
      }
    }

    SampleMetrics out;
    out.customer_aif.reserve(m);
    double aif_sum = 0.0, aid_sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const std::uint64_t customer_seed = derive_seed(ctx.sample_key, stream::kCustomer, c);
      const std::size_t lp = detail::customer_loadpoint(system, c);

      ResidenceSpec res = system.residence_template;
      const double u_x = detail::frac(cloud.v[c] + ctx.base_uniform);
      std::tie(res.x, res.y) = sample_pair(scenario, u_x, cloud.w[c]);

      const OutageHistory* supply = nullptr;
      OutageHistory own;
      if (system.shared_lp_history) {
        supply = &lp_hist[lp];
      } else {
        SplitMix64 rng(derive_seed(customer_seed, stream::kLoadPoint));
        own = synth_history(system.load_points[lp], horizon_hours, system.timestep_hours, rng);
        supply = &own;
      }

      SplitMix64 comp_rng(derive_seed(customer_seed, stream::kComponents));
      const ResidenceMetrics rm = simulate_residence(res, system.profiles, *supply, comp_rng);
      aif_sum += rm.aif;
      aid_sum += rm.aid_hours;
      out.customer_aif.push_back(rm.aif);
    }

    // Simulated residences stand in for all residential customers; commercial
    // customers contribute load-point values directly.
    const double res_f = aif_sum / static_cast<double>(m) * total_res;
    const double res_d = aid_sum / static_cast<double>(m) * total_res;
    const double com_f = n_com * system.commercial.lambda_per_year;
    const double com_d = n_com * system.commercial.outage_hours_per_year;
    out.saifi = (res_f + com_f) / (total_res + n_com);
    out.saidi = (res_d + com_d) / (total_res + n_com);
    return out;
  };

  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult result{scenario, run_adaptive_metrics(evaluate, mc, workers, hook)};
  result.stats.runtime_seconds = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gridrel
