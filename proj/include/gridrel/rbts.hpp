#pragma once

#include <array>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "gridrel/adoption.hpp"
#include "gridrel/errors.hpp"
#include "gridrel/system.hpp"

namespace gridrel {

// Residential portion of RBTS Bus 4 with the industrial feeders removed:
// every remaining load point carries the same baseline failure statistics.
struct RbtsParams {
  std::size_t n_loadpoints = 22;
  std::size_t total_customers = 4700;
  double lambda_per_year = 0.30;         // f/yr at every load point
  double outage_hours_per_year = 3.47;   // h/yr at every load point
  std::size_t sample_customers = 200;
  double horizon_years = 10.0;
  double timestep_hours = 1.0;
  bool shared_lp_history = true;
  std::size_t commercial_customers = 0;
  ResidenceSpec residence;  // template; x and y are set per sampled customer
  ProfilePair profiles;
};

inline SystemSpec build_modified_rbts(const RbtsParams& p) {
  if (p.n_loadpoints < 1) throw validation_error("rbts: n_loadpoints must be >= 1");
  if (p.total_customers < p.n_loadpoints) {
    throw validation_error("rbts: need at least one customer per load point");
  }
  SystemSpec spec;
  const auto counts = allocate_customers(p.total_customers, p.n_loadpoints);
  spec.load_points.reserve(p.n_loadpoints);
  for (std::size_t i = 0; i < p.n_loadpoints; ++i) {
    spec.load_points.push_back({p.lambda_per_year, p.outage_hours_per_year, counts[i]});
  }
  spec.profiles = p.profiles;
  spec.residence_template = p.residence;
  spec.sample_customers = p.sample_customers;
  spec.horizon_years = p.horizon_years;
  spec.timestep_hours = p.timestep_hours;
  spec.shared_lp_history = p.shared_lp_history;
  spec.commercial = {p.commercial_customers, p.lambda_per_year, p.outage_hours_per_year};
  spec.validate();
  return spec;
}

struct SweepCell {
  bool ok = false;
  std::string error;
  ScenarioResult result;
};

// cells[pv][es], both axes in L, V, MF, HC order.
struct SweepResult {
  std::array<std::array<SweepCell, 4>, 4> cells;
};

constexpr std::array<MarginalKind, 4> kKindOrder = {
    MarginalKind::Limited, MarginalKind::Varied, MarginalKind::MedianFocused,
    MarginalKind::HighlyConcentrated};

// All 16 joint-adoption cells. A failing cell is recorded and skipped; the
// rest of the sweep still completes. Cells are seeded by scenario identity,
// so any subset run in any order reproduces the full sweep's values.
inline SweepResult run_sweep(const SystemSpec& spec, const MCConfig& mc, std::size_t workers = 1,
                             double zero_threshold = 0.0) {
  SweepResult sweep;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      SweepCell& cell = sweep.cells[i][j];
      try {
        const auto scenario = make_scenario(kKindOrder[i], kKindOrder[j], kPvRatioMax,
                                            kEsRatioMax, zero_threshold);
        cell.result = run_adaptive(spec, scenario, mc, workers);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }
  return sweep;
}

// Six-significant-digit float formatting shared by every text output.
inline std::string g6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

enum class SweepMetric { Saifi, Saidi };

// 4x4 CSV with kind-code header row and column. Failed cells print nan.
inline std::string matrix_csv(const SweepResult& sweep, SweepMetric metric) {
  std::string out = "pv\\es";
  for (auto k : kKindOrder) out += std::string(",") + kind_code(k);
  out += "\n";
  for (std::size_t i = 0; i < 4; ++i) {
    out += kind_code(kKindOrder[i]);
    for (std::size_t j = 0; j < 4; ++j) {
      const SweepCell& cell = sweep.cells[i][j];
      out += ",";
      if (!cell.ok) {
        out += "nan";
      } else {
        out += g6(metric == SweepMetric::Saifi ? cell.result.stats.saifi_mean
                                               : cell.result.stats.saidi_mean);
      }
    }
    out += "\n";
  }
  return out;
}

// Per-cell adaptive-stopping statistics, one row per cell.
inline std::string sweep_convergence_csv(const SweepResult& sweep) {
  std::string out = "pv,es,n_samples,converged,saifi_mean,saifi_half,saidi_mean,saidi_half\n";
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const SweepCell& cell = sweep.cells[i][j];
      out += std::string(kind_code(kKindOrder[i])) + "," + kind_code(kKindOrder[j]) + ",";
      if (!cell.ok) {
        out += "0,error,nan,nan,nan,nan\n";
        continue;
      }
      const auto& s = cell.result.stats;
      out += std::to_string(s.n_samples) + "," + (s.converged ? "true" : "false") + "," +
             g6(s.saifi_mean) + "," + g6(s.saifi_half) + "," + g6(s.saidi_mean) + "," +
             g6(s.saidi_half) + "\n";
    }
  }
  return out;
}

}  // namespace gridrel
