#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gridrel/distributions.hpp"
#include "gridrel/errors.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/stats.hpp"

namespace gridrel {

constexpr double kPvRatioMax = 3.5;   // PV kW per kW of peak load
constexpr double kEsRatioMax = 6.75;  // storage kWh per kW of peak load

inline MarginalSpec pv_marginal(MarginalKind kind, double hi = kPvRatioMax) {
  return {kind, 0.0, hi, 0.5};
}

inline MarginalSpec es_marginal(MarginalKind kind, double hi = kEsRatioMax) {
  return {kind, 0.0, hi, 1.0};
}

// Rank-correlation target per (PV kind, storage kind) pair. Row = PV kind,
// column = storage kind, both in L, V, MF, HC order.
inline double spearman_target(MarginalKind pv_kind, MarginalKind es_kind) {
  static constexpr double table[4][4] = {
      {0.7, 0.2, 0.4, -0.2},
      {0.2, 0.4, 0.3, 0.1},
      {0.3, 0.4, 0.5, 0.3},
      {0.2, 0.2, 0.3, 0.8},
  };
  return table[kind_index(pv_kind)][kind_index(es_kind)];
}

// Gaussian-copula parameter whose induced Spearman correlation equals the
// requested rank target: rho_g = 2 sin(pi rho_s / 6).
inline double copula_param(double rho_target) {
  if (!(std::fabs(rho_target) < 1.0)) {
    throw validation_error("copula_param: |rho| must be < 1");
  }
  return 2.0 * std::sin(3.14159265358979324 * rho_target / 6.0);
}

struct AdoptionScenario {
  MarginalKind pv_kind;
  MarginalKind es_kind;
  double rho_target;
  MarginalSpec pv;
  MarginalSpec es;
  double zero_threshold = 0.0;  // draws below it are zeroed (sensitivity hook)

  double rho_gauss() const { return copula_param(rho_target); }
};

inline AdoptionScenario make_scenario(MarginalKind pv_kind, MarginalKind es_kind,
                                      double pv_hi = kPvRatioMax, double es_hi = kEsRatioMax,
                                      double zero_threshold = 0.0) {
  return {pv_kind,
          es_kind,
          spearman_target(pv_kind, es_kind),
          pv_marginal(pv_kind, pv_hi),
          es_marginal(es_kind, es_hi),
          zero_threshold};
}

namespace detail {

// Quantile arguments clamped to the open unit interval so boundary uniforms
// from a 53-bit generator cannot trip the strict-domain contract.
inline double clamp_u(double u) {
  constexpr double eps = 0x1.0p-53;
  return std::fmin(std::fmax(u, eps), 1.0 - eps);
}

}  // namespace detail

// Maps two independent uniforms through the Gaussian copula to one (x, y)
// adoption pair: u drives the PV coordinate, w the conditional storage
// coordinate given it.
inline std::pair<double, double> sample_pair(const AdoptionScenario& sc, double u, double w) {
  const double rho = sc.rho_gauss();
  const double z1 = normal_quantile(detail::clamp_u(u));
  const double zw = normal_quantile(detail::clamp_u(w));
  const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * zw;
  double x = marginal_quantile(sc.pv, detail::clamp_u(u));
  double y = marginal_quantile(sc.es, detail::clamp_u(normal_cdf(z2)));
  if (x < sc.zero_threshold) x = 0.0;
  if (y < sc.zero_threshold) y = 0.0;
  return {x, y};
}

inline std::vector<std::pair<double, double>> sample_joint(const AdoptionScenario& sc,
                                                           std::size_t n, SplitMix64& rng) {
  if (n < 1) throw validation_error("sample_joint: n must be >= 1");
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    const double w = rng.uniform01();
    out.push_back(sample_pair(sc, u, w));
  }
  return out;
}

// Peak-weighted macroscopic penetration ratios: installed PV capacity and
// storage energy per unit of aggregate peak demand.
inline std::pair<double, double> macro_penetration(
    const std::vector<std::pair<double, double>>& samples, const std::vector<double>& peaks_kw) {
  if (samples.empty()) throw validation_error("macro_penetration: empty sample list");
  if (samples.size() != peaks_kw.size()) {
    throw validation_error("macro_penetration: samples and peaks differ in length");
  }
  double pv = 0.0, es = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(peaks_kw[i] > 0.0)) throw validation_error("macro_penetration: peaks must be positive");
    pv += samples[i].first * peaks_kw[i];
    es += samples[i].second * peaks_kw[i];
    peak += peaks_kw[i];
  }
  return {pv / peak, es / peak};
}

inline std::pair<double, double> macro_penetration(
    const std::vector<std::pair<double, double>>& samples) {
  return macro_penetration(samples, std::vector<double>(samples.size(), 1.0));
}

}  // namespace gridrel
