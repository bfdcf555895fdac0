#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/loadpoint.hpp"
#include "gridrel/residential.hpp"

namespace gridrel {

// Commercial customers ride on the load-point statistics directly: their
// interruption frequency and duration equal the feeder values.
struct CommercialBlock {
  std::size_t count = 0;
  double lambda_per_year = 0.0;
  double outage_hours_per_year = 0.0;
};

struct SystemSample {
  std::vector<ResidenceMetrics> residences;
  CommercialBlock commercial;

  std::size_t total_customers() const { return residences.size() + commercial.count; }
};

// End-user indices: per-customer interruption outcomes averaged over every
// customer, simulated residences and pass-through commercial alike.
inline std::pair<double, double> experienced_indices(const SystemSample& sample) {
  const std::size_t n = sample.total_customers();
  if (n == 0) throw validation_error("experienced_indices: no customers in sample");
  double f = 0.0, d = 0.0;
  for (const auto& r : sample.residences) {
    f += r.aif;
    d += r.aid_hours;
  }
  f += static_cast<double>(sample.commercial.count) * sample.commercial.lambda_per_year;
  d += static_cast<double>(sample.commercial.count) * sample.commercial.outage_hours_per_year;
  return {f / static_cast<double>(n), d / static_cast<double>(n)};
}

struct AifHistogram {
  double bin_width = 0.01;                 // f/yr per bin
  std::map<std::size_t, std::size_t> counts;  // bin index -> observations
  std::size_t total = 0;

  void add(double aif) {
    if (!(aif >= 0.0) || !std::isfinite(aif)) {
      throw validation_error("AifHistogram: AIF must be finite and >= 0");
    }
    counts[static_cast<std::size_t>(std::floor(aif / bin_width))] += 1;
    total += 1;
  }

  void merge(const AifHistogram& other) {
    if (other.bin_width != bin_width) {
      throw validation_error("AifHistogram: cannot merge differing bin widths");
    }
    for (const auto& [bin, c] : other.counts) counts[bin] += c;
    total += other.total;
  }

  // Fraction of observations with AIF in [lo, hi), resolved to whole bins.
  double mass(double lo, double hi) const {
    if (total == 0) return 0.0;
    std::size_t in = 0;
    for (const auto& [bin, c] : counts) {
      const double left = static_cast<double>(bin) * bin_width;
      if (left >= lo && left < hi) in += c;
    }
    return static_cast<double>(in) / static_cast<double>(total);
  }
};

inline AifHistogram pool_aif(const std::vector<double>& values, double bin_width = 0.01) {
  if (!(bin_width > 0.0)) throw validation_error("pool_aif: bin_width must be > 0");
  AifHistogram h;
  h.bin_width = bin_width;
  for (double v : values) h.add(v);
  return h;
}

struct ExampleReport {
  double saifi_p, saidi_p;
  double saifi_e_case1, saidi_e_case1;
  double saifi_e_case2, saidi_e_case2;
};

// Two-feeder illustration of why feeder statistics and end-user experience
// diverge once some customers can ride through outages. Ten customers, five
// per load point; in Case 2 the listed customers (1-indexed) own storage
// sized to cover every outage, so their interruption counts drop to zero.
inline ExampleReport compare_example(const std::vector<std::size_t>& der_customers = {4, 5, 9,
                                                                                      10}) {
  const std::vector<LoadPointParams> lps = {
      {3.0, 5.0, 5},
      {2.0, 10.0, 5},
  };
  const auto [saifi_p, saidi_p] = perceived_indices(lps);

  auto experienced = [&](bool with_der) {
    SystemSample s;
    std::size_t id = 1;
    for (const auto& lp : lps) {
      for (std::size_t c = 0; c < lp.customers; ++c, ++id) {
        bool ideal = false;
        if (with_der) {
          for (std::size_t d : der_customers) {
            if (d == id) ideal = true;
          }
        }
        ResidenceMetrics m;
        m.aif = ideal ? 0.0 : lp.lambda_per_year;
        m.aid_hours = ideal ? 0.0 : lp.outage_hours_per_year;
        m.horizon_years = 1.0;
        s.residences.push_back(m);
      }
    }
    return experienced_indices(s);
  };

  const auto [f1, d1] = experienced(false);
  const auto [f2, d2] = experienced(true);
  return {saifi_p, saidi_p, f1, d1, f2, d2};
}

}  // namespace gridrel
