#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gridrel/errors.hpp"
#include "gridrel/indices.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/stats.hpp"

namespace gridrel {

// Streaming count/mean/M2 triple; variance is unbiased (n-1 denominator).
struct EstimatorState {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

inline EstimatorState welford_update(EstimatorState s, double value) {
  if (!std::isfinite(value)) throw validation_error("welford_update: value must be finite");
  s.n += 1;
  const double delta = value - s.mean;
  s.mean += delta / static_cast<double>(s.n);
  s.m2 += delta * (value - s.mean);
  return s;
}

inline EstimatorState welford_merge(const EstimatorState& a, const EstimatorState& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  EstimatorState out;
  out.n = a.n + b.n;
  const double delta = b.mean - a.mean;
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
  out.mean = a.mean + delta * nb / (na + nb);
  out.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
  return out;
}

inline double variance(const EstimatorState& s) {
  if (s.n < 2) throw validation_error("variance: needs at least 2 observations");
  return s.m2 / static_cast<double>(s.n - 1);
}

// Half-width of the two-sided normal-approximation CI at significance alpha.
inline double ci_half_width(const EstimatorState& s, double alpha) {
  if (s.n < 2) throw validation_error("ci_half_width: needs at least 2 observations");
  if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("ci_half_width: alpha in (0,1)");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  return z * std::sqrt(variance(s) / static_cast<double>(s.n));
}

struct MCConfig {
  double alpha = 0.05;
  std::size_t batch_size = 10;
  std::size_t min_samples = 10;
  std::size_t max_samples = 2000;
  double eps_saifi = 0.005;  // f/yr
  double eps_saidi = 0.1;    // h/yr
  std::uint64_t master_seed = 42;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("mc: alpha must be in (0,1)");
    if (batch_size < 1) throw validation_error("mc: batch_size must be >= 1");
    if (min_samples < batch_size) throw validation_error("mc: min_samples must be >= batch_size");
    if (max_samples < min_samples) throw validation_error("mc: max_samples must be >= min_samples");
    if (!(eps_saifi > 0.0) || !(eps_saidi > 0.0)) throw validation_error("mc: eps must be > 0");
  }
};

struct StopDecision {
  bool stop = false;
  bool converged = false;
};

// Stop once both half-widths are inside tolerance (and the information floor
// min_samples is met), or unconditionally at the sample cap.
inline StopDecision should_stop(const EstimatorState& saifi, const EstimatorState& saidi,
                                const MCConfig& cfg) {
  if (saifi.n != saidi.n) throw validation_error("should_stop: estimator counts differ");
  StopDecision d;
  if (saifi.n >= std::max<std::size_t>(cfg.min_samples, 2)) {
    d.converged = ci_half_width(saifi, cfg.alpha) <= cfg.eps_saifi &&
                  ci_half_width(saidi, cfg.alpha) <= cfg.eps_saidi;
  }
  d.stop = d.converged || saifi.n >= cfg.max_samples;
  return d;
}

// Pure hash of (master, batch, sample): the root seed for everything inside
// one Monte Carlo sample.
constexpr std::uint64_t sample_seed(std::uint64_t master, std::uint64_t batch_idx,
                                    std::uint64_t sample_idx) noexcept {
  return derive_seed(derive_seed(master, stream::kSample, batch_idx), sample_idx);
}

// One uniform per stratum [i/B, (i+1)/B), strata assigned to sample slots by a
// seeded shuffle so the low-discrepancy pattern is not index-correlated across
// batches. Draw order (shuffle first, then jitters) is part of the contract.
inline std::vector<double> stratified_uniforms(std::size_t batch_size, std::size_t batch_idx,
                                               std::uint64_t master) {
  if (batch_size < 1) throw validation_error("stratified_uniforms: batch_size must be >= 1");
  SplitMix64 rng(derive_seed(master, stream::kStrata, batch_idx));
  std::vector<std::size_t> perm(batch_size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = batch_size - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<double> out(batch_size);
  const double b = static_cast<double>(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    out[i] = (static_cast<double>(perm[i]) + rng.uniform01()) / b;
  }
  return out;
}

// Everything the engine hands a worker to evaluate one sample.
struct SampleContext {
  std::size_t batch_index;
  std::size_t index_in_batch;
  std::size_t sample_index;   // global, 0-based
  double base_uniform;        // stratified draw steering the sample's adoption cloud
  std::uint64_t sample_key;   // root seed for the sample's stochastic processes
};

struct SampleMetrics {
  double saifi = 0.0;
  double saidi = 0.0;
  std::vector<double> customer_aif;
};

struct BatchTraceRow {
  std::size_t n;
  double saifi_mean, saifi_half;
  double saidi_mean, saidi_half;
};

struct AdaptiveResult {
  std::size_t n_samples = 0;
  double saifi_mean = 0.0, saifi_half = 0.0;
  double saidi_mean = 0.0, saidi_half = 0.0;
  bool converged = false;
  AifHistogram aif_histogram;
  std::vector<BatchTraceRow> trace;
  double runtime_seconds = 0.0;  // filled by callers that time the run
};

using SampleEvaluator = std::function<SampleMetrics(const SampleContext&)>;
using BatchHook = std::function<void(std::size_t batch_index)>;

namespace detail {

// Reporting helper: a one-observation state has no variance estimate yet, so
// its half-width is treated as unbounded rather than an error.
inline double half_or_inf(const EstimatorState& s, double alpha) {
  return s.n < 2 ? std::numeric_limits<double>::infinity() : ci_half_width(s, alpha);
}

[[noreturn]] inline void rethrow_with_identity(std::exception_ptr ep, const SampleContext& ctx) {
  const std::string where =
      " [batch " + std::to_string(ctx.batch_index) + ", sample " + std::to_string(ctx.sample_index) + "]";
  try {
    std::rethrow_exception(ep);
  } catch (const validation_error& e) {
    throw validation_error(std::string(e.what()) + where);
  } catch (const io_error& e) {
    throw io_error(std::string(e.what()) + where);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + where);
  }
}

}  // namespace detail

// Generic adaptive driver. The evaluator must be a pure function of its
// SampleContext and safe to call from multiple threads; the hook runs on the
// driver thread before each batch is dispatched. Results are reduced in
// ascending sample index, so output is bit-identical for every worker count.
inline AdaptiveResult run_adaptive_metrics(const SampleEvaluator& evaluate, const MCConfig& cfg,
                                           std::size_t workers = 1,
                                           const BatchHook& on_batch_start = {}) {
  cfg.validate();
  if (workers < 1) throw validation_error("run_adaptive_metrics: workers must be >= 1");

  EstimatorState saifi, saidi;
  AdaptiveResult result;
  StopDecision decision;

  for (std::size_t batch = 0; saifi.n + cfg.batch_size <= cfg.max_samples; ++batch) {
    if (on_batch_start) on_batch_start(batch);
    const auto base = stratified_uniforms(cfg.batch_size, batch, cfg.master_seed);

    std::vector<SampleContext> ctx(cfg.batch_size);
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      ctx[i] = {batch, i, saifi.n + i, base[i], sample_seed(cfg.master_seed, batch, i)};
    }

    std::vector<SampleMetrics> slot(cfg.batch_size);
    std::vector<std::exception_ptr> err(cfg.batch_size);
    const std::size_t pool = std::min(workers, cfg.batch_size);
    if (pool <= 1) {
      for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        try {
          slot[i] = evaluate(ctx[i]);
        } catch (...) {
          err[i] = std::current_exception();
        }
      }
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> threads;
      threads.reserve(pool);
      for (std::size_t w = 0; w < pool; ++w) {
        threads.emplace_back([&] {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.batch_size) return;
            try {
              slot[i] = evaluate(ctx[i]);
            } catch (...) {
              err[i] = std::current_exception();
            }
          }
        });
      }
      for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      if (err[i]) detail::rethrow_with_identity(err[i], ctx[i]);
      saifi = welford_update(saifi, slot[i].saifi);
      saidi = welford_update(saidi, slot[i].saidi);
      for (double a : slot[i].customer_aif) result.aif_histogram.add(a);
    }

    result.trace.push_back({saifi.n, saifi.mean, detail::half_or_inf(saifi, cfg.alpha),
                            saidi.mean, detail::half_or_inf(saidi, cfg.alpha)});
    decision = should_stop(saifi, saidi, cfg);
    if (decision.stop) break;
  }

  result.n_samples = saifi.n;
  result.saifi_mean = saifi.mean;
  result.saifi_half = detail::half_or_inf(saifi, cfg.alpha);
  result.saidi_mean = saidi.mean;
  result.saidi_half = detail::half_or_inf(saidi, cfg.alpha);
  result.converged = decision.converged;
  return result;
}

}  // namespace gridrel
