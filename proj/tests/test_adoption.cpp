#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "gridrel/adoption.hpp"
#include "gridrel/errors.hpp"
#include "gridrel/rng.hpp"

using namespace gridrel;

namespace {

// Sample Spearman correlation: Pearson correlation of the rank sequences.
// Draws are continuous, so ties have probability zero.
double spearman(const std::vector<std::pair<double, double>>& xy) {
  const std::size_t n = xy.size();
  auto ranks = [&](bool second) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return (second ? xy[a].second : xy[a].first) < (second ? xy[b].second : xy[b].first);
    });
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto rx = ranks(false);
  const auto ry = ranks(true);
  const double mean = (static_cast<double>(n) - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

double ks_against_marginal(std::vector<double> v, const MarginalSpec& spec) {
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = marginal_cdf(spec, v[i]);
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::max(std::fabs(u[i] - static_cast<double>(i) / n),
                             std::fabs(u[i] - static_cast<double>(i + 1) / n)));
  }
  return d;
}

}  // namespace

TEST_CASE("copula parameter matches frozen transform values") {
  REQUIRE(copula_param(0.7) == Catch::Approx(0.7167358990906005).epsilon(1e-14));
  REQUIRE(copula_param(-0.2) == Catch::Approx(-0.20905692653530691).epsilon(1e-14));
  REQUIRE(copula_param(0.4) == Catch::Approx(0.41582338163551863).epsilon(1e-14));
  REQUIRE(copula_param(0.8) == Catch::Approx(0.8134732861516003).epsilon(1e-14));
  REQUIRE(copula_param(0.0) == 0.0);
  // Odd function, bounded away from one for targets inside (-1, 1).
  for (double r : {0.1, 0.35, 0.62, 0.9, 0.99}) {
    REQUIRE(copula_param(-r) == Catch::Approx(-copula_param(r)).epsilon(1e-14));
    REQUIRE(std::fabs(copula_param(r)) < 1.0);
    REQUIRE(copula_param(r) > 0.0);
  }
  REQUIRE_THROWS_AS(copula_param(1.0), validation_error);
  REQUIRE_THROWS_AS(copula_param(-1.0), validation_error);
}

TEST_CASE("rank-correlation targets cover all sixteen kind pairs") {
  using MK = MarginalKind;
  REQUIRE(spearman_target(MK::Limited, MK::Limited) == 0.7);
  REQUIRE(spearman_target(MK::Limited, MK::Varied) == 0.2);
  REQUIRE(spearman_target(MK::Limited, MK::MedianFocused) == 0.4);
  REQUIRE(spearman_target(MK::Limited, MK::HighlyConcentrated) == -0.2);
  REQUIRE(spearman_target(MK::Varied, MK::Limited) == 0.2);
  REQUIRE(spearman_target(MK::Varied, MK::Varied) == 0.4);
  REQUIRE(spearman_target(MK::Varied, MK::MedianFocused) == 0.3);
  REQUIRE(spearman_target(MK::Varied, MK::HighlyConcentrated) == 0.1);
  REQUIRE(spearman_target(MK::MedianFocused, MK::Limited) == 0.3);
  REQUIRE(spearman_target(MK::MedianFocused, MK::Varied) == 0.4);
  REQUIRE(spearman_target(MK::MedianFocused, MK::MedianFocused) == 0.5);
  REQUIRE(spearman_target(MK::MedianFocused, MK::HighlyConcentrated) == 0.3);
  REQUIRE(spearman_target(MK::HighlyConcentrated, MK::Limited) == 0.2);
  REQUIRE(spearman_target(MK::HighlyConcentrated, MK::Varied) == 0.2);
  REQUIRE(spearman_target(MK::HighlyConcentrated, MK::MedianFocused) == 0.3);
  REQUIRE(spearman_target(MK::HighlyConcentrated, MK::HighlyConcentrated) == 0.8);
}

TEST_CASE("scenario construction wires marginals, target, and threshold") {
  const auto sc = make_scenario(MarginalKind::Varied, MarginalKind::MedianFocused);
  REQUIRE(sc.pv_kind == MarginalKind::Varied);
  REQUIRE(sc.es_kind == MarginalKind::MedianFocused);
  REQUIRE(sc.rho_target == 0.3);
  REQUIRE(sc.pv.lo == 0.0);
  REQUIRE(sc.pv.hi == 3.5);
  REQUIRE(sc.es.hi == 6.75);
  REQUIRE(sc.es.sigma == 1.0);
  REQUIRE(sc.pv.sigma == 0.5);
  REQUIRE(sc.zero_threshold == 0.0);
  REQUIRE(sc.rho_gauss() == Catch::Approx(copula_param(0.3)).epsilon(1e-15));

  const auto zt = make_scenario(MarginalKind::Varied, MarginalKind::Varied, 3.5, 6.75, 0.25);
  REQUIRE(zt.zero_threshold == 0.25);
}

TEST_CASE("sampled pairs stay inside the adoption rectangle") {
  const auto sc = make_scenario(MarginalKind::Limited, MarginalKind::HighlyConcentrated);
  SplitMix64 rng(21);
  for (const auto& [x, y] : sample_joint(sc, 20000, rng)) {
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 3.5);
    REQUIRE(y >= 0.0);
    REQUIRE(y <= 6.75);
  }
}

TEST_CASE("boundary uniforms map to finite in-range adoption values") {
  const auto sc = make_scenario(MarginalKind::Limited, MarginalKind::Limited);
  for (double u : {0.0, 1.0}) {
    for (double w : {0.0, 1.0}) {
      const auto [x, y] = sample_pair(sc, u, w);
      REQUIRE(std::isfinite(x));
      REQUIRE(std::isfinite(y));
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 3.5);
      REQUIRE(y >= 0.0);
      REQUIRE(y <= 6.75);
    }
  }
}

TEST_CASE("the pv coordinate is driven by u alone and is monotone in it") {
  const auto sc = make_scenario(MarginalKind::MedianFocused, MarginalKind::Varied);
  double prev = -1.0;
  for (double u : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    const auto [x1, y1] = sample_pair(sc, u, 0.3);
    const auto [x2, y2] = sample_pair(sc, u, 0.9);
    REQUIRE(x1 == x2);  // w must not leak into the PV coordinate
    REQUIRE(x1 > prev);
    prev = x1;
    REQUIRE(y2 > y1);  // the conditional coordinate is monotone in w
  }
}

TEST_CASE("positive dependence makes storage stochastically increase with pv") {
  const auto sc = make_scenario(MarginalKind::Limited, MarginalKind::Limited);  // target 0.7
  // With w fixed, a higher PV uniform shifts the conditional storage draw up.
  for (double w : {0.2, 0.5, 0.8}) {
    const auto lo = sample_pair(sc, 0.1, w);
    const auto hi = sample_pair(sc, 0.9, w);
    REQUIRE(hi.second > lo.second);
  }
  // Negative target reverses the direction.
  const auto nsc = make_scenario(MarginalKind::Limited, MarginalKind::HighlyConcentrated);
  for (double w : {0.2, 0.5, 0.8}) {
    const auto lo = sample_pair(nsc, 0.1, w);
    const auto hi = sample_pair(nsc, 0.9, w);
    REQUIRE(hi.second < lo.second);
  }
}

TEST_CASE("sample rank correlation hits the configured target") {
  // Representative cells across the target range; the full 16-cell version
  // runs in the acceptance suite.
  const std::size_t n = 100000;
  const std::vector<std::pair<MarginalKind, MarginalKind>> cells = {
      {MarginalKind::Limited, MarginalKind::Limited},
      {MarginalKind::Limited, MarginalKind::HighlyConcentrated},
      {MarginalKind::Varied, MarginalKind::Varied},
      {MarginalKind::MedianFocused, MarginalKind::MedianFocused},
      {MarginalKind::HighlyConcentrated, MarginalKind::HighlyConcentrated},
  };
  for (const auto& [pk, ek] : cells) {
    const auto sc = make_scenario(pk, ek);
    SplitMix64 rng(derive_seed(5150, stream::kScenario,
                               kind_index(pk) * 4u + kind_index(ek)));
    const auto xy = sample_joint(sc, n, rng);
    REQUIRE(spearman(xy) == Catch::Approx(sc.rho_target).margin(0.02));
  }
}

TEST_CASE("copula sampling preserves both marginal distributions") {
  const std::size_t n = 100000;
  const double threshold = 1.6276236307187293 / std::sqrt(static_cast<double>(n));
  const auto sc = make_scenario(MarginalKind::Limited, MarginalKind::MedianFocused);
  SplitMix64 rng(77);
  const auto xy = sample_joint(sc, n, rng);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = xy[i].first;
    ys[i] = xy[i].second;
  }
  REQUIRE(ks_against_marginal(xs, sc.pv) < threshold);
  REQUIRE(ks_against_marginal(ys, sc.es) < threshold);
}

TEST_CASE("joint sampling is a pure function of the seed") {
  const auto sc = make_scenario(MarginalKind::Varied, MarginalKind::HighlyConcentrated);
  SplitMix64 a(31), b(31), c(32);
  const auto s1 = sample_joint(sc, 500, a);
  const auto s2 = sample_joint(sc, 500, b);
  const auto s3 = sample_joint(sc, 500, c);
  REQUIRE(s1 == s2);
  REQUIRE(s1 != s3);
  SplitMix64 d(31);
  REQUIRE_THROWS_AS(sample_joint(sc, 0, d), validation_error);
}

TEST_CASE("a zeroing threshold truncates small draws to exact zeros") {
  const double t = 0.5;
  const auto sc = make_scenario(MarginalKind::Limited, MarginalKind::Limited, 3.5, 6.75, t);
  SplitMix64 rng(12);
  const auto xy = sample_joint(sc, 20000, rng);
  std::size_t zeroed = 0;
  for (const auto& [x, y] : xy) {
    REQUIRE((x == 0.0 || x >= t));
    REQUIRE((y == 0.0 || y >= t));
    if (x == 0.0) ++zeroed;
  }
  // The truncated mass equals the marginal cdf at the threshold.
  const double expect = marginal_cdf(sc.pv, t);
  REQUIRE(static_cast<double>(zeroed) / 20000.0 == Catch::Approx(expect).margin(0.01));

  // The default keeps every positive draw: no point mass at zero.
  const auto plain = make_scenario(MarginalKind::Limited, MarginalKind::Limited);
  SplitMix64 rng2(12);
  for (const auto& [x, y] : sample_joint(plain, 20000, rng2)) {
    REQUIRE(x > 0.0);
    REQUIRE(y > 0.0);
  }
}

TEST_CASE("macroscopic penetration averages adoption weighted by peak demand") {
  const std::vector<std::pair<double, double>> samples = {{1.0, 2.0}, {3.0, 6.0}};
  // Equal weights: plain averages.
  const auto [pv_eq, es_eq] = macro_penetration(samples);
  REQUIRE(pv_eq == Catch::Approx(2.0).epsilon(1e-14));
  REQUIRE(es_eq == Catch::Approx(4.0).epsilon(1e-14));
  // 3:1 weighting pulls toward the first sample.
  const auto [pv_w, es_w] = macro_penetration(samples, {3.0, 1.0});
  REQUIRE(pv_w == Catch::Approx(1.5).epsilon(1e-14));
  REQUIRE(es_w == Catch::Approx(3.0).epsilon(1e-14));

  REQUIRE_THROWS_AS(macro_penetration({}), validation_error);
  REQUIRE_THROWS_AS(macro_penetration(samples, {1.0}), validation_error);
  REQUIRE_THROWS_AS(macro_penetration(samples, {1.0, 0.0}), validation_error);
}

TEST_CASE("high-adoption scenarios reach the expected macroscopic level") {
  const auto sc = make_scenario(MarginalKind::HighlyConcentrated,
                                MarginalKind::HighlyConcentrated);
  SplitMix64 rng(404);
  const auto xy = sample_joint(sc, 100000, rng);
  const auto [pv, es] = macro_penetration(xy);
  REQUIRE(pv == Catch::Approx(3.0434782608695654).epsilon(0.02));
  REQUIRE(es == Catch::Approx(5.869565217391305).epsilon(0.02));
}
