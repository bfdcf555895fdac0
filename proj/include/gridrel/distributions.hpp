#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "gridrel/errors.hpp"
#include "gridrel/stats.hpp"

namespace gridrel {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta, modified Lentz.
// Converges fastest for x < (a+1)/(a+b+2); callers switch via symmetry.
inline double ibeta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw validation_error("ibeta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::ibeta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

inline double beta_pdf(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x == 0.0) return (a < 1.0) ? std::numeric_limits<double>::infinity() : (a == 1.0 ? b : 0.0);
  if (x == 1.0) return (b < 1.0) ? std::numeric_limits<double>::infinity() : (b == 1.0 ? a : 0.0);
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

// Inverse of I_x(a, b): Newton iteration inside a maintained bisection
// bracket, falling back to pure bisection whenever a step leaves the bracket.
// Terminates when the bracket is below 1e-10 wide or the residual vanishes.
inline double ibeta_inv(double a, double b, double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw validation_error("ibeta_inv: p must lie strictly inside (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);  // mean as the starting point
  for (int it = 0; it < 200; ++it) {
    const double f = ibeta(a, b, x) - p;
    if (f > 0.0) {
      hi = x;
    } else if (f < 0.0) {
      lo = x;
    } else {
      return x;
    }
    const double pdf = beta_pdf(a, b, x);
    double nx = (pdf > 0.0 && std::isfinite(pdf)) ? x - f / pdf : x;
    if (!(nx > lo) || !(nx < hi)) nx = 0.5 * (lo + hi);
    if (hi - lo < 1e-10 * std::max(1.0, std::fabs(x))) return 0.5 * (lo + hi);
    x = nx;
  }
  return 0.5 * (lo + hi);
}

// The four residence-level adoption shapes. Limited piles mass near zero,
// HighlyConcentrated near the upper bound, MedianFocused around the midrange,
// Varied is flat across the whole range.
enum class MarginalKind { Limited, Varied, MedianFocused, HighlyConcentrated };

inline const char* kind_code(MarginalKind k) {
  switch (k) {
    case MarginalKind::Limited: return "L";
    case MarginalKind::Varied: return "V";
    case MarginalKind::MedianFocused: return "MF";
    case MarginalKind::HighlyConcentrated: return "HC";
  }
  throw validation_error("kind_code: unknown marginal kind");
}

inline MarginalKind parse_kind(const std::string& code) {
  if (code == "L") return MarginalKind::Limited;
  if (code == "V") return MarginalKind::Varied;
  if (code == "MF") return MarginalKind::MedianFocused;
  if (code == "HC") return MarginalKind::HighlyConcentrated;
  throw validation_error("unknown adoption kind code '" + code + "' (expected L, V, MF, or HC)");
}

constexpr int kind_index(MarginalKind k) { return static_cast<int>(k); }

// Beta shapes shared by the skewed kinds.
constexpr double kBetaNarrow = 0.75;
constexpr double kBetaWide = 5.0;

struct MarginalSpec {
  MarginalKind kind;
  double lo;     // lower bound of the support
  double hi;     // upper bound of the support
  double sigma;  // pre-truncation std dev, MedianFocused only

  void validate() const {
    if (!(hi > lo)) throw validation_error("MarginalSpec: hi must exceed lo");
    if (kind == MarginalKind::MedianFocused && !(sigma > 0.0)) {
      throw validation_error("MarginalSpec: sigma must be positive");
    }
  }
};

namespace detail {

struct TruncNorm {
  double mu, sigma, phi_lo, phi_hi;
  TruncNorm(const MarginalSpec& s)
      : mu(0.5 * (s.lo + s.hi)),
        sigma(s.sigma),
        phi_lo(normal_cdf((s.lo - mu) / sigma)),
        phi_hi(normal_cdf((s.hi - mu) / sigma)) {}
  double mass() const { return phi_hi - phi_lo; }
};

}  // namespace detail

inline double marginal_pdf(const MarginalSpec& s, double v) {
  s.validate();
  const double w = s.hi - s.lo;
  if (v < s.lo || v > s.hi) return 0.0;
  const double z = (v - s.lo) / w;
  switch (s.kind) {
    case MarginalKind::Limited:
      return beta_pdf(kBetaNarrow, kBetaWide, z) / w;
    case MarginalKind::HighlyConcentrated:
      return beta_pdf(kBetaWide, kBetaNarrow, z) / w;
    case MarginalKind::Varied:
      return 1.0 / w;
    case MarginalKind::MedianFocused: {
      const detail::TruncNorm t(s);
      return normal_pdf((v - t.mu) / t.sigma) / (t.sigma * t.mass());
    }
  }
  throw validation_error("marginal_pdf: unknown kind");
}

inline double marginal_cdf(const MarginalSpec& s, double v) {
  s.validate();
  if (v <= s.lo) return 0.0;
  if (v >= s.hi) return 1.0;
  const double z = (v - s.lo) / (s.hi - s.lo);
  switch (s.kind) {
    case MarginalKind::Limited:
      return ibeta(kBetaNarrow, kBetaWide, z);
    case MarginalKind::HighlyConcentrated:
      return ibeta(kBetaWide, kBetaNarrow, z);
    case MarginalKind::Varied:
      return z;
    case MarginalKind::MedianFocused: {
      const detail::TruncNorm t(s);
      return (normal_cdf((v - t.mu) / t.sigma) - t.phi_lo) / t.mass();
    }
  }
  throw validation_error("marginal_cdf: unknown kind");
}

inline double marginal_quantile(const MarginalSpec& s, double u) {
  s.validate();
  if (!(u > 0.0) || !(u < 1.0)) {
    throw validation_error("marginal_quantile: u must lie strictly inside (0, 1)");
  }
  const double w = s.hi - s.lo;
  switch (s.kind) {
    case MarginalKind::Limited:
      return s.lo + w * ibeta_inv(kBetaNarrow, kBetaWide, u);
    case MarginalKind::HighlyConcentrated:
      return s.lo + w * ibeta_inv(kBetaWide, kBetaNarrow, u);
    case MarginalKind::Varied:
      return s.lo + w * u;
    case MarginalKind::MedianFocused: {
      const detail::TruncNorm t(s);
      const double p = t.phi_lo + u * t.mass();
      const double v = t.mu + t.sigma * normal_quantile(p);
      return std::clamp(v, s.lo, s.hi);
    }
  }
  throw validation_error("marginal_quantile: unknown kind");
}

inline double marginal_mean(const MarginalSpec& s) {
  const double w = s.hi - s.lo;
  switch (s.kind) {
    case MarginalKind::Limited:
      return s.lo + w * kBetaNarrow / (kBetaNarrow + kBetaWide);
    case MarginalKind::HighlyConcentrated:
      return s.lo + w * kBetaWide / (kBetaNarrow + kBetaWide);
    case MarginalKind::Varied:
      return s.lo + 0.5 * w;
    case MarginalKind::MedianFocused: {
      const detail::TruncNorm t(s);
      const double a = (s.lo - t.mu) / t.sigma;
      const double b = (s.hi - t.mu) / t.sigma;
      return t.mu + t.sigma * (normal_pdf(a) - normal_pdf(b)) / t.mass();
    }
  }
  throw validation_error("marginal_mean: unknown kind");
}

}  // namespace gridrel
