// Non-central beta distribution with first shape parameter fixed at 1.
//
// The density is the Poisson(lambda/2) mixture of central Beta(1 + j, beta)
// densities. With the first shape parameter an integer, the regularised
// incomplete beta I_x(1 + j, beta) equals P(N > j) for N negative-binomial
// with size beta and success probability x, so both the density and the
// distribution function reduce to short recurrences without special
// functions. The Poisson series stops once the accumulated weight exceeds
// 1 - 1e-14 (at most 10^4 terms).
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "rocabc/common.hpp"

namespace rocabc::ncbeta {

constexpr double kPoissonTailMass = 1e-14;
constexpr std::size_t kMaxTerms = 10000;

namespace detail {

inline void check_params(double beta, double lambda) {
  require(std::isfinite(beta) && beta > 0.0, "ncbeta: beta must be positive");
  require(std::isfinite(lambda) && lambda >= 0.0, "ncbeta: lambda must be non-negative");
  require(lambda <= 1400.0, "ncbeta: lambda too large for the Poisson series");
}

/// Poisson(lambda/2) weights until the accumulated mass passes 1 - 1e-14.
inline std::vector<double> poisson_weights(double lambda) {
  const double mu = 0.5 * lambda;
  std::vector<double> w;
  double wj = std::exp(-mu);
  double cum = 0.0;
  for (std::size_t j = 0; j < kMaxTerms; ++j) {
    if (j > 0) wj *= mu / static_cast<double>(j);
    w.push_back(wj);
    cum += wj;
    if (cum > 1.0 - kPoissonTailMass) break;
    if (static_cast<double>(j) > mu && wj < 1e-300) break;
  }
  return w;
}

}  // namespace detail

/// Lower and upper tail together; each is accurate where it is small.
struct Tails {
  double lower;
  double upper;
};

/// Distribution object with the Poisson weights computed once.
class Distribution {
 public:
  Distribution(double beta, double lambda) : beta_(beta), lambda_(lambda) {
    detail::check_params(beta, lambda);
    weights_ = detail::poisson_weights(lambda);
  }

  double beta() const { return beta_; }
  double lambda() const { return lambda_; }

  /// Density on [0, 1].
  double pdf(double t) const {
    require(t >= 0.0 && t <= 1.0, "ncbeta::pdf: t outside [0, 1]");
    // pdf = (1-t)^(beta-1) * sum_j w_j a_j, a_j = t^j / B(1 + j, beta)
    const double base =
        (t == 1.0) ? std::pow(0.0, beta_ - 1.0) : std::exp((beta_ - 1.0) * std::log1p(-t));
    if (base == 0.0) return 0.0;
    double aj = beta_;
    double sum = weights_[0] * aj;
    for (std::size_t j = 1; j < weights_.size(); ++j) {
      const double jd = static_cast<double>(j);
      aj *= t * (jd + beta_) / jd;
      sum += weights_[j] * aj;
    }
    return base * sum;
  }

  Tails tails(double x) const {
    require(x >= 0.0 && x <= 1.0, "ncbeta::cdf: t outside [0, 1]");
    if (x == 0.0) return {0.0, 1.0};
    if (x == 1.0) return {1.0, 0.0};
    const auto& w = weights_;
    const std::size_t jmax = w.size() - 1;
    // Negative-binomial pmf NB_i, i >= 0, size beta, success probability x.
    auto ratio = [&](std::size_t i) {  // NB_i / NB_{i-1}
      const double id = static_cast<double>(i);
      return x * (id - 1.0 + beta_) / id;
    };
    const double log_nb0 = beta_ * std::log1p(-x);

    if (jmax == 0) {
      const double lower = w[0] * -std::expm1(log_nb0);
      return {lower, 1.0 - lower};
    }
    // P(N > j) accumulated from the top so that every step is an addition.
    // Converges geometrically with ratio about x, so it is used for x <= 0.5
    // and whenever the lower tail is small.
    auto from_top = [&]() -> Tails {
      thread_local std::vector<double> nb;
      nb.resize(jmax + 1);
      nb[0] = std::exp(log_nb0);
      for (std::size_t i = 1; i <= jmax; ++i) nb[i] = nb[i - 1] * ratio(i);
      double term = nb[jmax];
      double tail = 0.0;  // P(N > jmax)
      for (std::size_t i = jmax + 1; i < jmax + 1 + kMaxTerms; ++i) {
        term *= ratio(i);
        tail += term;
        if (term == 0.0 || (term <= 1e-17 * tail && ratio(i + 1) < 1.0)) break;
      }
      double lower = 0.0;
      for (std::size_t j = jmax + 1; j-- > 0;) {
        lower += w[j] * tail;
        tail += nb[j];  // P(N > j - 1)
      }
      return {lower, 1.0 - lower};
    };
    if (x <= 0.5) return from_top();
    // P(N <= j) accumulated forward; positive terms only.
    double nb = std::exp(log_nb0);
    double head = nb;
    double upper = w[0] * head;
    for (std::size_t j = 1; j <= jmax; ++j) {
      nb *= ratio(j);
      head += nb;
      upper += w[j] * std::min(head, 1.0);
    }
    if (upper > 0.9 && x < 0.99) return from_top();
    return {1.0 - upper, upper};
  }

  double cdf(double t) const { return tails(t).lower; }
  double sf(double t) const { return tails(t).upper; }

  /// Inverse of cdf by safeguarded Newton iteration inside a shrinking
  /// bisection bracket. Stops when the Newton step is at machine precision or
  /// the bracket is narrower than 1e-12 * t (never looser than 1e-12 absolute).
  double quantile(double p, double hint = -1.0) const {
    require(p >= 0.0 && p <= 1.0, "ncbeta::quantile: p outside [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double t = (hint > 0.0 && hint < 1.0) ? hint : -std::expm1(std::log1p(-p) / beta_);
    if (!(t > 0.0 && t < 1.0)) t = 0.5;
    for (int it = 0; it < 400; ++it) {
      const double f = cdf(t) - p;
      if (f == 0.0) return t;
      if (f < 0.0) lo = t; else hi = t;
      const double d = pdf(t);
      double next = (d > 0.0 && std::isfinite(d)) ? t - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - t);
      t = next;
      if (step <= 4.0 * std::numeric_limits<double>::epsilon() * t) return t;
      if (hi - lo <= 1e-12 * t) return t;
    }
    return t;
  }

 private:
  double beta_;
  double lambda_;
  std::vector<double> weights_;
};

inline double pdf(double t, double beta, double lambda) { return Distribution(beta, lambda).pdf(t); }
inline double cdf(double t, double beta, double lambda) { return Distribution(beta, lambda).cdf(t); }
inline double sf(double t, double beta, double lambda) { return Distribution(beta, lambda).sf(t); }
inline double quantile(double p, double beta, double lambda) {
  return Distribution(beta, lambda).quantile(p);
}

inline double sample(Rng& rng, double beta, double lambda) {
  detail::check_params(beta, lambda);
  const unsigned long j =
      lambda > 0.0 ? std::poisson_distribution<unsigned long>(0.5 * lambda)(rng) : 0UL;
  const double a = std::gamma_distribution<double>(1.0 + static_cast<double>(j), 1.0)(rng);
  const double b = std::gamma_distribution<double>(beta, 1.0)(rng);
  return a / (a + b);
}

}  // namespace rocabc::ncbeta
