// Gaussian models with closed-form Bayes factors, for checking the ABC
// estimators against the truth. The observation is a scalar d, the summary is
// the identity and the kernel score is |d - d*|.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rocabc/abc.hpp"
#include "rocabc/common.hpp"

namespace rocabc {

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// N(d; mu1, sigma^2) / N(d; mu2, sigma^2).
inline double true_bf_simple_gaussian(double d, double mu1, double mu2, double sigma) {
  require(sigma > 0.0, "sigma must be positive");
  return std::exp(normal_log_pdf(d, mu1, sigma) - normal_log_pdf(d, mu2, sigma));
}

/// N(d; mu1, sigma^2) / N(d; 0, sigma^2 + tau^2); model 2 integrates a
/// N(0, tau^2) location out.
inline double true_bf_composite_gaussian(double d, double mu1, double tau, double sigma) {
  require(sigma > 0.0 && tau >= 0.0, "sigma must be positive and tau non-negative");
  return std::exp(normal_log_pdf(d, mu1, sigma) - normal_log_pdf(d, 0.0, std::hypot(sigma, tau)));
}

enum class OracleKind { Simple, Composite };

struct OracleSetting {
  OracleKind kind = OracleKind::Simple;
  double d = 0.0;
  double mu1 = 0.0;
  double mu2 = 1.0;  // simple only
  double tau = 1.0;  // composite only
  double sigma = 1.0;

  double true_bf() const {
    return kind == OracleKind::Simple ? true_bf_simple_gaussian(d, mu1, mu2, sigma)
                                      : true_bf_composite_gaussian(d, mu1, tau, sigma);
  }
};

inline OracleKind oracle_kind_from_string(std::string_view s) {
  if (s == "simple") return OracleKind::Simple;
  if (s == "composite") return OracleKind::Composite;
  throw PreconditionError("unknown oracle setting '" + std::string(s) + "'");
}

inline std::string_view to_string(OracleKind k) { return k == OracleKind::Simple ? "simple" : "composite"; }

class GaussianSimulator {
 public:
  explicit GaussianSimulator(OracleSetting s) : s_(s) {
    require(s_.sigma > 0.0 && s_.tau >= 0.0, "oracle: sigma must be positive and tau non-negative");
  }

  double simulate(int model, Rng& rng) const { return simulate(model, rng, {}); }

  double simulate(int model, Rng& rng, std::span<double> cov) const {
    double x;
    if (model == 1) {
      x = normal(rng, s_.mu1, s_.sigma);
    } else if (s_.kind == OracleKind::Simple) {
      x = normal(rng, s_.mu2, s_.sigma);
    } else {
      const double theta = s_.tau > 0.0 ? normal(rng, 0.0, s_.tau) : 0.0;
      x = normal(rng, theta, s_.sigma);
    }
    const double score = std::abs(s_.d - x);
    if (!cov.empty()) cov[0] = score;
    return score;
  }

  std::size_t covariate_dim() const { return 1; }

 private:
  OracleSetting s_;
};

struct OracleEstimate {
  std::uint64_t seed = 0;
  Method method = Method::Empirical;
  double bf_log10 = 0.0;
  double error_log10 = 0.0;
  std::string error;  // non-empty when the method failed on this seed
};

struct OracleReport {
  OracleSetting setting;
  double true_log10 = 0.0;
  std::vector<OracleEstimate> estimates;

  /// Seeds whose |log10 error| for `m` is at most `tol`.
  std::size_t passes(Method m, double tol) const {
    std::size_t n = 0;
    for (const auto& e : estimates)
      if (e.method == m && e.error.empty() && std::abs(e.error_log10) <= tol) ++n;
    return n;
  }
};

/// Runs every method on shared draws for each seed. Seed s uses the master
/// seed stream_seed(cfg.master_seed, s).
inline OracleReport run_oracle(const OracleSetting& setting, const RunConfig& cfg, std::size_t seeds,
                               std::span<const Method> methods, const ModelPrior& prior = {}) {
  require(seeds >= 1, "oracle: need at least one seed");
  require(!methods.empty(), "oracle: no methods");
  OracleReport rep;
  rep.setting = setting;
  rep.true_log10 = std::log10(setting.true_bf());
  const GaussianSimulator sim(setting);
  for (std::size_t s = 0; s < seeds; ++s) {
    RunConfig c = cfg;
    c.master_seed = stream_seed(cfg.master_seed, s);
    const Draws d = simulate_draws(sim, prior, c.n_total, c.master_seed, c.workers);
    for (auto m : methods) {
      OracleEstimate e;
      e.seed = c.master_seed;
      e.method = m;
      try {
        e.bf_log10 = assign_bf(sim, d, prior, c, m).bf_log10;
        e.error_log10 = e.bf_log10 - rep.true_log10;
      } catch (const NumericalError& ex) {
        e.error = ex.what();
        e.bf_log10 = std::numeric_limits<double>::quiet_NaN();
        e.error_log10 = std::numeric_limits<double>::quiet_NaN();
      }
      rep.estimates.push_back(std::move(e));
    }
  }
  return rep;
}

}  // namespace rocabc
