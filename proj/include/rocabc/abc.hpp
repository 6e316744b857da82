// ABC model choice driven by kernel scores.
//
// Every draw i owns the random stream (seed, i): it first picks the model
// index from the prior and then simulates a pseudo-observation and its score
// against the observed data. Draws are stored by index, so results do not
// depend on the number of worker threads.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rocabc/baseline.hpp"
#include "rocabc/common.hpp"
#include "rocabc/features.hpp"
#include "rocabc/generative.hpp"
#include "rocabc/kernel.hpp"
#include "rocabc/roc.hpp"

namespace rocabc {

enum class Method { Empirical, DualBeta, Logistic };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Empirical: return "empirical";
    case Method::DualBeta: return "dualbeta";
    case Method::Logistic: return "logistic";
  }
  return "empirical";
}

inline Method method_from_string(std::string_view s) {
  if (s == "empirical") return Method::Empirical;
  if (s == "dualbeta") return Method::DualBeta;
  if (s == "logistic") return Method::Logistic;
  throw PreconditionError("unknown method '" + std::string(s) + "'");
}

struct RunConfig {
  std::size_t n_total = 50000;
  std::size_t m_denominator = 10;
  double p_floor = 1.0 / 25000.0;
  Method method = Method::Empirical;
  std::uint64_t master_seed = 0;
  std::vector<double> checkpoints{0.1, 0.25, 0.5, 0.75, 1.0};
  LogisticBfOptions logistic{};
  DualBetaFitOptions dual_beta{};
  unsigned workers = 0;  // 0: ROC_ABC_THREADS or the hardware concurrency

  void validate() const {
    require(n_total >= 1000, "n_total must be at least 1000");
    require(m_denominator >= 1, "m must be at least 1");
    require(p_floor > 0.0 && p_floor <= 1.0, "p_floor must lie in (0, 1]");
    for (double c : checkpoints) require(c > 0.0 && c <= 1.0, "checkpoints must lie in (0, 1]");
    require(logistic.retained_fraction > 0.0 && logistic.retained_fraction <= 1.0,
            "retained fraction must lie in (0, 1]");
  }
};

struct TracePoint {
  std::size_t n = 0;
  std::size_t L = 0;
  double p_used = 0.0;
  double bf_log10 = 0.0;
};

struct Timing {
  double generation_s = 0.0;
  double assignment_s = 0.0;
};

struct Draws {
  std::vector<int> models;
  std::vector<double> scores;

  ScoreSample sample() const { return prefix_sample(models.size()); }

  ScoreSample prefix_sample(std::size_t n) const {
    ScoreSample s;
    for (std::size_t i = 0; i < n; ++i) (models[i] == 1 ? s.f_scores : s.g_scores).push_back(scores[i]);
    return s;
  }
};

struct RunResult {
  Method method = Method::Empirical;
  Draws draws;
  ScoreSample sample;
  double bf_log10 = 0.0;
  double p_used = 0.0;
  double t_used = std::numeric_limits<double>::quiet_NaN();
  double upper_bound_log10 = std::numeric_limits<double>::quiet_NaN();  // set when no model-1 score is accepted
  std::vector<TracePoint> convergence;
  Timing timing;
  std::string diagnostic;
  DualBetaParams dual_beta{};
  LogisticBf logistic{};
};

/// A simulator returns the kernel score of a fresh pseudo-observation under
/// `model` against the observed data. The three-argument form also writes the
/// logistic covariates; both must consume the stream identically.
template <class S>
concept Simulator = requires(const S& s, int model, Rng& rng, std::span<double> cov) {
  { s.simulate(model, rng) } -> std::convertible_to<double>;
  { s.simulate(model, rng, cov) } -> std::convertible_to<double>;
  { s.covariate_dim() } -> std::convertible_to<std::size_t>;
};

/// Simulator assembled from two generators and functions of the pseudo-data.
template <class Gen1, class Gen2, class ScoreFn, class CovFn>
class FunctionSimulator {
 public:
  FunctionSimulator(Gen1 g1, Gen2 g2, ScoreFn score, CovFn cov, std::size_t dim)
      : g1_(std::move(g1)), g2_(std::move(g2)), score_(std::move(score)), cov_(std::move(cov)), dim_(dim) {}

  double simulate(int model, Rng& rng) const { return simulate(model, rng, {}); }

  double simulate(int model, Rng& rng, std::span<double> cov) const {
    if (model == 1) return finish(g1_(rng), cov);
    return finish(g2_(rng), cov);
  }

  std::size_t covariate_dim() const { return dim_; }

 private:
  template <class Data>
  double finish(const Data& d, std::span<double> cov) const {
    if (!cov.empty()) cov_(d, cov);
    return score_(d);
  }

  Gen1 g1_;
  Gen2 g2_;
  ScoreFn score_;
  CovFn cov_;
  std::size_t dim_;
};

template <class Gen1, class Gen2, class ScoreFn, class CovFn>
auto make_simulator(Gen1 g1, Gen2 g2, ScoreFn score, CovFn cov, std::size_t dim) {
  return FunctionSimulator<Gen1, Gen2, ScoreFn, CovFn>(std::move(g1), std::move(g2), std::move(score),
                                                       std::move(cov), dim);
}

inline int draw_model(Rng& rng, const ModelPrior& prior) {
  return uniform(rng, 0.0, 1.0) < prior.pi1 ? 1 : 2;
}

template <Simulator S>
Draws simulate_draws(const S& sim, const ModelPrior& prior, std::size_t n, std::uint64_t seed,
                     unsigned workers = 0) {
  prior.validate();
  Draws d;
  d.models.resize(n);
  d.scores.resize(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        d.models[i] = draw_model(rng, prior);
        d.scores[i] = sim.simulate(d.models[i], rng);
      },
      workers);
  return d;
}

/// Re-simulates the draws with score below `bandwidth` and records their
/// covariates.
template <Simulator S>
LogisticData collect_logistic_data(const S& sim, const Draws& d, const ModelPrior& prior, double bandwidth,
                                   std::uint64_t seed, unsigned workers = 0) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.scores.size(); ++i)
    if (d.scores[i] < bandwidth) keep.push_back(i);
  const std::size_t dim = sim.covariate_dim();
  require(dim >= 1, "logistic method needs at least one covariate");
  LogisticData out;
  out.labels.resize(keep.size());
  out.scores.resize(keep.size());
  out.covariates.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(dim));
  // Rows are filled through a row-major buffer so each worker owns its slice.
  std::vector<double> buf(keep.size() * dim);
  parallel_for(
      keep.size(),
      [&](std::size_t r) {
        const std::size_t i = keep[r];
        Rng rng = stream_rng(seed, i);
        const int model = draw_model(rng, prior);
        const double s = sim.simulate(model, rng, std::span<double>(buf.data() + r * dim, dim));
        if (model != d.models[i] || s != d.scores[i])
          throw NumericalError("simulator is not reproducible on its random stream");
        out.labels[r] = model;
        out.scores[r] = s;
      },
      workers);
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < dim; ++c)
      out.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[r * dim + c];
  return out;
}

/// Empirical BF recomputed on the first n draws for each checkpoint fraction.
/// Checkpoints with fewer than m model-2 draws are skipped.
inline std::vector<TracePoint> convergence_trace(const Draws& d, std::size_t m, std::span<const double> fractions,
                                                 const ModelPrior& prior = {}) {
  std::vector<std::size_t> ns;
  const std::size_t total = d.models.size();
  for (double f : fractions) {
    require(f > 0.0 && f <= 1.0, "checkpoint fractions must lie in (0, 1]");
    ns.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * static_cast<double>(total))), 1,
                                         total));
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<TracePoint> out;
  for (auto n : ns) {
    const auto s = d.prefix_sample(n);
    if (s.L() < m || s.K() == 0) continue;
    const auto e = empirical_bf(s, m, prior);
    out.push_back({n, s.L(), e.p_used, e.bf_log10});
  }
  return out;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Assigns the BF for one method to already generated draws. The logistic
/// method re-simulates the retained draws through `sim` for covariates.
template <Simulator S>
RunResult assign_bf(const S& sim, const Draws& d, const ModelPrior& prior, const RunConfig& cfg, Method method) {
  RunResult r;
  r.method = method;
  r.sample = d.sample();
  if (r.sample.K() == 0 || r.sample.L() == 0)
    throw NumericalError("after " + std::to_string(d.models.size()) + " draws there are " +
                         std::to_string(r.sample.K()) + " model-1 and " + std::to_string(r.sample.L()) +
                         " model-2 scores; both models need at least one");
  const auto t0 = std::chrono::steady_clock::now();
  switch (method) {
    case Method::Empirical: {
      if (r.sample.L() < cfg.m_denominator)
        throw NumericalError("only " + std::to_string(r.sample.L()) + " model-2 scores for m = " +
                             std::to_string(cfg.m_denominator));
      const auto e = empirical_bf(r.sample, cfg.m_denominator, prior);
      r.bf_log10 = e.bf_log10;
      r.p_used = e.p_used;
      r.t_used = e.t_used;
      if (e.accepted_f == 0) {
        r.upper_bound_log10 = e.upper_bound_log10;
        r.diagnostic = "no model-1 score at or below t; BF < 1/(K p)";
      }
      break;
    }
    case Method::DualBeta: {
      r.dual_beta = fit_dual_beta(r.sample, cfg.dual_beta);
      r.bf_log10 = std::log10(bounded_bf(r.dual_beta, cfg.p_floor));
      r.p_used = cfg.p_floor;
      break;
    }
    case Method::Logistic: {
      const double h = retention_bandwidth(d.scores, cfg.logistic.retained_fraction);
      if (!(h > 0.0))
        throw NumericalError("logistic: the retention quantile of the scores is zero, no kernel bandwidth");
      const auto t_data = std::chrono::steady_clock::now();
      const auto data = collect_logistic_data(sim, d, prior, h, cfg.master_seed, cfg.workers);
      r.timing.generation_s += detail::seconds_since(t_data);
      const auto t_fit = std::chrono::steady_clock::now();
      r.logistic = logistic_bf(data, h, prior, cfg.logistic);
      r.timing.assignment_s = detail::seconds_since(t_fit);
      r.bf_log10 = r.logistic.bf_log10;
      r.p_used = cfg.logistic.retained_fraction;
      if (r.logistic.fit.separated) r.diagnostic = "logistic fit separated; probability clamped";
      break;
    }
  }
  if (method != Method::Logistic) r.timing.assignment_s = detail::seconds_since(t0);
  if (r.sample.L() >= cfg.m_denominator)
    r.convergence = convergence_trace(d, cfg.m_denominator, cfg.checkpoints, prior);
  return r;
}

/// One set of draws, BFs by every requested method.
template <Simulator S>
std::vector<RunResult> generic_run_methods(const S& sim, const ModelPrior& prior, const RunConfig& cfg,
                                           std::span<const Method> methods) {
  cfg.validate();
  prior.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Draws d = simulate_draws(sim, prior, cfg.n_total, cfg.master_seed, cfg.workers);
  const double gen = detail::seconds_since(t0);
  std::vector<RunResult> out;
  for (auto m : methods) {
    auto r = assign_bf(sim, d, prior, cfg, m);
    r.timing.generation_s += gen;
    r.draws = d;
    out.push_back(std::move(r));
  }
  return out;
}

template <Simulator S>
RunResult generic_run(const S& sim, const ModelPrior& prior, const RunConfig& cfg) {
  const Method m[] = {cfg.method};
  return std::move(generic_run_methods(sim, prior, cfg, m).front());
}

// --- fingerprint evidence ----------------------------------------------------

enum class CovariateMode { Summary, Components };

/// Close-match subconfigurations of every population finger for one trace,
/// computed on first use and shared by all simulators built on it.
class MatchCache {
 public:
  MatchCache(const Population& pop, Configuration trace, KernelWeights w, MatchOptions opt = {})
      : pop_(pop), trace_(std::move(trace)), w_(w), opt_(std::move(opt)) {
    summary_ = summarize(trace_, opt_.seg_len);
    eligible_ = eligible_fingers(pop_, trace_.size());
    flags_ = std::make_unique<std::once_flag[]>(pop_.fingers.size());
    matches_.resize(pop_.fingers.size());
  }

  const SubconfigMatch& match(std::size_t finger) const {
    require(finger < pop_.fingers.size(), "finger index out of range");
    std::call_once(flags_[finger], [&] {
      matches_[finger] = match_subconfig(pop_.fingers[finger], trace_, summary_, w_, opt_);
    });
    return matches_[finger];
  }

  const Configuration& trace() const { return trace_; }
  const SummaryVector& trace_summary() const { return summary_; }
  const KernelWeights& weights() const { return w_; }
  const MatchOptions& options() const { return opt_; }
  const std::vector<std::size_t>& eligible() const { return eligible_; }
  const Population& population() const { return pop_; }

 private:
  const Population& pop_;
  Configuration trace_;
  KernelWeights w_;
  MatchOptions opt_;
  SummaryVector summary_;
  std::vector<std::size_t> eligible_;
  std::unique_ptr<std::once_flag[]> flags_;
  mutable std::vector<SubconfigMatch> matches_;
};

/// Absolute summary differences; the type entries become mismatch indicators.
inline void summary_covariates(const SummaryVector& obs, const SummaryVector& pseudo, std::span<double> out) {
  std::size_t o = 0;
  auto put = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) out[o++] = std::abs(a[i] - b[i]);
  };
  put(obs.cross_dists, pseudo.cross_dists);
  put(obs.centroid_dists, pseudo.centroid_dists);
  put(obs.dir_marker_cross_dists, pseudo.dir_marker_cross_dists);
  put(obs.centroid_angles, pseudo.centroid_angles);
  for (std::size_t i = 0; i < obs.types.size(); ++i) out[o++] = obs.types[i] == pseudo.types[i] ? 0.0 : 1.0;
}

class FingerprintSimulator {
 public:
  FingerprintSimulator(Configuration control, std::shared_ptr<const MatchCache> cache, DistortionPrior prior = {},
                       CovariateMode mode = CovariateMode::Summary)
      : control_(std::move(control)), cache_(std::move(cache)), prior_(prior), mode_(mode) {
    require(cache_ != nullptr, "fingerprint simulator needs a match cache");
    require(control_.size() == cache_->trace().size(),
            "control and trace must have the same number of minutiae");
  }

  double simulate(int model, Rng& rng) const { return simulate(model, rng, {}); }

  double simulate(int model, Rng& rng, std::span<double> cov) const {
    const Configuration pseudo =
        model == 1 ? generate_m1(control_, rng, prior_)
                   : generate_m2_with(
                         cache_->eligible(), rng,
                         [&](std::size_t f) -> const Configuration& { return cache_->match(f).config; }, prior_);
    const auto& opt = cache_->options();
    const auto s = summarize(pseudo, opt.seg_len);
    if (!cov.empty()) {
      if (mode_ == CovariateMode::Summary) {
        summary_covariates(cache_->trace_summary(), s, cov);
      } else {
        const auto c = components(cache_->trace_summary(), s, opt.kernel);
        std::copy(c.begin(), c.end(), cov.begin());
      }
    }
    return delta(cache_->trace_summary(), s, cache_->weights(), opt.kernel);
  }

  std::size_t covariate_dim() const {
    const std::size_t k = control_.size();
    return mode_ == CovariateMode::Summary ? k * k + 2 * k : 5;
  }

 private:
  Configuration control_;
  std::shared_ptr<const MatchCache> cache_;
  DistortionPrior prior_;
  CovariateMode mode_;
};

/// Fingerprint evidence: M1 distorts the control, M2 distorts the close match
/// of a uniformly drawn population finger.
inline RunResult run(const Configuration& trace, const Configuration& control, const Population& pop,
                     const KernelWeights& w, const ModelPrior& prior, const RunConfig& cfg,
                     const MatchOptions& match = {}, const DistortionPrior& distortion = {},
                     CovariateMode mode = CovariateMode::Summary) {
  require(trace.size() == control.size(), "trace and control must have the same number of minutiae");
  auto cache = std::make_shared<const MatchCache>(pop, trace, w, match);
  FingerprintSimulator sim(control, cache, distortion, mode);
  return generic_run(sim, prior, cfg);
}

}  // namespace rocabc
