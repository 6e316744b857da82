// Synthetic case studies (true source, close non-match, random source) and
// the timing benchmark for BF assignment.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rocabc/abc.hpp"
#include "rocabc/common.hpp"
#include "rocabc/generative.hpp"

namespace rocabc {

enum class Design { TS, CNM, RS };

inline std::string_view to_string(Design d) {
  switch (d) {
    case Design::TS: return "TS";
    case Design::CNM: return "CNM";
    case Design::RS: return "RS";
  }
  return "TS";
}

inline Design design_from_string(std::string_view s) {
  if (s == "TS" || s == "ts") return Design::TS;
  if (s == "CNM" || s == "cnm") return Design::CNM;
  if (s == "RS" || s == "rs") return Design::RS;
  throw PreconditionError("unknown design '" + std::string(s) + "'");
}

struct ExperimentConfig {
  std::vector<std::size_t> k_list{4, 7, 10, 13, 16};
  std::size_t cases = 50;
  std::vector<Design> designs{Design::TS};
  std::vector<Method> methods{Method::Empirical};
  RunConfig run{};  // n_total, m, p_floor and method options; the seed is set per case
  ModelPrior prior{};
  KernelWeights weights{};
  MatchOptions match{};
  DistortionPrior distortion{};
  CovariateMode covariates = CovariateMode::Summary;
  std::uint64_t seed = 0;
};

struct CaseResult {
  Design design = Design::TS;
  std::size_t k = 0;
  std::size_t case_id = 0;
  std::string source;
  std::string control;
  Method method = Method::Empirical;
  double bf_log10 = std::numeric_limits<double>::quiet_NaN();
  double upper_bound_log10 = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

/// A sampled case: the trace's source finger, the trace/control pair and the
/// population of alternative sources (every other finger).
struct CaseSetup {
  std::size_t source = 0;
  TracePair pair;
  Population alternatives;
  std::vector<std::size_t> alternative_index;  // position in the full population
};

inline CaseSetup setup_case(const Population& pop, std::size_t k, std::uint64_t seed, std::size_t case_id,
                            const DistortionPrior& distortion = {}) {
  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < pop.fingers.size(); ++i)
    if (pop.fingers[i].minutiae.size() >= k) sources.push_back(i);
  if (sources.empty()) throw PreconditionError("no finger has " + std::to_string(k) + " minutiae");
  Rng rng = stream_rng(stream_seed(seed, k), case_id);
  CaseSetup c;
  c.source = sources[std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(rng)];
  c.pair = sample_trace(pop.fingers[c.source], k, rng, distortion);
  for (std::size_t i = 0; i < pop.fingers.size(); ++i)
    if (i != c.source) {
      c.alternatives.fingers.push_back(pop.fingers[i]);
      c.alternative_index.push_back(i);
    }
  c.alternatives.seed = pop.seed;
  return c;
}

/// Runs every design and method for every (k, case). The simulation seed of a
/// case depends only on the case number, so designs and values of k share
/// their random numbers.
inline std::vector<CaseResult> run_experiment(const Population& pop, const ExperimentConfig& cfg) {
  require(!cfg.k_list.empty() && cfg.cases >= 1, "experiment: empty k list or no cases");
  require(!cfg.designs.empty() && !cfg.methods.empty(), "experiment: no designs or methods");
  for (auto k : cfg.k_list) require(k >= 3, "experiment: k must be at least 3");
  cfg.run.validate();
  std::vector<CaseResult> out;
  for (auto k : cfg.k_list) {
    for (std::size_t c = 0; c < cfg.cases; ++c) {
      const auto setup = setup_case(pop, k, cfg.seed, c, cfg.distortion);
      if (setup.alternatives.fingers.empty())
        throw PreconditionError("experiment: population needs at least two fingers");
      auto cache = std::make_shared<const MatchCache>(setup.alternatives, setup.pair.trace, cfg.weights, cfg.match);
      const auto& eligible = cache->eligible();
      Rng rng = stream_rng(stream_seed(cfg.seed, 0x5eed), k * 1000003 + c);
      const std::size_t random_alt = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
      RunConfig run = cfg.run;
      run.master_seed = stream_seed(cfg.seed, c);
      for (auto design : cfg.designs) {
        Configuration control;
        std::string control_id;
        if (design == Design::TS) {
          control = setup.pair.control;
          control_id = pop.fingers[setup.source].id;
        } else {
          std::size_t pick = random_alt;
          if (design == Design::CNM) {
            if (eligible.size() < 2)
              throw PreconditionError("experiment: population too small for a close non-match search");
            parallel_for(eligible.size(), [&](std::size_t i) { cache->match(eligible[i]); }, run.workers);
            pick = eligible.front();
            for (auto e : eligible)
              if (cache->match(e).score < cache->match(pick).score) pick = e;
          }
          control = cache->match(pick).config;
          control_id = setup.alternatives.fingers[pick].id;
        }
        FingerprintSimulator sim(control, cache, cfg.distortion, cfg.covariates);
        const Draws d = simulate_draws(sim, cfg.prior, run.n_total, run.master_seed, run.workers);
        for (auto method : cfg.methods) {
          CaseResult r;
          r.design = design;
          r.k = k;
          r.case_id = c;
          r.source = pop.fingers[setup.source].id;
          r.control = control_id;
          r.method = method;
          try {
            const auto res = assign_bf(sim, d, cfg.prior, run, method);
            r.bf_log10 = res.bf_log10;
            r.upper_bound_log10 = res.upper_bound_log10;
          } catch (const NumericalError& e) {
            r.error = e.what();
          }
          out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

// --- kernel training data ------------------------------------------------------------

struct TrainingConfig {
  std::size_t k = 7;
  std::size_t cases = 45;
  std::size_t scores_per_case = 5000;  // split evenly between same and different source
  KernelWeights search_weights{};      // kernel used by the close-match search
  MatchOptions match{};
  DistortionPrior distortion{};
  std::uint64_t seed = 0;
};

/// Component scores for pseudo-marks of the trace's own source (same) and of
/// close matches on other fingers (diff), one training case per trace.
inline std::vector<TrainingCase> make_training_cases(const Population& pop, const TrainingConfig& cfg) {
  require(cfg.cases >= 1 && cfg.scores_per_case >= 2, "training: need cases and at least two scores per case");
  std::vector<TrainingCase> out;
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto setup = setup_case(pop, cfg.k, stream_seed(cfg.seed, 0x7a11), c, cfg.distortion);
    if (setup.alternatives.fingers.empty()) throw PreconditionError("training: population needs two fingers");
    const MatchCache cache(setup.alternatives, setup.pair.trace, cfg.search_weights, cfg.match);
    const std::size_t n_same = cfg.scores_per_case / 2, n = cfg.scores_per_case;
    std::vector<ComponentScores> scores(n);
    const std::uint64_t seed = stream_seed(cfg.seed, c);
    parallel_for(n, [&](std::size_t i) {
      Rng rng = stream_rng(seed, i);
      const Configuration pseudo =
          i < n_same ? generate_m1(setup.pair.control, rng, cfg.distortion)
                     : generate_m2_with(
                           cache.eligible(), rng,
                           [&](std::size_t f) -> const Configuration& { return cache.match(f).config; },
                           cfg.distortion);
      scores[i] = components(cache.trace_summary(), summarize(pseudo, cfg.match.seg_len), cfg.match.kernel);
    });
    TrainingCase tc;
    tc.same.assign(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(n_same));
    tc.diff.assign(scores.begin() + static_cast<std::ptrdiff_t>(n_same), scores.end());
    out.push_back(std::move(tc));
  }
  return out;
}

// --- statistics used by the experiment summaries -----------------------------------

/// Median of the values; -inf counts as smaller than every finite value and
/// NaN entries are dropped.
inline double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  require(!v.empty(), "median of no values");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1], b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return a == b ? a : (std::isinf(a) ? b : a);
  return 0.5 * (a + b);
}

/// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && x[idx[j]] == x[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) r[idx[t]] = rank;
    i = j;
  }
  return r;
}

/// Spearman correlation: Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "spearman: need two equal-length samples");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// --- timing benchmark -----------------------------------------------------------------

struct BenchRow {
  std::size_t k = 0;
  Method method = Method::Empirical;
  std::size_t n = 0;
  std::vector<double> rep_seconds;  // seconds per assignment, one entry per repetition
  double median_seconds = 0.0;
  std::string error;
};

struct BenchConfig {
  std::vector<std::size_t> k_list{5, 10, 15, 20};
  std::vector<Method> methods{Method::Empirical, Method::Logistic};
  std::size_t reps = 3;
  double min_rep_seconds = 0.05;  // calls are repeated until a repetition lasts this long
  RunConfig run{};
  ModelPrior prior{};
  KernelWeights weights{};
  MatchOptions match{};
  DistortionPrior distortion{};
  std::uint64_t seed = 0;
};

namespace detail {

/// Seconds per call of `fn`, averaged over enough calls to fill `min_seconds`.
template <class Fn>
double time_per_call(Fn&& fn, double min_seconds) {
  std::size_t calls = 0;
  const auto t0 = std::chrono::steady_clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++calls;
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } while (elapsed < min_seconds);
  return elapsed / static_cast<double>(calls);
}

}  // namespace detail

/// Times BF assignment on pseudo-data generated beforehand. For every k the
/// control is a random non-source finger's close match (the random-source
/// design), so both models keep draws under the logistic kernel weighting.
inline std::vector<BenchRow> bench(const Population& pop, const BenchConfig& cfg) {
  require(cfg.reps >= 1, "bench: need at least one repetition");
  cfg.run.validate();
  std::vector<BenchRow> out;
  for (auto k : cfg.k_list) {
    const auto setup = setup_case(pop, k, cfg.seed, 0, cfg.distortion);
    auto cache = std::make_shared<const MatchCache>(setup.alternatives, setup.pair.trace, cfg.weights, cfg.match);
    Rng rng = stream_rng(stream_seed(cfg.seed, 0xbe4c), k);
    const auto& eligible = cache->eligible();
    const std::size_t alt = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
    FingerprintSimulator sim(cache->match(alt).config, cache, cfg.distortion, CovariateMode::Summary);
    RunConfig run = cfg.run;
    run.master_seed = stream_seed(cfg.seed, k);
    const Draws d = simulate_draws(sim, cfg.prior, run.n_total, run.master_seed, run.workers);
    const ScoreSample sample = d.sample();
    for (auto method : cfg.methods) {
      BenchRow row;
      row.k = k;
      row.method = method;
      row.n = run.n_total;
      try {
        if (method == Method::Empirical) {
          for (std::size_t r = 0; r < cfg.reps; ++r)
            row.rep_seconds.push_back(detail::time_per_call(
                [&] { (void)empirical_bf(sample, run.m_denominator, cfg.prior); }, cfg.min_rep_seconds));
        } else if (method == Method::DualBeta) {
          for (std::size_t r = 0; r < cfg.reps; ++r)
            row.rep_seconds.push_back(detail::time_per_call(
                [&] { (void)bounded_bf(fit_dual_beta(sample, run.dual_beta), run.p_floor); }, cfg.min_rep_seconds));
        } else {
          const double h = retention_bandwidth(d.scores, run.logistic.retained_fraction);
          const auto data = collect_logistic_data(sim, d, cfg.prior, h, run.master_seed, run.workers);
          for (std::size_t r = 0; r < cfg.reps; ++r)
            row.rep_seconds.push_back(detail::time_per_call(
                [&] { (void)logistic_bf(data, h, cfg.prior, run.logistic); }, cfg.min_rep_seconds));
        }
        row.median_seconds = median(row.rep_seconds);
      } catch (const NumericalError& e) {
        row.error = e.what();
        row.median_seconds = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace rocabc
