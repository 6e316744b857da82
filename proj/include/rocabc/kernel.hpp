// Dissimilarity kernel between two summarised configurations and the
// AUC-driven search for its component weights.
//
// The kernel is a linear combination c1*D1 + ... + c5*D5 of
//   D1  normalised difference of location cross-distances
//   D2  normalised difference of centroid distances
//   D3  normalised difference of direction-marker cross-distances
//   D4  normalised difference of centroid angles (degrees)
//   D5  square root of the number of type matches
// Every normaliser comes from the FIRST argument, so the kernel is not
// symmetric; callers pass the observed trace first.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "rocabc/common.hpp"
#include "rocabc/features.hpp"
#include "rocabc/nelder_mead.hpp"

namespace rocabc {

struct KernelWeights {
  std::array<double, 5> c{1.0, 0.0, 6.5, 0.1, 0.0};
  friend bool operator==(const KernelWeights&, const KernelWeights&) = default;
};

struct KernelOptions {
  // D4: use min(|a-b|, 360-|a-b|) instead of the printed second branch.
  bool wrapped_angle_difference = false;
  // D5: count type mismatches instead of matches.
  bool count_type_mismatches = false;
  // D4 normaliser floor, degrees.
  double angle_floor_deg = 1.0;
};

using ComponentScores = std::array<double, 5>;

namespace detail {

inline double normalised_root_sum(std::span<const double> d, std::span<const double> d_star,
                                  const char* name) {
  if (d.size() != d_star.size()) throw PreconditionError(std::string(name) + ": length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw PreconditionError(std::string(name) + ": zero normaliser");
    const double diff = d[i] - d_star[i];
    sum += diff * diff / d[i];
  }
  return std::sqrt(sum);
}

}  // namespace detail

inline double delta1(const SummaryVector& su, const SummaryVector& sv) {
  return detail::normalised_root_sum(su.cross_dists, sv.cross_dists, "delta1");
}

inline double delta2(const SummaryVector& su, const SummaryVector& sv) {
  return detail::normalised_root_sum(su.centroid_dists, sv.centroid_dists, "delta2");
}

inline double delta3(const SummaryVector& su, const SummaryVector& sv) {
  return detail::normalised_root_sum(su.dir_marker_cross_dists, sv.dir_marker_cross_dists, "delta3");
}

/// Least non-negative residue.
inline double positive_mod(double a, double m) {
  double r = std::fmod(a, m);
  if (r < 0.0) r += m;
  return r;
}

/// One term of D4 before normalisation.
inline double angle_term(double theta, double theta_star, bool wrapped) {
  const double diff = std::abs(theta - theta_star);
  if (diff <= 180.0) return diff;
  return wrapped ? 360.0 - diff : positive_mod(180.0 - diff, 180.0);
}

inline double delta4(const SummaryVector& su, const SummaryVector& sv, const KernelOptions& opt = {}) {
  const auto& a = su.centroid_angles;
  const auto& b = sv.centroid_angles;
  require(a.size() == b.size(), "delta4: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(std::isfinite(a[i]) && a[i] >= 0.0, "delta4: angles must lie in [0, 360)");
    sum += angle_term(a[i], b[i], opt.wrapped_angle_difference) / std::max(a[i], opt.angle_floor_deg);
  }
  return sum;
}

inline double delta5(const SummaryVector& su, const SummaryVector& sv, const KernelOptions& opt = {}) {
  require(su.types.size() == sv.types.size(), "delta5: length mismatch");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < su.types.size(); ++i) matches += su.types[i] == sv.types[i];
  const std::size_t counted = opt.count_type_mismatches ? su.types.size() - matches : matches;
  return std::sqrt(static_cast<double>(counted));
}

inline ComponentScores components(const SummaryVector& su, const SummaryVector& sv,
                                  const KernelOptions& opt = {}) {
  return {delta1(su, sv), delta2(su, sv), delta3(su, sv), delta4(su, sv, opt), delta5(su, sv, opt)};
}

inline double combine(const ComponentScores& d, const KernelWeights& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i) s += w.c[i] * d[i];
  return s;
}

/// Weighted kernel score. Components with a zero weight are not evaluated.
inline double delta(const SummaryVector& su, const SummaryVector& sv, const KernelWeights& w = {},
                    const KernelOptions& opt = {}) {
  for (double c : w.c) require(std::isfinite(c), "kernel weights must be finite");
  double s = 0.0;
  if (w.c[0] != 0.0) s += w.c[0] * delta1(su, sv);
  if (w.c[1] != 0.0) s += w.c[1] * delta2(su, sv);
  if (w.c[2] != 0.0) s += w.c[2] * delta3(su, sv);
  if (w.c[3] != 0.0) s += w.c[3] * delta4(su, sv, opt);
  if (w.c[4] != 0.0) s += w.c[4] * delta5(su, sv, opt);
  return s;
}

/// Mann-Whitney estimate of P(same < diff) + P(same == diff) / 2.
inline double auc(std::span<const double> same, std::span<const double> diff) {
  require(!same.empty() && !diff.empty(), "auc: both score lists must be non-empty");
  struct Tagged {
    double v;
    bool is_diff;
  };
  std::vector<Tagged> all;
  all.reserve(same.size() + diff.size());
  for (double v : same) all.push_back({v, false});
  for (double v : diff) all.push_back({v, true});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.v < b.v; });
  double rank_sum_diff = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t n_diff = 0;
    while (j < all.size() && all[j].v == all[i].v) n_diff += all[j++].is_diff;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum_diff += mid_rank * static_cast<double>(n_diff);
    i = j;
  }
  const double nd = static_cast<double>(diff.size()), ns = static_cast<double>(same.size());
  return (rank_sum_diff - nd * (nd + 1.0) / 2.0) / (nd * ns);
}

/// Per-case component scores for pseudo-marks from the true source (same)
/// and from other fingers (diff).
struct TrainingCase {
  std::vector<ComponentScores> same;
  std::vector<ComponentScores> diff;
};

inline double case_auc(const TrainingCase& tc, const KernelWeights& w) {
  std::vector<double> s, d;
  s.reserve(tc.same.size());
  d.reserve(tc.diff.size());
  for (const auto& c : tc.same) s.push_back(combine(c, w));
  for (const auto& c : tc.diff) d.push_back(combine(c, w));
  return auc(s, d);
}

inline double mean_auc(std::span<const TrainingCase> cases, const KernelWeights& w) {
  double sum = 0.0;
  for (const auto& tc : cases) sum += case_auc(tc, w);
  return sum / static_cast<double>(cases.size());
}

struct WeightOptimizerOptions {
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  double start_scale = 10.0;  // random starts draw each c_i from U(0, start_scale)
  NelderMeadOptions simplex{600, 1e-12, 1e-6};
};

struct WeightFit {
  KernelWeights weights;
  double mean_auc = 0.0;
  double default_mean_auc = 0.0;
};

/// Maximises the mean AUC across training cases with multi-start Nelder-Mead.
/// The default weights are always one of the starts. The result is rescaled
/// so that |c1| = 1 whenever c1 is non-zero.
inline WeightFit optimize_weights(std::span<const TrainingCase> cases,
                                  const WeightOptimizerOptions& opt = {}) {
  require(!cases.empty(), "optimize_weights: no training cases");
  bool varies = false;
  std::array<double, 5> first{};
  bool have_first = false;
  for (const auto& tc : cases) {
    require(!tc.same.empty() && !tc.diff.empty(), "optimize_weights: empty training case");
    for (const auto* side : {&tc.same, &tc.diff}) {
      for (const auto& c : *side) {
        if (!have_first) {
          first = c;
          have_first = true;
        } else if (c != first) {
          varies = true;
        }
      }
    }
  }
  if (!varies) throw PreconditionError("optimize_weights: degenerate training, all scores equal");

  std::vector<std::vector<double>> starts;
  const KernelWeights defaults{};
  starts.emplace_back(defaults.c.begin(), defaults.c.end());
  Rng rng(stream_seed(opt.seed, 0x77));
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    std::vector<double> x(5);
    for (auto& v : x) v = uniform(rng, 0.0, opt.start_scale);
    starts.push_back(std::move(x));
  }

  auto objective = [&](const std::vector<double>& x) {
    KernelWeights w;
    std::copy(x.begin(), x.end(), w.c.begin());
    return -mean_auc(cases, w);
  };

  std::vector<NelderMeadResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    std::vector<double> step(5);
    for (std::size_t d = 0; d < 5; ++d) step[d] = 0.5 * std::max(1.0, std::abs(starts[i][d]));
    results[i] = nelder_mead(objective, starts[i], step, opt.simplex);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].fx < results[best].fx) best = i;

  WeightFit fit;
  std::copy(results[best].x.begin(), results[best].x.end(), fit.weights.c.begin());
  if (std::abs(fit.weights.c[0]) > 1e-12) {
    const double s = std::abs(fit.weights.c[0]);
    for (auto& c : fit.weights.c) c /= s;
  }
  fit.mean_auc = mean_auc(cases, fit.weights);
  fit.default_mean_auc = mean_auc(cases, defaults);
  return fit;
}

}  // namespace rocabc
