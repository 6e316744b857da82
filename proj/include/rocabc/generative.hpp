// Pseudo-mark generation under both models and the synthetic population.
//
// Distortion surrogate: each location p moves by the radial field
//   u(p) = s * (p - c) * (1 + a * cos^2(phi(p) - psi))
// (s pressure scale, c pressure centre, a anisotropy, psi anisotropy axis,
// phi the polar angle of p about c) plus isotropic Gaussian jitter. The
// direction turns with the local rotation of the field,
//   omega = s * a * sin(2 (phi - psi)) / 2,
// plus wrapped Gaussian noise, and the type flips between ending and
// bifurcation with a fixed probability.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rocabc/common.hpp"
#include "rocabc/features.hpp"
#include "rocabc/kernel.hpp"

namespace rocabc {

struct DistortionParams {
  Point pressure_center;
  double pressure_scale = 0.0;
  double pressure_dir = 0.0;
  double anisotropy = 0.0;
  double jitter_sd = 0.0;
  double angle_jitter_sd = 0.0;
  double type_flip_prob = 0.0;

  void validate() const {
    require(std::isfinite(pressure_center.x) && std::isfinite(pressure_center.y) &&
                std::isfinite(pressure_scale) && std::isfinite(pressure_dir),
            "distortion parameters must be finite");
    require(anisotropy >= 0.0, "anisotropy must be non-negative");
    require(jitter_sd >= 0.0 && angle_jitter_sd >= 0.0, "jitter must be non-negative");
    require(type_flip_prob >= 0.0 && type_flip_prob <= 1.0, "type_flip_prob must lie in [0, 1]");
  }
};

/// Prior ranges; every field other than the centre is drawn uniformly.
struct DistortionPrior {
  double center_inflation = 0.2;  // bounding box grown by this fraction
  double scale_min = -0.08, scale_max = 0.08;
  double anisotropy_min = 0.0, anisotropy_max = 0.5;
  double jitter_min = 0.5, jitter_max = 3.0;
  double angle_jitter_min = 0.02, angle_jitter_max = 0.15;
  double type_flip_prob = 0.1;
};

inline DistortionParams sample_distortion_params(const Configuration& config, Rng& rng,
                                                 const DistortionPrior& prior = {}) {
  require(!config.empty(), "sample_distortion_params: empty configuration");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& m : config) {
    x0 = std::min(x0, m.x);
    x1 = std::max(x1, m.x);
    y0 = std::min(y0, m.y);
    y1 = std::max(y1, m.y);
  }
  const double gx = 0.5 * prior.center_inflation * (x1 - x0);
  const double gy = 0.5 * prior.center_inflation * (y1 - y0);
  DistortionParams p;
  p.pressure_center.x = x1 > x0 ? uniform(rng, x0 - gx, x1 + gx) : x0;
  p.pressure_center.y = y1 > y0 ? uniform(rng, y0 - gy, y1 + gy) : y0;
  p.pressure_scale = uniform(rng, prior.scale_min, prior.scale_max);
  p.anisotropy = uniform(rng, prior.anisotropy_min, prior.anisotropy_max);
  p.pressure_dir = uniform(rng, 0.0, kTwoPi);
  p.jitter_sd = uniform(rng, prior.jitter_min, prior.jitter_max);
  p.angle_jitter_sd = uniform(rng, prior.angle_jitter_min, prior.angle_jitter_max);
  p.type_flip_prob = prior.type_flip_prob;
  return p;
}

inline MinutiaType flipped(MinutiaType t) {
  switch (t) {
    case MinutiaType::RidgeEnding: return MinutiaType::Bifurcation;
    case MinutiaType::Bifurcation: return MinutiaType::RidgeEnding;
    case MinutiaType::Unknown: return MinutiaType::Unknown;
  }
  return t;
}

inline Configuration distort(const Configuration& config, const DistortionParams& params, Rng& rng) {
  require(config.size() >= 3, "distort: need at least three minutiae");
  params.validate();
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double s = params.pressure_scale, a = params.anisotropy;
  std::vector<Minutia> out;
  out.reserve(config.size());
  for (const auto& m : config) {
    const double rx = m.x - params.pressure_center.x, ry = m.y - params.pressure_center.y;
    const double phi = std::atan2(ry, rx);
    const double c = std::cos(phi - params.pressure_dir);
    const double gain = s * (1.0 + a * c * c);
    const double omega = 0.5 * s * a * std::sin(2.0 * (phi - params.pressure_dir));
    const double jx = z(rng), jy = z(rng), ja = z(rng);
    const bool flip = u01(rng) < params.type_flip_prob;
    Minutia d;
    d.x = m.x + gain * rx + params.jitter_sd * jx;
    d.y = m.y + gain * ry + params.jitter_sd * jy;
    d.direction = m.direction + omega + params.angle_jitter_sd * ja;
    d.type = flip ? flipped(m.type) : m.type;
    out.push_back(d);
  }
  return Configuration(std::move(out));
}

struct Finger {
  std::string id;
  std::vector<Minutia> minutiae;
};

struct Population {
  std::vector<Finger> fingers;
  std::uint64_t seed = 0;
};

struct FingerOptions {
  double width = 500.0;
  double height = 500.0;
  double d_min = 8.0;
  double wave_amplitude_max = 1.0;  // radians
  double direction_noise_sd = 0.15;
  std::size_t attempts_per_minutia = 2000;
};

/// Rejection-sampled minutiae on a rectangle with a smooth orientation field.
inline Finger synth_finger(Rng& rng, std::size_t n, const FingerOptions& opt = {}) {
  require(n >= 3, "synth_finger: need n >= 3");
  require(opt.width > 0.0 && opt.height > 0.0 && opt.d_min > 0.0, "synth_finger: invalid area");
  // Disks of radius d_min / 2 cannot cover more than about 0.9 of the plane.
  const double disk = std::numbers::pi * 0.25 * opt.d_min * opt.d_min;
  const double padded = (opt.width + opt.d_min) * (opt.height + opt.d_min);
  if (static_cast<double>(n) * disk > 0.9 * padded)
    throw PreconditionError("synth_finger: area too small for " + std::to_string(n) + " minutiae");
  const double base = uniform(rng, 0.0, kTwoPi);
  const double amp = uniform(rng, 0.0, opt.wave_amplitude_max);
  Finger f;
  f.minutiae.reserve(n);
  const std::size_t max_attempts = opt.attempts_per_minutia * n;
  for (std::size_t attempt = 0; f.minutiae.size() < n; ++attempt) {
    if (attempt >= max_attempts)
      throw PreconditionError("synth_finger: could not place " + std::to_string(n) +
                              " minutiae at the minimum separation");
    const double x = uniform(rng, 0.0, opt.width), y = uniform(rng, 0.0, opt.height);
    bool ok = true;
    for (const auto& m : f.minutiae)
      if (std::hypot(m.x - x, m.y - y) < opt.d_min) {
        ok = false;
        break;
      }
    if (!ok) continue;
    double dir = base + amp * std::sin(kTwoPi * x / opt.width) + normal(rng, 0.0, opt.direction_noise_sd);
    if (uniform(rng, 0.0, 1.0) < 0.5) dir += std::numbers::pi;
    const auto type = uniform(rng, 0.0, 1.0) < 0.5 ? MinutiaType::RidgeEnding : MinutiaType::Bifurcation;
    f.minutiae.push_back({x, y, wrap_angle(dir), type});
  }
  return f;
}

inline Population synth_population(std::size_t fingers, std::size_t n_min, std::size_t n_max,
                                   std::uint64_t seed, const FingerOptions& opt = {}) {
  require(fingers >= 1, "synth_population: need at least one finger");
  require(n_min >= 3 && n_min <= n_max, "synth_population: invalid minutiae range");
  Population pop;
  pop.seed = seed;
  pop.fingers.resize(fingers);
  parallel_for(fingers, [&](std::size_t i) {
    Rng rng = stream_rng(seed, i);
    const auto n = std::uniform_int_distribution<std::size_t>(n_min, n_max)(rng);
    auto f = synth_finger(rng, n, opt);
    f.id = "f" + std::to_string(i);
    pop.fingers[i] = std::move(f);
  });
  return pop;
}

// --- close-match search ------------------------------------------------------

struct MatchOptions {
  double seg_len = kDefaultSegmentLength;
  KernelOptions kernel{};
  std::size_t scored_anchors = 8;          // anchors kept for kernel scoring
  std::size_t replacement_candidates = 3;  // nearest unused minutiae tried per slot
  std::size_t max_passes = 100;
};

struct SubconfigMatch {
  std::vector<std::size_t> indices;  // finger minutia paired with trace minutia i
  Configuration config;
  double score = std::numeric_limits<double>::infinity();
};

namespace detail {

inline Configuration gather(const Finger& f, const std::vector<std::size_t>& idx) {
  std::vector<Minutia> ms;
  ms.reserve(idx.size());
  for (auto i : idx) ms.push_back(f.minutiae[i]);
  return Configuration(std::move(ms));
}

/// Kernel score of an ordered finger subset against a fixed trace, using
/// tables of the finger's location and marker distances. Evaluates the same
/// expressions in the same order as delta(trace, summarize(subset)); an
/// undefined summary scores +infinity.
class SubsetScorer {
 public:
  SubsetScorer(const Finger& f, const SummaryVector& trace, const KernelWeights& w, const MatchOptions& opt)
      : f_(f), trace_(trace), w_(w), opt_(opt), n_(f.minutiae.size()) {
    for (double c : w.c) require(std::isfinite(c), "kernel weights must be finite");
    Configuration all(f.minutiae);
    const auto pts = locations(all);
    const auto markers = direction_markers(all, opt.seg_len);
    dist_.resize(n_ * n_);
    marker_dist_.resize(n_ * n_);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b) {
        dist_[a * n_ + b] = distance(pts[std::min(a, b)], pts[std::max(a, b)]);
        marker_dist_[a * n_ + b] = distance(markers[std::min(a, b)], markers[std::max(a, b)]);
      }
  }

  double operator()(const std::vector<std::size_t>& idx) const {
    const std::size_t k = idx.size();
    const auto inf = std::numeric_limits<double>::infinity();
    if (k != trace_.k()) return inf;
    double sx = 0.0, sy = 0.0;
    for (auto i : idx) {
      sx += f_.minutiae[i].x;
      sy += f_.minutiae[i].y;
    }
    const double gx = sx / static_cast<double>(k), gy = sy / static_cast<double>(k);
    // A minutia on the centroid leaves the summary undefined.
    for (auto i : idx)
      if (std::hypot(f_.minutiae[i].x - gx, f_.minutiae[i].y - gy) < 1e-9) return inf;
    double s = 0.0;
    if (w_.c[0] != 0.0) {
      const double d = pair_term(trace_.cross_dists, dist_, idx);
      if (!std::isfinite(d)) return inf;
      s += w_.c[0] * d;
    }
    if (w_.c[1] != 0.0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double d = trace_.centroid_dists[i];
        if (!(d > 0.0)) return inf;
        const auto& m = f_.minutiae[idx[i]];
        const double diff = d - distance({m.x, m.y}, {gx, gy});
        sum += diff * diff / d;
      }
      s += w_.c[1] * std::sqrt(sum);
    }
    if (w_.c[2] != 0.0) {
      const double d = pair_term(trace_.dir_marker_cross_dists, marker_dist_, idx);
      if (!std::isfinite(d)) return inf;
      s += w_.c[2] * d;
    }
    if (w_.c[3] != 0.0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const auto& m = f_.minutiae[idx[i]];
        const double axis = std::atan2(m.y - gy, m.x - gx);
        const double theta_star = wrap_degrees((m.direction - axis) * 180.0 / std::numbers::pi);
        const double theta = trace_.centroid_angles[i];
        sum += angle_term(theta, theta_star, opt_.kernel.wrapped_angle_difference) /
               std::max(theta, opt_.kernel.angle_floor_deg);
      }
      s += w_.c[3] * sum;
    }
    if (w_.c[4] != 0.0) {
      std::size_t matches = 0;
      for (std::size_t i = 0; i < k; ++i) matches += trace_.types[i] == f_.minutiae[idx[i]].type;
      const std::size_t counted = opt_.kernel.count_type_mismatches ? k - matches : matches;
      s += w_.c[4] * std::sqrt(static_cast<double>(counted));
    }
    return s;
  }

 private:
  double pair_term(const std::vector<double>& d, const std::vector<double>& table,
                   const std::vector<std::size_t>& idx) const {
    const std::size_t k = idx.size();
    double sum = 0.0;
    std::size_t p = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j, ++p) {
        if (!(d[p] > 0.0)) return std::numeric_limits<double>::infinity();
        const double diff = d[p] - table[idx[i] * n_ + idx[j]];
        sum += diff * diff / d[p];
      }
    return std::sqrt(sum);
  }

  const Finger& f_;
  const SummaryVector& trace_;
  KernelWeights w_;
  MatchOptions opt_;
  std::size_t n_;
  std::vector<double> dist_;
  std::vector<double> marker_dist_;
};

}  // namespace detail

/// Seed-and-extend search for the ordered k-subset of `finger` closest to the
/// trace under the kernel. Every (trace, finger) anchor pair fixes a rigid
/// alignment; the remaining trace minutiae, nearest to the anchor first, take
/// the nearest unused finger minutia. The anchors with the smallest squared
/// location residual are scored with the kernel, and the best is improved by
/// pairwise swaps and by replacing a slot with a nearby unused minutia until
/// neither helps.
inline SubconfigMatch match_subconfig(const Finger& finger, const Configuration& trace,
                                      const SummaryVector& trace_summary, const KernelWeights& w,
                                      const MatchOptions& opt = {}) {
  const std::size_t k = trace.size(), n = finger.minutiae.size();
  require(k >= 3, "best_matching_subconfig: trace needs at least three minutiae");
  if (n < k)
    throw PreconditionError("best_matching_subconfig: finger " + finger.id + " has " + std::to_string(n) +
                            " minutiae, fewer than k = " + std::to_string(k));
  const auto& fm = finger.minutiae;

  const detail::SubsetScorer scorer(finger, trace_summary, w, opt);
  auto score = [&](const std::vector<std::size_t>& idx) { return scorer(idx); };

  // Trace minutiae ordered by distance from each anchor.
  std::vector<std::vector<std::size_t>> order(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& o = order[i];
    for (std::size_t r = 0; r < k; ++r)
      if (r != i) o.push_back(r);
    std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) {
      return distance(trace[a].location(), trace[i].location()) <
             distance(trace[b].location(), trace[i].location());
    });
  }

  struct Candidate {
    double residual;
    std::vector<std::size_t> idx;
  };
  const std::size_t keep = std::max<std::size_t>(1, opt.scored_anchors);
  std::vector<Candidate> best;  // sorted by residual, at most `keep`
  std::vector<std::size_t> idx(k);
  std::vector<char> used(n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = fm[j].direction - trace[i].direction;
      const double ct = std::cos(theta), st = std::sin(theta);
      const double bound = best.size() == keep ? best.back().residual
                                               : std::numeric_limits<double>::infinity();
      std::fill(used.begin(), used.end(), 0);
      used[j] = 1;
      idx[i] = j;
      double residual = 0.0;
      bool pruned = false;
      for (auto r : order[i]) {
        const double dx = trace[r].x - trace[i].x, dy = trace[r].y - trace[i].y;
        const double qx = fm[j].x + ct * dx - st * dy, qy = fm[j].y + st * dx + ct * dy;
        double nearest = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t c = 0; c < n; ++c) {
          if (used[c]) continue;
          const double ex = fm[c].x - qx, ey = fm[c].y - qy;
          const double d2 = ex * ex + ey * ey;
          if (d2 < nearest) {
            nearest = d2;
            pick = c;
          }
        }
        used[pick] = 1;
        idx[r] = pick;
        residual += nearest;
        if (residual >= bound) {
          pruned = true;
          break;
        }
      }
      if (pruned) continue;
      Candidate cand{residual, idx};
      auto pos = std::upper_bound(best.begin(), best.end(), residual,
                                  [](double v, const Candidate& c) { return v < c.residual; });
      best.insert(pos, std::move(cand));
      if (best.size() > keep) best.pop_back();
    }
  }

  SubconfigMatch out;
  for (const auto& c : best) {
    const double s = score(c.idx);
    if (s < out.score || out.indices.empty()) {
      out.score = s;
      out.indices = c.idx;
    }
  }

  // Unused finger minutiae nearest to each finger minutia.
  std::vector<std::vector<std::size_t>> near(n);
  for (std::size_t a = 0; a < n; ++a) {
    auto& v = near[a];
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) v.push_back(b);
    std::stable_sort(v.begin(), v.end(), [&](auto p, auto q) {
      return distance(fm[p].location(), fm[a].location()) < distance(fm[q].location(), fm[a].location());
    });
  }

  auto& cur = out.indices;
  for (std::size_t pass = 0; pass < opt.max_passes; ++pass) {
    bool improved = false;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        std::swap(cur[a], cur[b]);
        const double s = score(cur);
        if (s < out.score) {
          out.score = s;
          improved = true;
        } else {
          std::swap(cur[a], cur[b]);
        }
      }
    }
    std::fill(used.begin(), used.end(), 0);
    for (auto c : cur) used[c] = 1;
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t tried = 0;
      for (auto cand : near[cur[a]]) {
        if (tried >= opt.replacement_candidates) break;
        if (used[cand]) continue;
        ++tried;
        const std::size_t old = cur[a];
        cur[a] = cand;
        const double s = score(cur);
        if (s < out.score) {
          out.score = s;
          used[old] = 0;
          used[cand] = 1;
          improved = true;
          break;
        }
        cur[a] = old;
      }
    }
    if (!improved) break;
  }
  out.config = detail::gather(finger, out.indices);
  return out;
}

inline Configuration best_matching_subconfig(const Finger& finger, const Configuration& trace,
                                             const KernelWeights& w = {}, const MatchOptions& opt = {}) {
  return match_subconfig(finger, trace, summarize(trace, opt.seg_len), w, opt).config;
}

// --- pseudo-mark generators --------------------------------------------------

inline Configuration generate_m1(const Configuration& control, Rng& rng, const DistortionPrior& prior = {}) {
  const auto params = sample_distortion_params(control, rng, prior);
  return distort(control, params, rng);
}

/// Indices of fingers with at least k minutiae.
inline std::vector<std::size_t> eligible_fingers(const Population& pop, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pop.fingers.size(); ++i)
    if (pop.fingers[i].minutiae.size() >= k) out.push_back(i);
  if (out.empty())
    throw PreconditionError("population has no finger with at least " + std::to_string(k) + " minutiae");
  return out;
}

/// Draws a finger uniformly from `eligible`, asks `match(finger_index)` for
/// its close-match subconfiguration and distorts it with fresh parameters.
template <class MatchFn>
Configuration generate_m2_with(const std::vector<std::size_t>& eligible, Rng& rng, MatchFn&& match,
                               const DistortionPrior& prior = {}, std::size_t* chosen = nullptr) {
  const std::size_t pick =
      eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
  if (chosen) *chosen = pick;
  const Configuration& sub = match(pick);
  const auto params = sample_distortion_params(sub, rng, prior);
  return distort(sub, params, rng);
}

inline Configuration generate_m2(const Population& pop, const Configuration& trace, const KernelWeights& w,
                                 Rng& rng, const MatchOptions& opt = {}, const DistortionPrior& prior = {},
                                 std::size_t* chosen = nullptr) {
  const auto eligible = eligible_fingers(pop, trace.size());
  const auto summary = summarize(trace, opt.seg_len);
  Configuration sub;
  return generate_m2_with(
      eligible, rng,
      [&](std::size_t i) -> const Configuration& {
        sub = match_subconfig(pop.fingers[i], trace, summary, w, opt).config;
        return sub;
      },
      prior, chosen);
}

// --- traces --------------------------------------------------------------------

struct TracePair {
  Configuration trace;    // distorted, rigidly moved impression
  Configuration control;  // the same minutiae on the source finger, index-aligned
  std::vector<std::size_t> indices;
};

/// Picks a seed minutia and its k - 1 nearest neighbours on `finger`. The
/// control holds them in order of distance from the seed; the trace is a
/// distorted copy under a random rotation about the centroid.
inline TracePair sample_trace(const Finger& finger, std::size_t k, Rng& rng,
                              const DistortionPrior& prior = {}) {
  require(k >= 3, "sample_trace: need k >= 3");
  const auto& fm = finger.minutiae;
  if (fm.size() < k)
    throw PreconditionError("sample_trace: k = " + std::to_string(k) + " exceeds the " +
                            std::to_string(fm.size()) + " minutiae of finger " + finger.id);
  const std::size_t seed = std::uniform_int_distribution<std::size_t>(0, fm.size() - 1)(rng);
  std::vector<std::size_t> idx(fm.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return distance(fm[a].location(), fm[seed].location()) < distance(fm[b].location(), fm[seed].location());
  });
  idx.resize(k);
  TracePair out;
  out.indices = idx;
  out.control = detail::gather(finger, idx);
  const auto distorted = generate_m1(out.control, rng, prior);
  const Point g = centroid(distorted);
  const double angle = uniform(rng, 0.0, kTwoPi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  out.trace = rigid_transform(distorted, angle, g.x - (ca * g.x - sa * g.y), g.y - (sa * g.x + ca * g.y));
  return out;
}

}  // namespace rocabc
