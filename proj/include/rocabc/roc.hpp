// Empirical ROC machinery, the fixed-denominator empirical Bayes factor and
// the dual non-central-beta ROC model.
//
// Scores are dissimilarities: small scores favour model 1. F is the score
// distribution under model 1, G under model 2, and ROC(p) = F(G^-1(p)).
// The Bayes factor is the limit of ROC(p)/p as p -> 0+.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "rocabc/common.hpp"
#include "rocabc/ncbeta.hpp"
#include "rocabc/nelder_mead.hpp"

namespace rocabc {

struct ModelPrior {
  double pi1 = 0.5;
  double pi2 = 0.5;

  void validate() const {
    require(pi1 > 0.0 && pi2 > 0.0 && std::abs(pi1 + pi2 - 1.0) < 1e-12,
            "model prior must be positive and sum to one");
  }
  /// pi(M=2) / pi(M=1)
  double odds_21() const { return pi2 / pi1; }
};

struct ScoreSample {
  std::vector<double> f_scores;  // model 1
  std::vector<double> g_scores;  // model 2

  std::size_t K() const { return f_scores.size(); }
  std::size_t L() const { return g_scores.size(); }
};

struct RocPoint {
  double p = 0.0;
  double tpr = 0.0;
};

inline double empirical_cdf(std::span<const double> scores, double t) {
  require(!scores.empty(), "empirical_cdf: empty sample");
  const auto n = std::count_if(scores.begin(), scores.end(), [t](double s) { return s <= t; });
  return static_cast<double>(n) / static_cast<double>(scores.size());
}

/// Step-function ROC with one point per distinct model-2 score, plus (0,0)
/// and (1,1).
inline std::vector<RocPoint> empirical_roc(const ScoreSample& s) {
  require(s.K() > 0 && s.L() > 0, "empirical_roc: both score lists must be non-empty");
  std::vector<double> f = s.f_scores, g = s.g_scores;
  std::sort(f.begin(), f.end());
  std::sort(g.begin(), g.end());
  const double K = static_cast<double>(f.size()), L = static_cast<double>(g.size());
  std::vector<RocPoint> out;
  out.push_back({0.0, 0.0});
  std::size_t fi = 0;
  for (std::size_t gi = 0; gi < g.size();) {
    const double t = g[gi];
    while (gi < g.size() && g[gi] == t) ++gi;
    while (fi < f.size() && f[fi] <= t) ++fi;
    out.push_back({static_cast<double>(gi) / L, static_cast<double>(fi) / K});
  }
  if (out.back().tpr < 1.0) out.push_back({1.0, 1.0});
  return out;
}

/// Value of the step ROC at p: the tpr of the first point with point.p >= p.
inline double roc_at(std::span<const RocPoint> roc, double p) {
  if (p <= 0.0) return 0.0;
  auto it = std::lower_bound(roc.begin(), roc.end(), p,
                             [](const RocPoint& r, double v) { return r.p < v; });
  if (it == roc.end()) return 1.0;
  return it->tpr;
}

struct EmpiricalBf {
  double bf = 0.0;
  double bf_log10 = -std::numeric_limits<double>::infinity();
  double p_used = 0.0;
  double t_used = 0.0;
  std::size_t accepted_f = 0;    // model-1 scores <= t_used
  double posterior_odds = 0.0;   // ABC posterior odds under the nominal prior
  double upper_bound_log10 = 0.0;  // log10(1 / (K p_used)), reported when bf == 0
};

/// Empirical ROC Bayes factor with the model-2 acceptance count fixed at m.
///
/// t is the m-th smallest model-2 score, p = m / L and the numerator is the
/// fraction of model-1 scores at or below t (ties counted). The rates are
/// per-model, so the ABC posterior odds under the nominal prior are
/// (F(t) pi1) / (p pi2); dividing by the prior odds leaves F(t) / p.
inline EmpiricalBf empirical_bf(const ScoreSample& s, std::size_t m, const ModelPrior& prior = {}) {
  prior.validate();
  require(s.K() > 0, "empirical_bf: no model-1 scores");
  require(m >= 1 && m <= s.L(), "empirical_bf: need 1 <= m <= L");
  std::vector<double> g = s.g_scores;
  std::nth_element(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(m - 1), g.end());
  EmpiricalBf r;
  r.t_used = g[m - 1];
  r.p_used = static_cast<double>(m) / static_cast<double>(s.L());
  r.accepted_f = static_cast<std::size_t>(std::count_if(
      s.f_scores.begin(), s.f_scores.end(), [t = r.t_used](double v) { return v <= t; }));
  const double rate = static_cast<double>(r.accepted_f) / static_cast<double>(s.K());
  r.posterior_odds = (rate * prior.pi1) / (r.p_used * prior.pi2);
  // Counts first so that the bound K L / (K m) comes out exact.
  r.bf = (static_cast<double>(r.accepted_f) * static_cast<double>(s.L())) /
         (static_cast<double>(s.K()) * static_cast<double>(m));
  r.bf_log10 = r.accepted_f == 0 ? -std::numeric_limits<double>::infinity()
                                 : std::log10(rate) - std::log10(r.p_used);
  r.upper_bound_log10 = -std::log10(static_cast<double>(s.K()) * r.p_used);
  return r;
}

// --- dual non-central beta model -------------------------------------------

/// ROC model parameters; both first shape parameters are fixed at 1.
struct DualBetaParams {
  double beta_f = 1.0;
  double lambda_f = 0.0;
  double beta_g = 1.0;
  double lambda_g = 0.0;

  void validate() const {
    require(beta_f > 0.0 && beta_g > 0.0 && lambda_f >= 0.0 && lambda_g >= 0.0,
            "dual beta parameters out of range");
  }
};

class DualBetaRoc {
 public:
  explicit DualBetaRoc(const DualBetaParams& p)
      : params_(p), f_(p.beta_f, p.lambda_f), g_(p.beta_g, p.lambda_g) {}

  const ncbeta::Distribution& f() const { return f_; }
  const ncbeta::Distribution& g() const { return g_; }

  double operator()(double p) const {
    require(p >= 0.0 && p <= 1.0, "ROC model: p outside [0, 1]");
    return f_.cdf(g_.quantile(p));
  }

  /// ROC at increasing p values, warm-starting each quantile from the last.
  std::vector<double> on_grid(std::span<const double> ps) const {
    std::vector<double> out(ps.size());
    double hint = -1.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double t = g_.quantile(ps[i], hint);
      hint = t;
      out[i] = f_.cdf(t);
    }
    return out;
  }

 private:
  DualBetaParams params_;
  ncbeta::Distribution f_;
  ncbeta::Distribution g_;
};

inline double roc_model_eval(const DualBetaParams& params, double p) {
  params.validate();
  return DualBetaRoc(params)(p);
}

/// Closed-form limit of ROC(p)/p at the origin: the density ratio f(0)/g(0).
inline double limit_slope(const DualBetaParams& p) {
  p.validate();
  return (p.beta_f / p.beta_g) * std::exp(0.5 * (p.lambda_g - p.lambda_f));
}

inline double limit_slope_log10(const DualBetaParams& p) {
  p.validate();
  return std::log10(p.beta_f / p.beta_g) + 0.5 * (p.lambda_g - p.lambda_f) / std::log(10.0);
}

/// (ROC(p_floor) / p_floor): the model Bayes factor with p bounded below.
inline double bounded_bf(const DualBetaParams& params, double p_floor) {
  require(p_floor > 0.0 && p_floor <= 1.0, "bounded_bf: p_floor must lie in (0, 1]");
  return roc_model_eval(params, p_floor) / p_floor;
}

struct DualBetaFitOptions {
  std::size_t min_per_side = 50;
  // The likelihood step uses at most this many evenly spaced order
  // statistics per side.
  std::size_t max_points_per_side = 20000;
  std::size_t grid_points = 1000;
  double beta_min = 1e-3;
  double beta_max = 1e3;
  double lambda_max = 200.0;
  NelderMeadOptions mle_simplex{400, 1e-10, 1e-7};
  NelderMeadOptions l2_simplex{600, 1e-12, 1e-7};
};

namespace detail {

/// Hazen plotting positions (rank - 1/2) / N of the pooled sample; ties share
/// their mid-rank.
inline std::pair<std::vector<double>, std::vector<double>> pooled_pit(const ScoreSample& s) {
  struct Tagged {
    double v;
    std::size_t idx;  // < K: model 1
  };
  const std::size_t K = s.K(), N = s.K() + s.L();
  std::vector<Tagged> all;
  all.reserve(N);
  for (std::size_t i = 0; i < K; ++i) all.push_back({s.f_scores[i], i});
  for (std::size_t i = 0; i < s.L(); ++i) all.push_back({s.g_scores[i], K + i});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.v < b.v || (a.v == b.v && a.idx < b.idx);
  });
  std::vector<double> u(K), v(s.L());
  for (std::size_t i = 0; i < N;) {
    std::size_t j = i;
    while (j < N && all[j].v == all[i].v) ++j;
    const double pos = (0.5 * static_cast<double>(i + j + 1) - 0.5) / static_cast<double>(N);
    for (std::size_t q = i; q < j; ++q) {
      if (all[q].idx < K) u[all[q].idx] = pos;
      else v[all[q].idx - K] = pos;
    }
    i = j;
  }
  return {std::move(u), std::move(v)};
}

inline std::vector<double> thin_sorted(std::vector<double> x, std::size_t cap) {
  std::sort(x.begin(), x.end());
  if (x.size() <= cap) return x;
  std::vector<double> out(cap);
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < cap; ++i) {
    const auto idx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * n / static_cast<double>(cap));
    out[i] = x[std::min(idx, x.size() - 1)];
  }
  return out;
}

inline bool has_spread(std::span<const double> x) {
  return std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); });
}

struct SideFit {
  double beta;
  double lambda;
  double nll;
};

// Parameterisation: beta = exp(a), lambda = b^2.
inline SideFit fit_side(std::span<const double> u, const DualBetaFitOptions& opt) {
  double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  mean = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  auto nll = [&](const std::vector<double>& x) {
    const double beta = std::exp(x[0]), lambda = x[1] * x[1];
    if (!(beta >= opt.beta_min && beta <= opt.beta_max && lambda <= opt.lambda_max))
      return std::numeric_limits<double>::infinity();
    const ncbeta::Distribution d(beta, lambda);
    double s = 0.0;
    for (double t : u) {
      const double v = d.pdf(t);
      if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
      s -= std::log(v);
    }
    return s;
  };
  SideFit best{1.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double lambda0 : {0.0, 2.0, 8.0}) {
    // Mean of Beta(1 + J, beta) with J ~ Poisson(lambda/2) is about
    // (1 + lambda/2) / (1 + lambda/2 + beta).
    const double beta0 =
        std::clamp((1.0 + 0.5 * lambda0) * (1.0 / mean - 1.0), opt.beta_min * 10, opt.beta_max / 10);
    const auto r = nelder_mead(nll, {std::log(beta0), std::sqrt(lambda0)}, {0.3, 0.7}, opt.mle_simplex);
    if (r.fx < best.nll) best = {std::exp(r.x[0]), r.x[1] * r.x[1], r.fx};
  }
  if (!std::isfinite(best.nll)) throw NumericalError("fit_mle: likelihood could not be evaluated");
  return best;
}

inline std::vector<double> uniform_grid(std::size_t n) {
  std::vector<double> ps(n);
  for (std::size_t i = 0; i < n; ++i) ps[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return ps;
}

}  // namespace detail

/// Step one of the ROC fit: maximum likelihood on pooled-PIT scores.
///
/// Scores are mapped through the pooled empirical CDF so that both samples
/// live in (0, 1); the ROC is unchanged by this monotone map. The likelihood
/// is separable, so each side is fitted on its own.
inline DualBetaParams fit_mle(const ScoreSample& s, const DualBetaFitOptions& opt = {}) {
  require(s.K() >= opt.min_per_side && s.L() >= opt.min_per_side,
          "fit_mle: need at least " + std::to_string(opt.min_per_side) + " scores per side");
  if (!detail::has_spread(s.f_scores) || !detail::has_spread(s.g_scores))
    throw NumericalError("fit_mle: degenerate sample with zero variance");
  auto [u, v] = detail::pooled_pit(s);
  const auto uf = detail::thin_sorted(std::move(u), opt.max_points_per_side);
  const auto ug = detail::thin_sorted(std::move(v), opt.max_points_per_side);
  const auto f = detail::fit_side(uf, opt);
  const auto g = detail::fit_side(ug, opt);
  return {f.beta, f.lambda, g.beta, g.lambda};
}

/// Sum over a uniform p grid of the squared gap between model and empirical ROC.
inline double l2_objective(const DualBetaParams& params, std::span<const double> grid,
                           std::span<const double> empirical) {
  const auto model = DualBetaRoc(params).on_grid(grid);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = model[i] - empirical[i];
    s += d * d;
  }
  return s;
}

/// Step two: derivative-free L2 refinement against the empirical ROC.
/// Never returns parameters worse than params0.
inline DualBetaParams refine_l2(const DualBetaParams& params0, std::span<const RocPoint> emp,
                                const DualBetaFitOptions& opt = {}) {
  params0.validate();
  require(!emp.empty(), "refine_l2: empty empirical ROC");
  const auto grid = detail::uniform_grid(opt.grid_points);
  std::vector<double> target(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) target[i] = roc_at(emp, grid[i]);

  auto to_params = [&](const std::vector<double>& x) {
    return DualBetaParams{std::exp(x[0]), x[1] * x[1], std::exp(x[2]), x[3] * x[3]};
  };
  auto objective = [&](const std::vector<double>& x) {
    const auto p = to_params(x);
    if (!(p.beta_f >= opt.beta_min && p.beta_f <= opt.beta_max && p.beta_g >= opt.beta_min &&
          p.beta_g <= opt.beta_max && p.lambda_f <= opt.lambda_max && p.lambda_g <= opt.lambda_max))
      return std::numeric_limits<double>::infinity();
    return l2_objective(p, grid, target);
  };
  const std::vector<double> x0{std::log(params0.beta_f), std::sqrt(params0.lambda_f),
                               std::log(params0.beta_g), std::sqrt(params0.lambda_g)};
  const double f0 = l2_objective(params0, grid, target);
  const auto r = nelder_mead(objective, x0, {0.2, 0.5, 0.2, 0.5}, opt.l2_simplex);
  return r.fx < f0 ? to_params(r.x) : params0;
}

/// Largest gap between model and empirical ROC on the refinement grid.
inline double sup_distance(const DualBetaParams& params, std::span<const RocPoint> emp,
                           std::size_t grid_points = 1000) {
  const auto grid = detail::uniform_grid(grid_points);
  const auto model = DualBetaRoc(params).on_grid(grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(model[i] - roc_at(emp, grid[i])));
  return worst;
}

/// Both fitting steps.
inline DualBetaParams fit_dual_beta(const ScoreSample& s, const DualBetaFitOptions& opt = {}) {
  const auto p0 = fit_mle(s, opt);
  const auto emp = empirical_roc(s);
  return refine_l2(p0, emp, opt);
}

}  // namespace rocabc
