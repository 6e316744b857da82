// Weighted logistic-regression ABC model choice, used as the comparison
// baseline for the ROC methods.
//
// Pseudo-draws are weighted with an Epanechnikov kernel on their kernel
// score, a logistic model of the model index is fitted to the covariates by
// IRLS, and the class-1 probability is predicted at the observed point. The
// covariates are |eta(observed) - eta(pseudo)|, so the observed point is the
// zero vector and the prediction is the fitted intercept.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rocabc/common.hpp"
#include "rocabc/roc.hpp"

namespace rocabc {

inline std::vector<double> epanechnikov_weights(std::span<const double> dists, double bandwidth) {
  require(bandwidth > 0.0, "epanechnikov_weights: bandwidth must be positive");
  std::vector<double> w(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const double r = dists[i] / bandwidth;
    w[i] = std::max(0.0, 1.0 - r * r);
  }
  return w;
}

/// Score quantile used as the kernel bandwidth.
inline double retention_bandwidth(std::span<const double> scores, double retained_fraction) {
  require(!scores.empty(), "retention_bandwidth: no scores");
  require(retained_fraction > 0.0 && retained_fraction <= 1.0,
          "retained fraction must lie in (0, 1]");
  std::vector<double> s(scores.begin(), scores.end());
  const double pos = std::ceil(retained_fraction * static_cast<double>(s.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(pos - 1.0, 0.0, static_cast<double>(s.size() - 1)));
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(idx), s.end());
  return s[idx];
}

struct LogisticOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-8;     // max absolute coefficient change
  double ridge = 1e-8;         // relative to the total weight, on scaled slopes only
};

struct LogisticFit {
  Eigen::VectorXd coefficients;  // intercept first
  double bandwidth = 0.0;
  double retained_fraction = 1.0;
  double clamp_eps = 1e-12;
  bool separated = false;
  bool converged = false;
  std::size_t iterations = 0;

  double predict(const Eigen::VectorXd& x) const {
    const double eta = coefficients[0] + coefficients.tail(coefficients.size() - 1).dot(x);
    return 1.0 / (1.0 + std::exp(-eta));
  }
};

/// Weighted maximum likelihood by iteratively reweighted least squares.
/// `labels` holds model indices (1 or 2); the modelled event is model 1.
/// Columns are rescaled to unit weighted RMS internally (zero stays zero).
inline LogisticFit fit_weighted_logistic(const Eigen::MatrixXd& covariates, std::span<const int> labels,
                                         std::span<const double> weights, const LogisticOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(covariates.rows());
  const auto d = static_cast<Eigen::Index>(covariates.cols());
  require(labels.size() == n && weights.size() == n, "fit_weighted_logistic: size mismatch");
  double w1 = 0.0, w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(weights[i] >= 0.0 && std::isfinite(weights[i]), "weights must be non-negative");
    require(labels[i] == 1 || labels[i] == 2, "labels must be model indices 1 or 2");
    (labels[i] == 1 ? w1 : w2) += weights[i];
  }
  if (!(w1 > 0.0 && w2 > 0.0))
    throw NumericalError("fit_weighted_logistic: a model has no weight left after kernel weighting");

  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = labels[i] == 1 ? 1.0 : 0.0;

  Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  const double wsum = w1 + w2;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double rms = std::sqrt((w.array() * covariates.col(j).array().square()).sum() / wsum);
    if (rms > 0.0) scale[j] = rms;
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), d + 1);
  X.col(0).setOnes();
  X.rightCols(d) = covariates * scale.cwiseInverse().asDiagonal();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  beta[0] = std::log(w1 / w2);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, opt.ridge * wsum);
  penalty[0] = 0.0;

  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::ArrayXd eta = (X * b).array();
    // -log-likelihood: sum w [log(1 + e^eta) - y eta]
    const Eigen::ArrayXd softplus = eta.max(0.0) + (-eta.abs()).exp().log1p();
    return (w.array() * (softplus - y.array() * eta)).sum() +
           0.5 * (penalty.array() * b.array().square()).sum();
  };

  LogisticFit fit;
  double current = objective(beta);
  for (fit.iterations = 0; fit.iterations < opt.max_iterations;) {
    ++fit.iterations;
    const Eigen::ArrayXd eta = (X * beta).array();
    const Eigen::ArrayXd mu = 1.0 / (1.0 + (-eta).exp());
    const Eigen::ArrayXd v = (mu * (1.0 - mu)).max(1e-300);
    const Eigen::VectorXd grad =
        X.transpose() * (w.array() * (y.array() - mu)).matrix() - (penalty.array() * beta.array()).matrix();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d + 1, d + 1);
    H.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose() * (w.array() * v).sqrt().matrix().asDiagonal());
    H.diagonal() += penalty;
    H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().array().abs());
    const Eigen::VectorXd step = H.selfadjointView<Eigen::Lower>().ldlt().solve(grad);
    if (!step.allFinite()) throw NumericalError("fit_weighted_logistic: singular system");
    // Step halving keeps the objective monotone under quasi-separation.
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double value = objective(next);
    while (!(value <= current) && t > 1e-10) {
      t *= 0.5;
      next = beta + t * step;
      value = objective(next);
    }
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    current = value;
    if (change < opt.tolerance) {
      fit.converged = true;
      break;
    }
  }

  // Perfect separation: the positive-weight data are classified without
  // error and the fitted probabilities sit at the boundary.
  {
    const Eigen::ArrayXd eta = (X * beta).array();
    bool perfect = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] <= 0.0) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const bool correct = y[ii] == 1.0 ? eta[ii] > 0.0 : eta[ii] < 0.0;
      perfect = perfect && correct;
      const double mu = 1.0 / (1.0 + std::exp(-eta[ii]));
      worst = std::max(worst, std::abs(y[ii] - mu));
    }
    fit.separated = perfect && worst < 1e-3;
  }

  fit.coefficients = beta;
  for (Eigen::Index j = 0; j < d; ++j) fit.coefficients[j + 1] /= scale[j];
  return fit;
}

struct LogisticBfOptions {
  double retained_fraction = 0.5;
  double clamp_eps = 1e-12;
  double min_effective_points = 100.0;
  LogisticOptions irls{};
};

struct LogisticBf {
  double bf_log10 = 0.0;
  double p_hat = 0.5;
  double effective_1 = 0.0;  // Kish effective sample size per model
  double effective_2 = 0.0;
  LogisticFit fit;
};

/// Pseudo-draws retained by the kernel: model index, kernel score and the
/// covariate row |eta(observed) - eta(pseudo)|. Draws with score at or above
/// the bandwidth carry zero weight and may be omitted.
struct LogisticData {
  std::vector<int> labels;
  std::vector<double> scores;
  Eigen::MatrixXd covariates;
};

inline LogisticBf logistic_bf(const LogisticData& data, double bandwidth, const ModelPrior& prior,
                              const LogisticBfOptions& opt = {}) {
  prior.validate();
  require(opt.clamp_eps > 0.0 && opt.clamp_eps < 0.5, "clamp_eps must lie in (0, 0.5)");
  require(data.labels.size() == data.scores.size() &&
              static_cast<std::size_t>(data.covariates.rows()) == data.scores.size(),
          "logistic_bf: size mismatch");
  const auto w = epanechnikov_weights(data.scores, bandwidth);
  LogisticBf r;
  double s1 = 0, q1 = 0, s2 = 0, q2 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (data.labels[i] == 1) {
      s1 += w[i];
      q1 += w[i] * w[i];
    } else {
      s2 += w[i];
      q2 += w[i] * w[i];
    }
  }
  r.effective_1 = q1 > 0 ? s1 * s1 / q1 : 0.0;
  r.effective_2 = q2 > 0 ? s2 * s2 / q2 : 0.0;
  if (r.effective_1 < opt.min_effective_points || r.effective_2 < opt.min_effective_points)
    throw NumericalError("logistic_bf: kernel weighting left " + std::to_string(r.effective_1) +
                         " effective model-1 points and " + std::to_string(r.effective_2) +
                         " effective model-2 points");
  r.fit = fit_weighted_logistic(data.covariates, data.labels, w, opt.irls);
  r.fit.bandwidth = bandwidth;
  r.fit.retained_fraction = opt.retained_fraction;
  r.fit.clamp_eps = opt.clamp_eps;
  // Prediction at the zero vector is the intercept alone.
  const double p = 1.0 / (1.0 + std::exp(-r.fit.coefficients[0]));
  r.p_hat = std::clamp(p, opt.clamp_eps, 1.0 - opt.clamp_eps);
  r.bf_log10 = std::log10(r.p_hat) - std::log10(1.0 - r.p_hat) + std::log10(prior.odds_21());
  return r;
}

}  // namespace rocabc
