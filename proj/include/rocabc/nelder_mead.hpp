// Derivative-free simplex minimiser.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "rocabc/common.hpp"

namespace rocabc {

struct NelderMeadOptions {
  std::size_t max_evals = 2000;
  double ftol = 1e-10;  // spread of function values across the simplex
  double xtol = 1e-8;   // largest vertex distance from the best vertex
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
};

/// Minimises `f` starting from `x0` with initial simplex offsets `step`.
/// Non-finite function values are treated as +infinity.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& step,
                                    const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  require(n > 0 && step.size() == n, "nelder_mead: dimension mismatch");
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step[i];
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centre(n), trial(n), trial2(n);
  auto point = [&](std::vector<double>& out, const std::vector<double>& from, double t) {
    // out = centre + t * (from - centre)
    for (std::size_t d = 0; d < n; ++d) out[d] = centre[d] + t * (from[d] - centre[d]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    {
      std::vector<std::vector<double>> xs2(n + 1);
      std::vector<double> fs2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        xs2[i] = std::move(xs[order[i]]);
        fs2[i] = fs[order[i]];
      }
      xs.swap(xs2);
      fs.swap(fs2);
    }
    if (evals >= opt.max_evals) break;
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(xs[i][d] - xs[0][d]));
    const double spread = fs[n] - fs[0];
    if (std::isfinite(fs[n]) && spread <= opt.ftol * (1.0 + std::abs(fs[0])) && diameter <= opt.xtol)
      break;
    if (diameter <= 1e-14 * (1.0 + std::abs(xs[0][0]))) break;

    std::fill(centre.begin(), centre.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centre[d] += xs[i][d] / static_cast<double>(n);

    point(trial, xs[n], -1.0);  // reflection
    const double fr = eval(trial);
    if (fr < fs[0]) {
      point(trial2, xs[n], -2.0);  // expansion
      const double fe = eval(trial2);
      if (fe < fr) {
        xs[n] = trial2;
        fs[n] = fe;
      } else {
        xs[n] = trial;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = trial;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      point(trial2, outside ? trial : xs[n], 0.5);
      const double fc = eval(trial2);
      if (fc < (outside ? fr : fs[n])) {
        xs[n] = trial2;
        fs[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t d = 0; d < n; ++d) xs[i][d] = xs[0][d] + 0.5 * (xs[i][d] - xs[0][d]);
          fs[i] = eval(xs[i]);
        }
      }
    }
  }
  return {xs[0], fs[0], evals};
}

}  // namespace rocabc
