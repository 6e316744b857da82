// Estimates a Gaussian Bayes factor with all three methods and prints the
// exact value alongside.
#include <cmath>
#include <cstdio>

#include "rocabc/oracle.hpp"

int main() {
  using namespace rocabc;
  OracleSetting s;
  s.d = 0.0;
  RunConfig cfg;
  cfg.n_total = 200000;
  cfg.m_denominator = 100;
  cfg.p_floor = 1e-3;
  const Method methods[] = {Method::Empirical, Method::DualBeta, Method::Logistic};
  const auto rep = run_oracle(s, cfg, 3, methods);
  std::printf("exact log10 BF %.4f\n", rep.true_log10);
  for (const auto& e : rep.estimates)
    std::printf("seed %llu %-9s %.4f\n", static_cast<unsigned long long>(e.seed),
                std::string(to_string(e.method)).c_str(), e.bf_log10);
}
