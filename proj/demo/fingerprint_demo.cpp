// One trace against its true source and against a random other finger.
#include <cstdio>

#include "rocabc/abc.hpp"

int main() {
  using namespace rocabc;
  const auto pop = synth_population(300, 30, 60, 1);
  Rng rng(7);
  const auto pair = sample_trace(pop.fingers[0], 7, rng);
  Population others;
  others.fingers.assign(pop.fingers.begin() + 1, pop.fingers.end());

  RunConfig cfg;
  cfg.n_total = 20000;
  cfg.master_seed = 11;
  const auto ts = run(pair.trace, pair.control, others, {}, {}, cfg);
  std::printf("true source:   log10 BF %.3f  (K=%zu L=%zu)\n", ts.bf_log10, ts.sample.K(), ts.sample.L());

  const auto other = best_matching_subconfig(others.fingers[5], pair.trace);
  const auto rs = run(pair.trace, other, others, {}, {}, cfg);
  std::printf("other finger:  log10 BF %.3f", rs.bf_log10);
  if (!rs.diagnostic.empty()) std::printf("  (%s, bound %.3f)", rs.diagnostic.c_str(), rs.upper_bound_log10);
  std::printf("\n");
}
