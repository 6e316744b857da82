#include <catch_amalgamated.hpp>

#include "rocabc/experiment.hpp"

using namespace rocabc;
using Catch::Approx;

TEST_CASE("median and ranks") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(median({-inf, -inf, 1}) == -inf);
  CHECK(median({1, std::nan(""), 3}) == 2.0);
  const auto r = average_ranks({10, 20, 20, 5});
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 2, 3, 4, 4}) == Approx(0.9746794344808964));
}

TEST_CASE("small experiment") {
  const auto pop = synth_population(60, 25, 40, 4);
  ExperimentConfig cfg;
  cfg.k_list = {5, 8};
  cfg.cases = 3;
  cfg.designs = {Design::TS, Design::CNM, Design::RS};
  cfg.methods = {Method::Empirical, Method::DualBeta};
  cfg.run.n_total = 4000;
  cfg.seed = 2;
  const auto rows = run_experiment(pop, cfg);
  CHECK(rows.size() == 2 * 3 * 3 * 2);
  for (const auto& r : rows) {
    if (r.design == Design::TS) CHECK(r.source == r.control);
    else CHECK(r.source != r.control);
  }
  const auto again = run_experiment(pop, cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].bf_log10 == again[i].bf_log10);

  // CNM picks the most similar non-source finger.
  const auto setup = setup_case(pop, 5, cfg.seed, 0);
  const MatchCache cache(setup.alternatives, setup.pair.trace, cfg.weights, cfg.match);
  double best = std::numeric_limits<double>::infinity();
  std::string best_id;
  for (auto e : cache.eligible())
    if (cache.match(e).score < best) {
      best = cache.match(e).score;
      best_id = setup.alternatives.fingers[e].id;
    }
  for (const auto& r : rows)
    if (r.design == Design::CNM && r.k == 5 && r.case_id == 0) CHECK(r.control == best_id);
}

TEST_CASE("experiment preconditions") {
  Population one;
  one.fingers.push_back(synth_population(1, 10, 10, 1).fingers[0]);
  ExperimentConfig cfg;
  cfg.k_list = {5};
  cfg.cases = 1;
  cfg.designs = {Design::CNM};
  CHECK_THROWS_AS(run_experiment(one, cfg), PreconditionError);
  CHECK_THROWS_AS(design_from_string("XX"), PreconditionError);
}

TEST_CASE("training cases") {
  const auto pop = synth_population(30, 20, 30, 5);
  TrainingConfig cfg;
  cfg.cases = 2;
  cfg.scores_per_case = 200;
  const auto cases = make_training_cases(pop, cfg);
  REQUIRE(cases.size() == 2);
  CHECK(cases[0].same.size() == 100);
  CHECK(cases[0].diff.size() == 100);
  CHECK(mean_auc(cases, KernelWeights{}) > 0.7);
}
