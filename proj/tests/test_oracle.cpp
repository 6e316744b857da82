#include <catch_amalgamated.hpp>

#include "rocabc/oracle.hpp"

using namespace rocabc;
using Catch::Approx;

TEST_CASE("simple Gaussian Bayes factor") {
  CHECK(true_bf_simple_gaussian(0.5, 0, 1, 1) == Approx(1.0));
  CHECK(true_bf_simple_gaussian(0.0, 0, 1, 1) == Approx(std::exp(0.5)));
  CHECK(true_bf_simple_gaussian(2.0, 2.0, 2.0, 3.7) == Approx(1.0));
}

TEST_CASE("composite Gaussian Bayes factor") {
  for (double d : {-2.0, 0.0, 1.5}) CHECK(true_bf_composite_gaussian(d, 0, 0, 1) == Approx(1.0));
  CHECK(true_bf_composite_gaussian(0, 0, 1, 1) == Approx(std::sqrt(2.0)));
  CHECK(true_bf_composite_gaussian(1, 0, 2, 1) == Approx(1.49888118961648).epsilon(1e-12));
}

TEST_CASE("oracle settings") {
  CHECK(oracle_kind_from_string("composite") == OracleKind::Composite);
  CHECK_THROWS_AS(oracle_kind_from_string("mixture"), PreconditionError);
  OracleSetting bad;
  bad.sigma = 0;
  CHECK_THROWS_AS(GaussianSimulator(bad), PreconditionError);
}

TEST_CASE("oracle runs bracket the truth") {
  RunConfig cfg;
  cfg.n_total = 50000;
  cfg.m_denominator = 50;
  cfg.p_floor = 1e-3;
  const Method ms[] = {Method::Empirical, Method::DualBeta, Method::Logistic};
  OracleSetting s;
  s.kind = OracleKind::Composite;
  s.d = 1.0;
  s.tau = 2.0;
  const auto rep = run_oracle(s, cfg, 4, ms);
  CHECK(rep.true_log10 == Approx(std::log10(1.49888118961648)));
  CHECK(rep.estimates.size() == 12);
  for (const auto& e : rep.estimates) {
    CHECK(e.error.empty());
    CHECK(std::abs(e.error_log10) < 0.4);
  }
}

TEST_CASE("sign agreement when the truth is decisive") {
  RunConfig cfg;
  cfg.n_total = 50000;
  cfg.m_denominator = 50;
  cfg.p_floor = 1e-3;
  const Method ms[] = {Method::Empirical, Method::DualBeta, Method::Logistic};
  for (double d : {-1.0, 2.0}) {
    OracleSetting s;
    s.d = d;
    const auto rep = run_oracle(s, cfg, 5, ms);
    REQUIRE(std::abs(rep.true_log10) > 0.5);
    std::size_t agree = 0;
    for (const auto& e : rep.estimates) agree += (e.bf_log10 > 0) == (rep.true_log10 > 0);
    CHECK(agree >= 0.9 * rep.estimates.size());
  }
}

TEST_CASE("empirical error shrinks with more draws") {
  auto median_error = [](std::size_t n) {
    RunConfig cfg;
    cfg.n_total = n;
    cfg.m_denominator = n / 2000;
    const Method ms[] = {Method::Empirical};
    const auto rep = run_oracle(OracleSetting{}, cfg, 20, ms);
    std::vector<double> e;
    for (const auto& x : rep.estimates) e.push_back(std::abs(x.error_log10));
    std::nth_element(e.begin(), e.begin() + 10, e.end());
    return e[10];
  };
  CHECK(median_error(200000) <= median_error(20000));
}
