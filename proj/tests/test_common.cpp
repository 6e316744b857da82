#include <catch_amalgamated.hpp>

#include <atomic>
#include <set>

#include "rocabc/common.hpp"

using namespace rocabc;

TEST_CASE("stream seeds are deterministic and distinct") {
  CHECK(stream_seed(7, 3) == stream_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m)
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(stream_seed(m, i));
  CHECK(seen.size() == 1000);
  Rng a = stream_rng(1, 2), b = stream_rng(1, 2);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("parallel_for visits every index once") {
  for (unsigned workers : {1u, 2u, 5u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, workers);
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("parallel_for rethrows the body's exception") {
  for (unsigned workers : {1u, 3u}) {
    CHECK_THROWS_AS(parallel_for(
                        2000,
                        [](std::size_t i) {
                          if (i == 1500) throw NumericalError("boom");
                        },
                        workers),
                    NumericalError);
  }
}

TEST_CASE("worker count honours the environment") {
  setenv("ROC_ABC_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("ROC_ABC_THREADS", "junk", 1);
  CHECK(worker_count() >= 1);
  unsetenv("ROC_ABC_THREADS");
}

TEST_CASE("require throws PreconditionError") {
  CHECK_NOTHROW(require(true, "x"));
  CHECK_THROWS_AS(require(false, "x"), PreconditionError);
}
