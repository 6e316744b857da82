#include <catch_amalgamated.hpp>

#include <filesystem>

#include "helpers.hpp"
#include "rocabc/io.hpp"
#include "rocabc/svg.hpp"

using namespace rocabc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rocabc_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("configuration JSON round trip") {
  Rng rng(1);
  const auto c = testing::random_config(rng, 9);
  const auto path = scratch("c.json").string();
  io::write_json(path, io::to_json(c));
  CHECK(io::read_configuration(path) == c);
  CHECK_THROWS_AS(io::configuration_from_json(io::json::parse(R"({"points": []})")), PreconditionError);
  CHECK_THROWS_AS(io::configuration_from_json(io::json::parse(R"({"minutiae": [{"x": 1}]})")), PreconditionError);
}

TEST_CASE("population round trip") {
  const auto pop = synth_population(5, 4, 8, 2);
  const auto path = scratch("p.jsonl").string();
  io::write_population(path, pop);
  const auto back = io::read_population(path);
  REQUIRE(back.fingers.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.fingers[i].id == pop.fingers[i].id);
    CHECK(back.fingers[i].minutiae == pop.fingers[i].minutiae);
  }
  io::write_text(path, "{ not json\n");
  CHECK_THROWS_AS(io::read_population(path), PreconditionError);
  CHECK_THROWS_AS(io::read_population(scratch("missing.jsonl").string()), PreconditionError);
}

TEST_CASE("weights file") {
  const auto path = scratch("w.json").string();
  io::write_json(path, io::to_json(KernelWeights{{1, 2, 3, 4, 5}}));
  CHECK(io::read_weights(path).c[3] == 4.0);
  io::write_text(path, R"({"c": [1, 2]})");
  CHECK_THROWS_AS(io::read_weights(path), PreconditionError);
}

TEST_CASE("scores CSV round trip is exact") {
  Draws d;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    d.models.push_back(i % 3 == 0 ? 2 : 1);
    d.scores.push_back(normal(rng, 0, 1e3));
  }
  const auto path = scratch("s.csv").string();
  const auto text = io::scores_csv(d, "rocabc bf --seed 1");
  CHECK(text.rfind("# invocation: rocabc bf --seed 1\nmodel,score\n", 0) == 0);
  io::write_text(path, text);
  const auto back = io::read_scores_csv(path);
  CHECK(back.models == d.models);
  CHECK(back.scores == d.scores);
}

TEST_CASE("kernel density and plots") {
  Rng rng(4);
  std::vector<double> x(2000);
  for (auto& v : x) v = normal(rng, 3, 2);
  const auto c = svg::kde(x);
  CHECK(svg::trapezoid(c) == Approx(1.0).epsilon(1e-3));
  svg::Plot a("t", "x", "y", 0, 1, 0, 1), b("t", "x", "y", 0, 1, 0, 1);
  a.polyline({0, 1}, {0, 1}, "black");
  b.polyline({0, 1}, {0, 1}, "black");
  CHECK(a.str() == b.str());
  CHECK(a.str().find("<svg") == 0);
}
