#include <catch_amalgamated.hpp>

#include <numbers>

#include "helpers.hpp"
#include "rocabc/features.hpp"

using namespace rocabc;
using Catch::Approx;

namespace {

Configuration make(std::initializer_list<Minutia> ms) { return Configuration(std::vector<Minutia>(ms)); }

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

}  // namespace

TEST_CASE("direction markers") {
  const auto c = make({{0, 0, 0, MinutiaType::RidgeEnding}, {1, 1, std::numbers::pi / 2, MinutiaType::Bifurcation}});
  auto m = direction_markers(c, 30);
  CHECK(m[0].x == Approx(30));
  CHECK(m[0].y == Approx(0).margin(1e-12));
  m = direction_markers(c, 10);
  CHECK(m[1].x == Approx(1).margin(1e-12));
  CHECK(m[1].y == Approx(11));
  CHECK_THROWS_AS(direction_markers(c, 0.0), PreconditionError);
}

TEST_CASE("marker distances equal location distances when directions agree") {
  Rng rng(3);
  auto c = testing::random_config(rng, 7);
  std::vector<Minutia> ms = c.minutiae();
  for (auto& m : ms) m.direction = 1.1;
  const Configuration same_dir(ms);
  check_close(dir_marker_cross_distances(same_dir), cross_distances(same_dir), 1e-9);
  CHECK(dir_marker_cross_distances(same_dir).size() == 21);
}

TEST_CASE("centroid angles") {
  // Centroid at the origin; the first minutia lies due east of it.
  auto east = make({{10, 0, 0, MinutiaType::RidgeEnding},
                    {-5, 8, 0, MinutiaType::RidgeEnding},
                    {-5, -8, 0, MinutiaType::RidgeEnding}});
  CHECK(centroid_angles(east)[0] == Approx(0).margin(1e-9));
  auto north = make({{10, 0, std::numbers::pi / 2, MinutiaType::RidgeEnding},
                     {-5, 8, 0, MinutiaType::RidgeEnding},
                     {-5, -8, 0, MinutiaType::RidgeEnding}});
  CHECK(centroid_angles(north)[0] == Approx(90));
  auto on_centroid = make({{0, 0, 0, MinutiaType::RidgeEnding},
                           {5, 0, 0, MinutiaType::RidgeEnding},
                           {-5, 0, 0, MinutiaType::RidgeEnding}});
  CHECK_THROWS_AS(centroid_angles(on_centroid), PreconditionError);
}

TEST_CASE("summary lengths") {
  Rng rng(5);
  for (std::size_t k = 3; k <= 25; ++k) CHECK(flatten(summarize(testing::random_config(rng, k))).size() == k * k + 2 * k);
  CHECK(flatten(summarize(testing::random_config(rng, 7))).size() == 63);
  CHECK(flatten(summarize(testing::random_config(rng, 10))).size() == 120);
  CHECK(flatten(summarize(testing::random_config(rng, 15))).size() == 255);
  CHECK_THROWS_AS(summarize(testing::random_config(rng, 2)), PreconditionError);
}

TEST_CASE("summary is invariant under rigid motion") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(3, 25)(rng);
    const auto c = testing::random_config(rng, k);
    const auto moved = rigid_transform(c, uniform(rng, 0, kTwoPi), uniform(rng, -500, 500), uniform(rng, -500, 500));
    const auto a = flatten(summarize(c)), b = flatten(summarize(moved));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = std::abs(a[i] - b[i]);
      // Angles near the 0/360 seam compare modulo a full turn.
      d = std::min(d, std::abs(d - 360.0));
      CHECK(d <= 1e-9);
    }
  }
}

TEST_CASE("ranges of summary outputs") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = summarize(testing::random_config(rng, 9));
    for (double v : s.cross_dists) CHECK(v >= 0);
    for (double v : s.centroid_dists) CHECK(v >= 0);
    for (double v : s.dir_marker_cross_dists) CHECK(v >= 0);
    for (double v : s.centroid_angles) {
      CHECK(v >= 0);
      CHECK(v < 360);
    }
  }
}

TEST_CASE("cross distances follow lexicographic pair order under permutation") {
  Rng rng(17);
  const auto c = testing::random_config(rng, 6);
  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<Minutia> ms;
  for (auto p : perm) ms.push_back(c[p]);
  const Configuration permuted(ms);
  const auto a = cross_distances(c), b = cross_distances(permuted);
  auto pair_index = [](std::size_t i, std::size_t j, std::size_t k) {
    if (i > j) std::swap(i, j);
    return i * k - i * (i + 1) / 2 + (j - i - 1);
  };
  std::size_t p = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j, ++p) CHECK(b[p] == a[pair_index(perm[i], perm[j], 6)]);
}

TEST_CASE("reflection is not an invariance") {
  const auto c = make({{0, 0, 0.3, MinutiaType::RidgeEnding},
                       {40, 5, 1.0, MinutiaType::RidgeEnding},
                       {10, 30, 2.0, MinutiaType::Bifurcation},
                       {25, -20, 4.0, MinutiaType::RidgeEnding}});
  std::vector<Minutia> mirrored;
  for (auto m : c) mirrored.push_back({-m.x, m.y, std::numbers::pi - m.direction, m.type});
  const auto a = summarize(c).centroid_angles, b = summarize(Configuration(mirrored)).centroid_angles;
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || std::abs(a[i] - b[i]) > 1e-6;
  CHECK(differs);
}

TEST_CASE("configuration normalises directions and rejects non-finite fields") {
  const auto c = make({{0, 0, -std::numbers::pi / 2, MinutiaType::Unknown}});
  CHECK(c[0].direction == Approx(1.5 * std::numbers::pi));
  CHECK_THROWS_AS(make({{std::nan(""), 0, 0, MinutiaType::Unknown}}), PreconditionError);
  CHECK(minutia_type_from_string("bifurcation") == MinutiaType::Bifurcation);
  CHECK_THROWS_AS(minutia_type_from_string("loop"), PreconditionError);
}
