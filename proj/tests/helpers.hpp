#pragma once

#include <cmath>
#include <vector>

#include "rocabc/features.hpp"
#include "rocabc/generative.hpp"

namespace testing {

/// Random configuration with minutiae at least 5 px apart.
inline rocabc::Configuration random_config(rocabc::Rng& rng, std::size_t k, double side = 300.0) {
  std::vector<rocabc::Minutia> ms;
  while (ms.size() < k) {
    rocabc::Minutia m{rocabc::uniform(rng, 0.0, side), rocabc::uniform(rng, 0.0, side),
                      rocabc::uniform(rng, 0.0, rocabc::kTwoPi),
                      static_cast<rocabc::MinutiaType>(std::uniform_int_distribution<int>(0, 2)(rng))};
    bool ok = true;
    for (const auto& o : ms) ok = ok && rocabc::distance(m.location(), o.location()) >= 5.0;
    if (ok) ms.push_back(m);
  }
  return rocabc::Configuration(std::move(ms));
}

inline rocabc::Finger as_finger(const rocabc::Configuration& c, std::string id = "f") {
  return {std::move(id), c.minutiae()};
}

}  // namespace testing
