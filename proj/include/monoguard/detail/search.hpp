#ifndef MONOGUARD_DETAIL_SEARCH_HPP_
#define MONOGUARD_DETAIL_SEARCH_HPP_

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "monoguard/solver.hpp"

namespace monoguard::detail {

struct SearchOptions {
  // Only values beyond the threshold matter (above it when maximizing, below
  // when minimizing). Sub-boxes that cannot beat it are discarded, so the
  // result certifies "nothing beyond threshold" when the witness does not
  // pass it.
  std::optional<double> threshold;
  // Return as soon as a witness passes the threshold.
  bool stop_at_first = false;
  // Feature pair (a, b) with the side constraint x[a] <= x[b]; both must be
  // free coordinates.
  std::optional<std::pair<std::size_t, std::size_t>> ordered;
  // Extra starting candidates (full feature vectors inside the box).
  std::vector<FeatureVector> hints;
  // Optional extra test on a sub-box of the free coordinates (lower corner,
  // upper corner). Returning true certifies that the maximized objective is
  // <= 0 everywhere in the sub-box.
  std::function<bool(const double*, const double*)> certify_nonpositive;
};

ExtremumResult Search(const Network& net, const BoxQuery& query,
                      const SolverConfig& cfg, Sense sense,
                      const SearchOptions& options);

}  // namespace monoguard::detail

#endif  // MONOGUARD_DETAIL_SEARCH_HPP_
