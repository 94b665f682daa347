#pragma once

#include <optional>
#include <vector>

#include "twp/regions.hpp"

namespace twp {

// A realized step of a region path: the delay taken, then the edge effect
// (action resets, or the gadget-clock reset for ticks). Action and tick
// steps always carry delay zero; delays live on delay edges.
struct CStep {
  Rational delay;
  RGEdge::Kind kind = RGEdge::Delay;
  int ta_edge = -1;
};

struct SimResult {
  std::vector<CStep> steps;
  std::vector<Rational> end;
};

// Forward simulation with the canonical midpoint policy. Free delays take
// the midpoint of their allowed interval; region membership is checked at
// every step. Throws on mismatch.
SimResult simulate_policy(const RegionGraph& g, const std::vector<int>& epath,
                          std::vector<Rational> values);

struct ClosedLasso {
  std::vector<CStep> prefix;          // from the all-zero initial valuation
  std::vector<CStep> cycle;           // returns exactly to `root`
  std::vector<Rational> root;         // values at cycle start; clocks above
                                      // their max constant may drift
};

// Concretizes a region lasso with an exactly closing cycle (clocks above
// their max constant at the root are exempt, their drift is unobservable).
// Tries, in order: orbit repetition of the policy map, then the affine
// fixed point of one cycle traversal plus a solved bridge from the prefix.
std::optional<ClosedLasso> concretize_lasso(const RegionGraph& g,
                                            const std::vector<int>& prefix_edges,
                                            const std::vector<int>& cycle_edges);

// As above but tries all rotations of the cycle until one closes.
std::optional<ClosedLasso> concretize_lasso_rotating(const RegionGraph& g,
                                                     const std::vector<int>& prefix_edges,
                                                     const std::vector<int>& cycle_edges);

}  // namespace twp
