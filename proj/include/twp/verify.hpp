#pragma once

#include <optional>

#include "twp/expand.hpp"
#include "twp/oracle.hpp"

namespace twp {

struct VerifyStats {
  size_t expanded_locations = 0;
  size_t expanded_edges = 0;
  size_t region_vertices = 0;
  size_t region_edges = 0;
  double wall_ms = 0;  // human reporting only; machine output omits it
};

// Outcome of a verification query. A counterexample, when present, is a
// time-divergent lasso of the original automaton violating the queried
// objective; it is revalidated against the trace-level checks before being
// returned.
struct Verdict {
  bool holds = true;
  std::optional<LassoPlay> counterexample;
  VerifyStats stats;
};

// All time-divergent initial paths satisfy the direct objective on every
// dimension (product expansion, safety over bad locations).
Verdict verify_direct(const TimedAutomaton& ta, const PrioritySpec& spec);

// Prefix-independent variant (co-Buchi over bad locations).
Verdict verify_tw(const TimedAutomaton& ta, const PrioritySpec& spec);

// Conjunction of k single-dimension verdicts; agrees with the product
// verdict and keeps region graphs small.
Verdict verify_per_dimension(const TimedAutomaton& ta, const PrioritySpec& spec,
                             bool direct);

// Lasso over the expanded automaton mapped back to the base one: beta moves
// become delays, window clocks are dropped.
LassoPlay project_lasso(const ExpandedAutomaton& xa, const LassoPlay& xl);

}  // namespace twp
