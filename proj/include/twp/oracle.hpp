#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twp/expand.hpp"
#include "twp/model.hpp"

namespace twp {

struct PlayStep {
  State before;
  Move move;
};

// Finite prefix plus a repeatable cycle with exact rational delays. The
// cycle returns to its first state on every clock that stays within its max
// constant; clocks beyond it may drift, which no guard or invariant can
// observe, so unrolling revalidates.
struct LassoPlay {
  std::vector<PlayStep> prefix;
  std::vector<PlayStep> cycle;   // non-empty
  State cycle_end;

  const State& cycle_start() const { return cycle.front().before; }
  Rational cycle_duration() const;
  bool divergent() const { return cycle_duration() > Rational(0); }
};

// Step-by-step validity plus cycle closure. Throws Error with a reason.
void validate_lasso(const TimedAutomaton& ta, const LassoPlay& pi);

// Unrolled view: states s_0..s_n and the moves between them, meeting both
// the duration and cycle-count floors.
struct UnrolledPlay {
  std::vector<State> states;
  std::vector<Move> moves;
  size_t prefix_len = 0;
  size_t cycle_len = 0;
};
UnrolledPlay unroll(const TimedAutomaton& ta, const LassoPlay& pi,
                    const Rational& min_duration, int min_cycles);

// Good-window check from a step index of an unrolled play: some j >= start
// closes the window (min priority even) in under lambda time units.
bool check_tgw_at(const TimedAutomaton& ta, const UnrolledPlay& u, int dim,
                  long long lambda, size_t start);

// Direct timed window objective on a divergent lasso, all dimensions.
bool check_tgw(const TimedAutomaton& ta, const LassoPlay& pi,
               const PrioritySpec& spec, int dim, size_t start);
bool check_dtw(const TimedAutomaton& ta, const LassoPlay& pi, const PrioritySpec& spec);
// Prefix-independent variant: some suffix start satisfies the direct check.
bool check_tw(const TimedAutomaton& ta, const LassoPlay& pi, const PrioritySpec& spec);
// Smallest priority on the cycle is even.
bool check_parity(const TimedAutomaton& ta, const LassoPlay& pi, int dim);

// Two-player plays (finite): simultaneous moves, recorded successor.
struct GameStep {
  State before;
  Move m1, m2;
};
struct Play {
  std::vector<GameStep> steps;
  State last;
};

// Wraps an automaton path as a play where player 1 idles.
Play path_as_play(const LassoPlay& pi, const TimedAutomaton& ta,
                  const Rational& min_duration, int min_cycles);

// Step-by-step expansion of a base-game play into the expanded game,
// inserting bad-location detours whenever a tracked window expires.
Play expand_play(const TimedGame& g, const ExpandedGame& xg,
                 const PrioritySpec& spec, const Play& pi);

// Removes window information: beta moves become delays, z-clocks are
// dropped, expanded locations are mapped back to their base.
Play project_play(const ExpandedGame& xg, const Play& bar);

bool visits_bad(const ExpandedGame& xg, const Play& bar);
size_t count_bad_states(const ExpandedGame& xg, const Play& bar);

struct LassoLimits {
  int max_cycle_len = 10;
  int max_prefix_len = 12;
  int max_count = 4000;
  int prefix_visit_cap = 1;      // 1 = simple paths
  int prefixes_per_cycle = 24;
};

// Streams concretized lassos of the region graph: simple positive-duration
// cycles each paired with up to `prefixes_per_cycle` prefixes from the
// initial vertex. The callback returns false to stop early.
void enumerate_lassos(const TimedAutomaton& ta, const LassoLimits& limits,
                      const std::function<bool(const LassoPlay&)>& yield);

// Trace file format: `prefix:` / `cycle:` sections, one step per line,
// `LOC DELAY ACTION` with `_` for the delay pseudo-action.
LassoPlay parse_trace(const TimedAutomaton& ta, const std::string& text);
std::string emit_trace(const TimedAutomaton& ta, const LassoPlay& pi);

}  // namespace twp
