#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twp/rational.hpp"

namespace twp {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Rel { Lt, Le, Ge, Gt };

std::string rel_str(Rel r);

struct ConstraintAtom {
  int clock = 0;
  Rel rel = Rel::Le;
  long long bound = 0;
  bool operator==(const ConstraintAtom&) const = default;
};

// Conjunction of atoms; the empty conjunction is `true`. `x == c` is kept as
// the two atoms x >= c, x <= c.
struct ClockConstraint {
  std::vector<ConstraintAtom> atoms;

  bool is_true() const { return atoms.empty(); }
  ClockConstraint conjoin(const ClockConstraint& other) const;
  static ClockConstraint eq(int clock, long long bound);
  static ClockConstraint atom(int clock, Rel rel, long long bound);
  bool operator==(const ClockConstraint&) const = default;
};

// Valuation over the model's clocks plus the implicit global-time
// accumulator. User models can never name, guard, or reset global time.
struct ClockValuation {
  std::vector<Rational> values;
  Rational global_time;

  static ClockValuation zero(size_t nclocks) {
    ClockValuation v;
    v.values.assign(nclocks, Rational(0));
    return v;
  }
  ClockValuation shifted(const Rational& d) const;
  ClockValuation with_resets(const std::vector<int>& resets) const;
  bool operator==(const ClockValuation&) const = default;
};

struct Edge {
  int src = 0;
  ClockConstraint guard;
  int action = 0;
  std::vector<int> resets;  // sorted clock indices
  int dst = 0;
  bool operator==(const Edge&) const = default;
};

struct Location {
  std::string name;
  ClockConstraint invariant;
  std::vector<int> priorities;  // length k
  bool operator==(const Location&) const = default;
};

struct TimedAutomaton {
  std::string name;
  std::vector<std::string> clocks;
  std::vector<std::string> actions;
  std::vector<Location> locations;
  int initial = 0;
  std::vector<Edge> edges;

  int dimension() const {
    return locations.empty() ? 0 : static_cast<int>(locations[0].priorities.size());
  }
  // d such that priorities range over {0..d-1}; at least 1.
  int priority_bound() const;
  std::vector<int> out_edges(int loc) const;
  int find_clock(const std::string& n) const;
  int find_action(const std::string& n) const;
  int find_location(const std::string& n) const;
  bool operator==(const TimedAutomaton&) const = default;
};

struct TimedGame {
  TimedAutomaton ta;
  std::vector<int> owner;  // per action: 1 or 2
  bool operator==(const TimedGame&) const = default;
};

struct PrioritySpec {
  std::vector<long long> lambda;  // per dimension, each >= 1
  int dimension() const { return static_cast<int>(lambda.size()); }
};

constexpr int kBot = -1;  // the delay pseudo-action

struct Move {
  Rational delay;
  int action = kBot;
  bool is_delay() const { return action == kBot; }
  bool operator==(const Move&) const = default;
};

struct State {
  int loc = 0;
  ClockValuation val;
  bool operator==(const State&) const = default;
};

enum class StepError {
  SourceInvariant,   // invariant of the current location violated at v+d
  NoMatchingEdge,    // no edge with this action whose guard holds at v+d
  TargetInvariant,   // reset image violates the target invariant
  NotOwned,          // game move uses an action the player does not own
};

std::string step_error_str(StepError e);

// True iff every atom of g holds under v, by exact comparison.
bool eval_constraint(const ClockValuation& v, const ClockConstraint& g);

// Successor under a single move. Throws Error on disabled moves; the
// message carries the StepError kind.
State step(const TimedAutomaton& ta, const State& s, const Move& m);
std::optional<State> try_step(const TimedAutomaton& ta, const State& s, const Move& m);
std::optional<StepError> step_error(const TimedAutomaton& ta, const State& s, const Move& m);

bool move_enabled(const TimedAutomaton& ta, const State& s, const Move& m);
// Move availability for player i (delay moves plus own actions).
bool move_in_mi(const TimedGame& g, const State& s, const Move& m, int player);

// Joint destination: the faster move's successor, both on an exact tie.
// Result has one or two states (two only on ties with distinct targets).
std::vector<State> joint_step(const TimedGame& g, const State& s,
                              const Move& m1, const Move& m2);

// Responsibility of player 1 for a realized transition s -> next under the
// simultaneous moves (m1, m2). Player 1 is responsible iff it was strictly
// faster, or the delays tie and m1 itself produces `next`.
bool p1_responsible(const TimedAutomaton& ta, const State& s,
                    const Move& m1, const Move& m2, const State& next);

struct Diagnostic {
  int line = -1;  // -1 when not tied to source text
  std::string message;
};

// Structural validity: determinism, initial invariant at zero, priority
// vector lengths, reset indices, reserved names, owner totality for games.
std::vector<Diagnostic> validate_model(const TimedAutomaton& ta);
std::vector<Diagnostic> validate_model(const TimedGame& g);

// Satisfiability of a conjunction over the nonnegative reals (per clock:
// max lower bound vs min upper bound). Used by the determinism check.
bool constraint_satisfiable(const ClockConstraint& g);

}  // namespace twp
