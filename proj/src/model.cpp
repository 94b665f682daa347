#include "twp/model.hpp"

#include <algorithm>
#include <set>

namespace twp {

std::string rel_str(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

ClockConstraint ClockConstraint::conjoin(const ClockConstraint& other) const {
  ClockConstraint out = *this;
  out.atoms.insert(out.atoms.end(), other.atoms.begin(), other.atoms.end());
  return out;
}

ClockConstraint ClockConstraint::eq(int clock, long long bound) {
  return ClockConstraint{{{clock, Rel::Ge, bound}, {clock, Rel::Le, bound}}};
}

ClockConstraint ClockConstraint::atom(int clock, Rel rel, long long bound) {
  return ClockConstraint{{{clock, rel, bound}}};
}

ClockValuation ClockValuation::shifted(const Rational& d) const {
  ClockValuation out = *this;
  for (auto& x : out.values) x += d;
  out.global_time += d;
  return out;
}

ClockValuation ClockValuation::with_resets(const std::vector<int>& resets) const {
  ClockValuation out = *this;
  for (int c : resets) out.values.at(c) = Rational(0);
  return out;
}

int TimedAutomaton::priority_bound() const {
  int d = 1;
  for (const auto& l : locations)
    for (int p : l.priorities) d = std::max(d, p + 1);
  return d;
}

std::vector<int> TimedAutomaton::out_edges(int loc) const {
  std::vector<int> out;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].src == loc) out.push_back(static_cast<int>(i));
  return out;
}

int TimedAutomaton::find_clock(const std::string& n) const {
  for (size_t i = 0; i < clocks.size(); ++i)
    if (clocks[i] == n) return static_cast<int>(i);
  return -1;
}

int TimedAutomaton::find_action(const std::string& n) const {
  for (size_t i = 0; i < actions.size(); ++i)
    if (actions[i] == n) return static_cast<int>(i);
  return -1;
}

int TimedAutomaton::find_location(const std::string& n) const {
  for (size_t i = 0; i < locations.size(); ++i)
    if (locations[i].name == n) return static_cast<int>(i);
  return -1;
}

std::string step_error_str(StepError e) {
  switch (e) {
    case StepError::SourceInvariant: return "invariant violated after delay";
    case StepError::NoMatchingEdge: return "no enabled edge for action";
    case StepError::TargetInvariant: return "target invariant violated";
    case StepError::NotOwned: return "action not owned by player";
  }
  return "?";
}

bool eval_constraint(const ClockValuation& v, const ClockConstraint& g) {
  for (const auto& a : g.atoms) {
    const Rational& x = v.values.at(a.clock);
    Rational b(a.bound);
    bool ok = false;
    switch (a.rel) {
      case Rel::Lt: ok = x < b; break;
      case Rel::Le: ok = x <= b; break;
      case Rel::Ge: ok = x >= b; break;
      case Rel::Gt: ok = x > b; break;
    }
    if (!ok) return false;
  }
  return true;
}

namespace {

// Unique successor, or the error preventing it. Delay moves stay in place;
// action moves take the unique edge whose guard holds at v+d.
std::pair<std::optional<State>, std::optional<StepError>> step_impl(
    const TimedAutomaton& ta, const State& s, const Move& m) {
  if (m.delay.is_negative()) return {std::nullopt, StepError::SourceInvariant};
  ClockValuation shifted = s.val.shifted(m.delay);
  if (!eval_constraint(shifted, ta.locations.at(s.loc).invariant))
    return {std::nullopt, StepError::SourceInvariant};
  if (m.is_delay()) return {State{s.loc, shifted}, std::nullopt};
  for (const auto& e : ta.edges) {
    if (e.src != s.loc || e.action != m.action) continue;
    if (!eval_constraint(shifted, e.guard)) continue;
    ClockValuation after = shifted.with_resets(e.resets);
    if (!eval_constraint(after, ta.locations.at(e.dst).invariant))
      return {std::nullopt, StepError::TargetInvariant};
    return {State{e.dst, after}, std::nullopt};
  }
  return {std::nullopt, StepError::NoMatchingEdge};
}

}  // namespace

State step(const TimedAutomaton& ta, const State& s, const Move& m) {
  auto [next, err] = step_impl(ta, s, m);
  if (!next)
    throw Error("move (" + m.delay.str() + ", " +
                (m.is_delay() ? "_" : ta.actions.at(m.action)) +
                ") not enabled in " + ta.locations.at(s.loc).name + ": " +
                step_error_str(*err));
  return *next;
}

std::optional<State> try_step(const TimedAutomaton& ta, const State& s, const Move& m) {
  return step_impl(ta, s, m).first;
}

std::optional<StepError> step_error(const TimedAutomaton& ta, const State& s, const Move& m) {
  return step_impl(ta, s, m).second;
}

bool move_enabled(const TimedAutomaton& ta, const State& s, const Move& m) {
  return try_step(ta, s, m).has_value();
}

bool move_in_mi(const TimedGame& g, const State& s, const Move& m, int player) {
  if (!m.is_delay() && g.owner.at(m.action) != player) return false;
  return move_enabled(g.ta, s, m);
}

std::vector<State> joint_step(const TimedGame& g, const State& s,
                              const Move& m1, const Move& m2) {
  if (!move_in_mi(g, s, m1, 1))
    throw Error("player 1 move not available: " + step_error_str(
        m1.is_delay() || g.owner.at(m1.action) == 1
            ? step_error(g.ta, s, m1).value_or(StepError::NoMatchingEdge)
            : StepError::NotOwned));
  if (!move_in_mi(g, s, m2, 2))
    throw Error("player 2 move not available: " + step_error_str(
        m2.is_delay() || g.owner.at(m2.action) == 2
            ? step_error(g.ta, s, m2).value_or(StepError::NoMatchingEdge)
            : StepError::NotOwned));
  std::vector<State> out;
  auto push = [&out](const State& st) {
    if (std::find(out.begin(), out.end(), st) == out.end()) out.push_back(st);
  };
  if (m1.delay < m2.delay) {
    push(step(g.ta, s, m1));
  } else if (m2.delay < m1.delay) {
    push(step(g.ta, s, m2));
  } else {
    push(step(g.ta, s, m1));
    push(step(g.ta, s, m2));
  }
  return out;
}

bool p1_responsible(const TimedAutomaton& ta, const State& s,
                    const Move& m1, const Move& m2, const State& next) {
  if (m1.delay < m2.delay) return true;
  if (m2.delay < m1.delay) return false;
  auto via_m1 = try_step(ta, s, m1);
  return via_m1 && *via_m1 == next;
}

bool constraint_satisfiable(const ClockConstraint& g) {
  // Bounds per clock: (value, strict). Lower starts at 0 (clock domain).
  struct Bound { Rational v; bool strict; };
  std::set<int> clocks;
  for (const auto& a : g.atoms) clocks.insert(a.clock);
  for (int c : clocks) {
    Bound lo{Rational(0), false};
    std::optional<Bound> hi;
    for (const auto& a : g.atoms) {
      if (a.clock != c) continue;
      Rational b(a.bound);
      switch (a.rel) {
        case Rel::Ge:
          if (b > lo.v || (b == lo.v && lo.strict)) lo = {b, false};
          break;
        case Rel::Gt:
          if (b >= lo.v) lo = {b, true};
          break;
        case Rel::Le:
          if (!hi || b < hi->v) hi = {b, false};
          break;
        case Rel::Lt:
          if (!hi || b < hi->v || (b == hi->v && !hi->strict)) hi = {b, true};
          break;
      }
    }
    if (hi) {
      if (lo.v > hi->v) return false;
      if (lo.v == hi->v && (lo.strict || hi->strict)) return false;
    }
  }
  return true;
}

namespace {

void validate_ta(const TimedAutomaton& ta, std::vector<Diagnostic>& out) {
  auto diag = [&out](const std::string& m) { out.push_back({-1, m}); };
  if (ta.locations.empty()) {
    diag("model has no locations");
    return;
  }
  if (ta.initial < 0 || ta.initial >= static_cast<int>(ta.locations.size()))
    diag("initial location out of range");

  size_t k = ta.locations[0].priorities.size();
  if (k == 0) diag("locations carry no priority vector");
  for (const auto& l : ta.locations) {
    if (l.priorities.size() != k)
      diag("priority vector length mismatch at location " + l.name);
    for (int p : l.priorities)
      if (p < 0) diag("negative priority at location " + l.name);
  }
  // Global time is implicit; a model may not declare (and hence never
  // guard or reset) the accumulator.
  for (const auto& c : ta.clocks)
    if (c == "__time")
      diag("the global-time accumulator is implicit and may not be declared");

  auto check_atoms = [&](const ClockConstraint& g, const std::string& where) {
    for (const auto& a : g.atoms) {
      if (a.clock < 0 || a.clock >= static_cast<int>(ta.clocks.size()))
        diag("unknown clock in " + where);
      if (a.bound < 0) diag("negative bound in " + where);
    }
  };
  for (const auto& l : ta.locations) check_atoms(l.invariant, "invariant of " + l.name);
  for (size_t i = 0; i < ta.edges.size(); ++i) {
    const Edge& e = ta.edges[i];
    check_atoms(e.guard, "guard of edge " + std::to_string(i));
    if (e.src < 0 || e.src >= static_cast<int>(ta.locations.size()) ||
        e.dst < 0 || e.dst >= static_cast<int>(ta.locations.size()))
      diag("edge " + std::to_string(i) + " references unknown location");
    if (e.action < 0 || e.action >= static_cast<int>(ta.actions.size()))
      diag("edge " + std::to_string(i) + " references unknown action");
    for (int c : e.resets)
      if (c < 0 || c >= static_cast<int>(ta.clocks.size()))
        diag("edge " + std::to_string(i) + " resets unknown clock");
  }

  // Determinism: same source and action implies jointly unsatisfiable guards.
  for (size_t i = 0; i < ta.edges.size(); ++i)
    for (size_t j = i + 1; j < ta.edges.size(); ++j) {
      const Edge &a = ta.edges[i], &b = ta.edges[j];
      if (a.src != b.src || a.action != b.action) continue;
      if (constraint_satisfiable(a.guard.conjoin(b.guard)))
        diag("determinism violation: edges " + std::to_string(i) + " and " +
             std::to_string(j) + " from " + ta.locations.at(a.src).name +
             " on " + ta.actions.at(a.action) + " overlap");
    }

  if (ta.initial >= 0 && ta.initial < static_cast<int>(ta.locations.size())) {
    ClockValuation zero = ClockValuation::zero(ta.clocks.size());
    bool ok = true;
    for (const auto& a : ta.locations[ta.initial].invariant.atoms)
      if (a.clock >= 0 && a.clock < static_cast<int>(ta.clocks.size())) {
        ClockConstraint one{{a}};
        if (!eval_constraint(zero, one)) ok = false;
      }
    if (!ok) diag("zero valuation violates the initial location invariant");
  }
}

}  // namespace

std::vector<Diagnostic> validate_model(const TimedAutomaton& ta) {
  std::vector<Diagnostic> out;
  validate_ta(ta, out);
  return out;
}

std::vector<Diagnostic> validate_model(const TimedGame& g) {
  std::vector<Diagnostic> out;
  validate_ta(g.ta, out);
  if (g.owner.size() != g.ta.actions.size())
    out.push_back({-1, "owner map does not cover all actions"});
  for (size_t i = 0; i < g.owner.size() && i < g.ta.actions.size(); ++i)
    if (g.owner[i] != 1 && g.owner[i] != 2)
      out.push_back({-1, "action " + g.ta.actions[i] + " has invalid owner"});
  return out;
}

}  // namespace twp
