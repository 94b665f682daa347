#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twp/model.hpp"

namespace twp {

// Result of parsing the line-oriented model format. `owners` is present iff
// the source used any `owner` clause, in which case owners must be total.
struct ParseResult {
  std::optional<TimedAutomaton> automaton;
  std::optional<std::vector<int>> owners;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return automaton.has_value() && diagnostics.empty(); }
  bool is_game() const { return owners.has_value(); }
  TimedGame game() const { return TimedGame{*automaton, *owners}; }
};

ParseResult parse_model(const std::string& text);

// Canonical emission; parse(emit(m)) is structurally equal to m.
std::string emit_model(const TimedAutomaton& ta,
                       const std::vector<int>* owners = nullptr);

std::string constraint_str(const TimedAutomaton& ta, const ClockConstraint& g);

}  // namespace twp
