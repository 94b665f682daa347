#pragma once

#include <string>
#include <vector>

#include "twp/model.hpp"

namespace twp {

// Tag carried by an expanded location: either the vector of smallest
// priorities of the windows currently tracked, or the bad marker.
struct ExpandedTag {
  int base = 0;
  bool bad = false;
  std::vector<int> q;  // empty iff bad
  bool operator==(const ExpandedTag&) const = default;
};

struct ExpandedAutomaton {
  TimedAutomaton ta;
  std::vector<ExpandedTag> tags;     // per expanded location
  std::vector<int> z_clocks;         // indices of the window clocks, one per dim
  int base_locations = 0;
  int base_clocks = 0;
  int dims = 0;
  int prio_bound = 0;                // d
  int beta1 = -1, beta2 = -1;        // action indices

  bool is_bad(int loc) const { return tags.at(loc).bad; }
  // Locations are laid out per base location: the d^k tag vectors in
  // lexicographic order, then the bad location.
  int loc_of(int base, const std::vector<int>& q) const;
  int bad_of(int base) const;
  std::vector<bool> bad_mask() const;
};

struct ExpandedGame {
  ExpandedAutomaton ex;
  std::vector<int> owner;
  TimedGame game() const { return TimedGame{ex.ta, owner}; }
};

// Per-dimension priority update when entering `ell`: odd components keep
// tracking their window (min), even components reopen at the new priority.
std::vector<int> up_vector(const std::vector<int>& q,
                           const std::vector<int>& ell_priorities);

// Guard of the bad-entry edge for dimension i (0-based): z_i = lambda_i
// conjoined with z_j < lambda_j for the odd dimensions j < i. Requires
// q_i odd.
ClockConstraint bad_entry_guard(int i, const std::vector<int>& q,
                                const PrioritySpec& spec,
                                const std::vector<int>& z_clocks);

ExpandedAutomaton expand(const TimedAutomaton& ta, const PrioritySpec& spec);
ExpandedGame expand_game(const TimedGame& g, const PrioritySpec& spec);

}  // namespace twp
