#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twp/model.hpp"

namespace twp {

// One clock's slice of a region: integer part capped at the clock's max
// constant (with `above` marking values beyond it), and the fractional
// class. Class 0 is reserved for fraction exactly zero; classes 1..m are
// the nonzero fractions in increasing order.
struct ClockRegionPart {
  bool above = false;
  int ip = 0;
  int fc = 0;
  bool operator==(const ClockRegionPart&) const = default;
};

struct Region {
  std::vector<ClockRegionPart> parts;
  int classes = 0;  // number of nonzero fractional classes

  bool operator==(const Region&) const = default;
  bool time_closed() const;  // every clock above its max constant
  bool has_zero_frac() const;
  // Members of the highest nonzero class, or -1 if none.
  int top_class_clock() const;
  std::string str(const std::vector<std::string>& names,
                  const std::vector<int>& maxc) const;
};

// Largest bound each clock is compared against in guards and invariants
// (0 for clocks never mentioned).
std::vector<int> max_constants(const TimedAutomaton& ta);

Region region_of(const std::vector<Rational>& values, const std::vector<int>& maxc);
bool region_satisfies(const Region& r, const ClockConstraint& g,
                      const std::vector<int>& maxc);
Region region_reset(const Region& r, const std::vector<int>& resets);
// Immediate time successor; equals r itself exactly when r is time-closed.
Region region_delay_succ(const Region& r, const std::vector<int>& maxc);

// Midpoint representative: class c of m gets fraction (2c-1)/(2(m+1));
// clocks above max get maxc+1.
std::vector<Rational> region_representative(const Region& r, const std::vector<int>& maxc);

struct RGEdge {
  enum Kind { Delay, Action, Tick };
  Kind kind = Delay;
  int from = 0, to = 0;
  int ta_edge = -1;     // for Action
  bool marked = false;  // for Tick: fired at an accepting location
};

// Reachable region graph. When built by snz_transform it carries an extra
// gadget clock (index theta, max constant 1) and synthetic tick edges that
// reset it; a path takes a tick at most once per elapsed time unit, and can
// take one whenever a unit has elapsed, so infinite tick repetition is
// equivalent to time divergence.
struct RegionGraph {
  const TimedAutomaton* ta = nullptr;
  std::vector<int> maxc;  // per graph clock
  int nclocks = 0;
  int theta = -1;  // gadget clock index or -1

  std::vector<int> vloc;
  std::vector<Region> vregion;
  std::vector<std::vector<int>> out;  // vertex -> edge ids
  std::vector<RGEdge> edges;
  int init = 0;

  size_t num_vertices() const { return vloc.size(); }
  int delay_successor(int v) const;  // vertex id or -1
  std::string vertex_str(int v) const;
};

RegionGraph build_region_graph(const TimedAutomaton& ta);

// Region graph of the automaton instrumented for strong non-Zenoness.
// Guarantee: a reachable cycle containing a marked tick exists iff the
// automaton has a time-divergent run visiting `accepting` infinitely often.
RegionGraph snz_transform(const TimedAutomaton& ta,
                          const std::vector<bool>& accepting_locations);

struct RegionWitness {
  std::vector<int> prefix_edges;  // from init
  std::vector<int> cycle_edges;   // closed at the prefix end
};

// Vertices from which some time-divergent run exists (tick-cycle reachable).
std::vector<bool> divergence_capable(const RegionGraph& g);

// Lasso whose cycle contains a marked tick (divergent Buchi emptiness).
std::optional<RegionWitness> find_divergent_buchi(const RegionGraph& g);

// Lasso through a target vertex followed by a divergence cycle.
std::optional<RegionWitness> find_divergent_reach(const RegionGraph& g,
                                                  const std::vector<bool>& target);

// Alternative witnesses for the same questions. Not every region cycle
// admits an exactly periodic run (clock phases can be forced to drift), so
// concretization tries several cycles, preferring regions with few
// fractional classes where the phases collapse.
std::vector<RegionWitness> divergent_buchi_witnesses(const RegionGraph& g,
                                                     size_t max_candidates);
std::vector<RegionWitness> divergent_reach_witnesses(const RegionGraph& g,
                                                     const std::vector<bool>& target,
                                                     size_t max_candidates);

std::vector<int> tarjan_scc(const RegionGraph& g);  // vertex -> component id

std::string region_graph_dot(const RegionGraph& g);

}  // namespace twp
