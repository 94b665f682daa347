#include "twp/verify.hpp"

#include <chrono>

#include "twp/concretize.hpp"
#include "twp/regions.hpp"

namespace twp {

namespace {

LassoPlay lasso_from_graph_witness(const RegionGraph& rg, const ClosedLasso& cl) {
  const TimedAutomaton& ta = *rg.ta;
  State cur{ta.initial, ClockValuation::zero(ta.clocks.size())};
  auto as_move = [&](const CStep& s) {
    if (s.kind == RGEdge::Action) return Move{s.delay, ta.edges.at(s.ta_edge).action};
    return Move{s.delay, kBot};
  };
  LassoPlay pi;
  for (const auto& s : cl.prefix) {
    Move m = as_move(s);
    pi.prefix.push_back({cur, m});
    cur = step(ta, cur, m);
  }
  for (const auto& s : cl.cycle) {
    Move m = as_move(s);
    pi.cycle.push_back({cur, m});
    cur = step(ta, cur, m);
  }
  pi.cycle_end = cur;
  return pi;
}

Verdict verify_impl(const TimedAutomaton& ta, const PrioritySpec& spec, bool direct) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0).count();
  };
  ExpandedAutomaton xa = expand(ta, spec);
  std::vector<bool> bad = xa.bad_mask();
  RegionGraph rg = snz_transform(xa.ta, bad);

  Verdict v;
  v.stats.expanded_locations = xa.ta.locations.size();
  v.stats.expanded_edges = xa.ta.edges.size();
  v.stats.region_vertices = rg.num_vertices();
  v.stats.region_edges = rg.edges.size();

  std::vector<RegionWitness> witnesses;
  if (direct) {
    std::vector<bool> target(rg.num_vertices(), false);
    for (size_t i = 0; i < rg.num_vertices(); ++i) target[i] = bad[rg.vloc[i]];
    witnesses = divergent_reach_witnesses(rg, target, 24);
  } else {
    witnesses = divergent_buchi_witnesses(rg, 24);
  }
  if (witnesses.empty()) {
    v.holds = true;
    v.stats.wall_ms = elapsed_ms();
    return v;
  }
  v.holds = false;

  // Not every region cycle closes exactly; try the candidates in turn.
  std::optional<ClosedLasso> closed;
  for (const auto& w : witnesses) {
    closed = concretize_lasso_rotating(rg, w.prefix_edges, w.cycle_edges);
    if (closed) break;
  }
  if (!closed)
    throw Error("failed to concretize the region-level counterexample");
  LassoPlay xlasso = lasso_from_graph_witness(rg, *closed);
  LassoPlay base = project_lasso(xa, xlasso);

  // Fail closed: the witness must be confirmed by the trace-level checks.
  validate_lasso(ta, base);
  bool confirmed = direct ? !check_dtw(ta, base, spec) : !check_tw(ta, base, spec);
  if (!confirmed)
    throw Error("counterexample rejected by the trace-level oracle");
  v.counterexample = std::move(base);
  v.stats.wall_ms = elapsed_ms();
  return v;
}

TimedAutomaton slice_dimension(const TimedAutomaton& ta, int dim) {
  TimedAutomaton out = ta;
  for (auto& l : out.locations) l.priorities = {l.priorities.at(dim)};
  return out;
}

}  // namespace

LassoPlay project_lasso(const ExpandedAutomaton& xa, const LassoPlay& xl) {
  const int base_clocks = xa.base_clocks;
  auto proj_state = [&](const State& s) {
    State out;
    out.loc = xa.tags.at(s.loc).base;
    out.val.values.assign(s.val.values.begin(), s.val.values.begin() + base_clocks);
    out.val.global_time = s.val.global_time;
    return out;
  };
  auto proj_move = [&](const Move& m) {
    if (!m.is_delay() && (m.action == xa.beta1 || m.action == xa.beta2))
      return Move{m.delay, kBot};
    return m;
  };
  LassoPlay out;
  for (const auto& st : xl.prefix)
    out.prefix.push_back({proj_state(st.before), proj_move(st.move)});
  for (const auto& st : xl.cycle)
    out.cycle.push_back({proj_state(st.before), proj_move(st.move)});
  out.cycle_end = proj_state(xl.cycle_end);
  return out;
}

Verdict verify_direct(const TimedAutomaton& ta, const PrioritySpec& spec) {
  return verify_impl(ta, spec, true);
}

Verdict verify_tw(const TimedAutomaton& ta, const PrioritySpec& spec) {
  return verify_impl(ta, spec, false);
}

Verdict verify_per_dimension(const TimedAutomaton& ta, const PrioritySpec& spec,
                             bool direct) {
  if (spec.dimension() != ta.dimension())
    throw Error("lambda dimension does not match the model");
  Verdict out;
  out.holds = true;
  for (int dim = 0; dim < spec.dimension(); ++dim) {
    TimedAutomaton sliced = slice_dimension(ta, dim);
    PrioritySpec one{{spec.lambda[dim]}};
    Verdict vd = direct ? verify_direct(sliced, one) : verify_tw(sliced, one);
    out.stats.expanded_locations += vd.stats.expanded_locations;
    out.stats.expanded_edges += vd.stats.expanded_edges;
    out.stats.wall_ms += vd.stats.wall_ms;
    out.stats.region_vertices = std::max(out.stats.region_vertices, vd.stats.region_vertices);
    out.stats.region_edges = std::max(out.stats.region_edges, vd.stats.region_edges);
    if (!vd.holds && out.holds) {
      out.holds = false;
      // The lasso lives on the sliced copy, which shares all indices with
      // the original automaton.
      out.counterexample = std::move(vd.counterexample);
    }
  }
  return out;
}

}  // namespace twp
