#include "twp/oracle.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "twp/concretize.hpp"
#include "twp/regions.hpp"

namespace twp {

Rational LassoPlay::cycle_duration() const {
  Rational d(0);
  for (const auto& s : cycle) d += s.move.delay;
  return d;
}

namespace {

bool closure_matches(const State& a, const State& b, const std::vector<int>& maxc) {
  if (a.loc != b.loc) return false;
  for (size_t c = 0; c < a.val.values.size(); ++c) {
    if (a.val.values[c] == b.val.values[c]) continue;
    if (a.val.values[c] > Rational(maxc[c]) && b.val.values[c] > Rational(maxc[c]))
      continue;
    return false;
  }
  return true;
}

int prio(const TimedAutomaton& ta, const State& s, int dim) {
  return ta.locations.at(s.loc).priorities.at(dim);
}

}  // namespace

void validate_lasso(const TimedAutomaton& ta, const LassoPlay& pi) {
  if (pi.cycle.empty()) throw Error("lasso cycle is empty");
  auto check_chain = [&ta](const std::vector<PlayStep>& steps, const State& expected_next,
                           const char* what) {
    for (size_t i = 0; i < steps.size(); ++i) {
      State next = step(ta, steps[i].before, steps[i].move);
      const State& want = i + 1 < steps.size() ? steps[i + 1].before : expected_next;
      if (!(next == want))
        throw Error(std::string(what) + " step " + std::to_string(i) +
                    " does not lead to the recorded state");
    }
  };
  if (!pi.prefix.empty())
    check_chain(pi.prefix, pi.cycle.front().before, "prefix");
  check_chain(pi.cycle, pi.cycle_end, "cycle");
  if (!closure_matches(pi.cycle_start(), pi.cycle_end, max_constants(ta)))
    throw Error("cycle endpoints do not match");
}

UnrolledPlay unroll(const TimedAutomaton& ta, const LassoPlay& pi,
                    const Rational& min_duration, int min_cycles) {
  UnrolledPlay u;
  u.prefix_len = pi.prefix.size();
  u.cycle_len = pi.cycle.size();
  State cur = pi.prefix.empty() ? pi.cycle.front().before : pi.prefix.front().before;
  u.states.push_back(cur);
  for (const auto& st : pi.prefix) {
    cur = step(ta, cur, st.move);
    u.moves.push_back(st.move);
    u.states.push_back(cur);
  }
  Rational cyc_dur = pi.cycle_duration();
  long long cycles = min_cycles;
  if (cyc_dur > Rational(0)) {
    Rational need = min_duration - cur.val.global_time;
    while (Rational(cycles) * cyc_dur < need) ++cycles;
  }
  for (long long it = 0; it < cycles; ++it) {
    for (const auto& st : pi.cycle) {
      cur = step(ta, cur, st.move);
      u.moves.push_back(st.move);
      u.states.push_back(cur);
    }
  }
  return u;
}

bool check_tgw_at(const TimedAutomaton& ta, const UnrolledPlay& u, int dim,
                  long long lambda, size_t start) {
  if (start >= u.states.size()) throw Error("window start beyond horizon");
  const Rational t0 = u.states[start].val.global_time;
  int mn = prio(ta, u.states[start], dim);
  for (size_t j = start; j < u.states.size(); ++j) {
    mn = std::min(mn, prio(ta, u.states[j], dim));
    Rational elapsed = u.states[j].val.global_time - t0;
    if (mn % 2 == 0) return elapsed < Rational(lambda);
    if (elapsed >= Rational(lambda)) return false;
  }
  throw Error("unrolling horizon too short for window check");
}

namespace {

UnrolledPlay unroll_for_checks(const TimedAutomaton& ta, const LassoPlay& pi,
                               const PrioritySpec& spec, int extra_cycles) {
  long long lmax = 1;
  for (long long l : spec.lambda) lmax = std::max(lmax, l);
  Rational dur(0);
  for (const auto& s : pi.prefix) dur += s.move.delay;
  dur += pi.cycle_duration() * Rational(extra_cycles);
  dur += Rational(2 * lmax + 1);
  return unroll(ta, pi, dur, extra_cycles + 2);
}

}  // namespace

bool check_tgw(const TimedAutomaton& ta, const LassoPlay& pi,
               const PrioritySpec& spec, int dim, size_t start) {
  UnrolledPlay u = unroll_for_checks(ta, pi, spec, 2);
  return check_tgw_at(ta, u, dim, spec.lambda.at(dim), start);
}

bool check_dtw(const TimedAutomaton& ta, const LassoPlay& pi, const PrioritySpec& spec) {
  if (!pi.divergent()) throw Error("direct window check requires a divergent lasso");
  UnrolledPlay u = unroll_for_checks(ta, pi, spec, 3);
  size_t starts = pi.prefix.size() + 2 * pi.cycle.size();
  for (int dim = 0; dim < spec.dimension(); ++dim)
    for (size_t n = 0; n <= starts; ++n)
      if (!check_tgw_at(ta, u, dim, spec.lambda[dim], n)) return false;
  return true;
}

bool check_tw(const TimedAutomaton& ta, const LassoPlay& pi, const PrioritySpec& spec) {
  if (!pi.divergent()) throw Error("window check requires a divergent lasso");
  UnrolledPlay u = unroll_for_checks(ta, pi, spec, 4);
  size_t p = pi.prefix.size(), c = pi.cycle.size();
  // Window verdicts are periodic past the prefix, so one period past the
  // last candidate start covers all later ones.
  auto dtw_from = [&](size_t s) {
    for (int dim = 0; dim < spec.dimension(); ++dim)
      for (size_t n = s; n < p + 3 * c; ++n)
        if (!check_tgw_at(ta, u, dim, spec.lambda[dim], n)) return false;
    return true;
  };
  for (size_t s = 0; s <= p + 2 * c; ++s)
    if (dtw_from(s)) return true;
  return false;
}

bool check_parity(const TimedAutomaton& ta, const LassoPlay& pi, int dim) {
  int mn = prio(ta, pi.cycle.front().before, dim);
  for (const auto& st : pi.cycle) mn = std::min(mn, prio(ta, st.before, dim));
  return mn % 2 == 0;
}

Play path_as_play(const LassoPlay& pi, const TimedAutomaton& ta,
                  const Rational& min_duration, int min_cycles) {
  UnrolledPlay u = unroll(ta, pi, min_duration, min_cycles);
  Play out;
  for (size_t i = 0; i < u.moves.size(); ++i)
    out.steps.push_back({u.states[i], Move{u.moves[i].delay, kBot}, u.moves[i]});
  out.last = u.states.back();
  return out;
}

namespace {

// Time to the earliest window expiry among the tracked odd dimensions, or
// nullopt when every dimension is closed.
std::optional<Rational> time_to_expiry(const ExpandedGame& xg, const PrioritySpec& spec,
                                       const State& bar) {
  const ExpandedTag& tag = xg.ex.tags.at(bar.loc);
  std::optional<Rational> t;
  for (int i = 0; i < xg.ex.dims; ++i) {
    if (tag.q.at(i) % 2 == 0) continue;
    Rational left = Rational(spec.lambda[i]) - bar.val.values.at(xg.ex.z_clocks[i]);
    if (!t || left < *t) t = left;
  }
  return t;
}

}  // namespace

Play expand_play(const TimedGame& g, const ExpandedGame& xg,
                 const PrioritySpec& spec, const Play& pi) {
  const TimedAutomaton& xta = xg.ex.ta;
  const int base_clocks = xg.ex.base_clocks;

  auto mk_bar = [&](const State& s) {
    State bar;
    bar.loc = xg.ex.loc_of(s.loc, g.ta.locations.at(s.loc).priorities);
    bar.val.values = s.val.values;
    bar.val.values.resize(xta.clocks.size(), Rational(0));
    bar.val.global_time = s.val.global_time;
    return bar;
  };

  Play out;
  State bar = pi.steps.empty() ? mk_bar(pi.last) : mk_bar(pi.steps.front().before);
  out.last = bar;

  for (size_t n = 0; n < pi.steps.size(); ++n) {
    const GameStep& gs = pi.steps[n];
    const State& next = n + 1 < pi.steps.size() ? pi.steps[n + 1].before : pi.last;

    auto via1 = try_step(g.ta, gs.before, gs.m1);
    int primary = (via1 && *via1 == next) ? 1 : 2;
    Move mp = primary == 1 ? gs.m1 : gs.m2;
    Move mo = primary == 1 ? gs.m2 : gs.m1;
    int beta_other = primary == 1 ? xg.ex.beta2 : xg.ex.beta1;

    Rational rem_p = mp.delay, rem_o = mo.delay;

    // Detour through bad locations while the realized delay would let a
    // tracked window expire.
    while (true) {
      auto texp = time_to_expiry(xg, spec, bar);
      if (!texp || rem_p < *texp) break;
      Move b1{*texp, xg.ex.beta1}, b2{*texp, xg.ex.beta2};
      State in_bad = step(xta, bar, b1);
      out.steps.push_back({bar, b1, b2});
      bar = in_bad;
      Move e1{Rational(0), xg.ex.beta1}, e2{Rational(0), xg.ex.beta2};
      State reopened = step(xta, bar, e1);
      out.steps.push_back({bar, e1, e2});
      bar = reopened;
      rem_p -= *texp;
      rem_o -= *texp;
    }

    Move fmp{rem_p, mp.action};
    Move fmo{rem_o, mo.action};
    if (!move_enabled(xta, bar, fmo)) {
      auto texp = time_to_expiry(xg, spec, bar);
      fmo = Move{texp ? *texp : rem_o, beta_other};
    }
    State nb = step(xta, bar, fmp);
    if (primary == 1)
      out.steps.push_back({bar, fmp, fmo});
    else
      out.steps.push_back({bar, fmo, fmp});
    bar = nb;

    const ExpandedTag& tag = xg.ex.tags.at(bar.loc);
    if (tag.bad || tag.base != next.loc)
      throw Error("expansion lost track of the base location");
    for (int c = 0; c < base_clocks; ++c)
      if (!(bar.val.values[c] == next.val.values[c]))
        throw Error("expansion diverged from the base valuation");
  }
  out.last = bar;
  return out;
}

Play project_play(const ExpandedGame& xg, const Play& bar) {
  const int base_clocks = xg.ex.base_clocks;
  auto proj_state = [&](const State& s) {
    State out;
    out.loc = xg.ex.tags.at(s.loc).base;
    out.val.values.assign(s.val.values.begin(), s.val.values.begin() + base_clocks);
    out.val.global_time = s.val.global_time;
    return out;
  };
  auto proj_move = [&](const Move& m) {
    if (!m.is_delay() && (m.action == xg.ex.beta1 || m.action == xg.ex.beta2))
      return Move{m.delay, kBot};
    return m;
  };
  Play out;
  for (const auto& st : bar.steps)
    out.steps.push_back({proj_state(st.before), proj_move(st.m1), proj_move(st.m2)});
  out.last = proj_state(bar.last);
  return out;
}

bool visits_bad(const ExpandedGame& xg, const Play& bar) {
  return count_bad_states(xg, bar) > 0;
}

size_t count_bad_states(const ExpandedGame& xg, const Play& bar) {
  size_t n = 0;
  for (const auto& st : bar.steps)
    if (xg.ex.tags.at(st.before.loc).bad) ++n;
  if (xg.ex.tags.at(bar.last.loc).bad) ++n;
  return n;
}

namespace {

LassoPlay lasso_from_closed(const TimedAutomaton& ta, const ClosedLasso& cl) {
  State cur{ta.initial, ClockValuation::zero(ta.clocks.size())};
  auto as_move = [&](const CStep& s) {
    if (s.kind == RGEdge::Action)
      return Move{s.delay, ta.edges.at(s.ta_edge).action};
    return Move{s.delay, kBot};  // delays and ticks
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

}  // namespace

void enumerate_lassos(const TimedAutomaton& ta, const LassoLimits& limits,
                      const std::function<bool(const LassoPlay&)>& yield) {
  RegionGraph rg = build_region_graph(ta);
  const int n = static_cast<int>(rg.num_vertices());
  int produced = 0;

  // Prefix paths from init, grouped by endpoint, bounded depth-first.
  std::vector<std::vector<std::vector<int>>> prefixes(n);
  {
    std::vector<int> visits(n, 0), path;
    std::function<void(int)> dfs = [&](int v) {
      if (prefixes[v].size() < static_cast<size_t>(limits.prefixes_per_cycle))
        prefixes[v].push_back(path);
      if (path.size() >= static_cast<size_t>(limits.max_prefix_len)) return;
      for (int ei : rg.out[v]) {
        int u = rg.edges[ei].to;
        if (visits[u] >= limits.prefix_visit_cap) continue;
        ++visits[u];
        path.push_back(ei);
        dfs(u);
        path.pop_back();
        --visits[u];
      }
    };
    visits[rg.init] = 1;
    dfs(rg.init);
  }

  // Simple positive-duration cycles, anchored at their smallest vertex.
  std::vector<int> path;
  std::vector<bool> onpath(n, false);
  bool stop = false;
  std::function<void(int, int, bool)> dfs_cycle = [&](int root, int v, bool has_delay) {
    if (stop) return;
    for (int ei : rg.out[v]) {
      if (stop) return;
      const RGEdge& e = rg.edges[ei];
      int u = e.to;
      bool delay_now = has_delay || e.kind == RGEdge::Delay;
      if (u == root) {
        if (!delay_now) continue;
        path.push_back(ei);
        std::vector<int> cycle = path;
        path.pop_back();
        for (const auto& pre : prefixes[root]) {
          if (produced >= limits.max_count) { stop = true; break; }
          auto closed = concretize_lasso(rg, pre, cycle);
          if (!closed) continue;
          ++produced;
          if (!yield(lasso_from_closed(ta, *closed))) { stop = true; break; }
        }
        continue;
      }
      if (u < root || onpath[u]) continue;
      if (path.size() + 1 >= static_cast<size_t>(limits.max_cycle_len)) continue;
      onpath[u] = true;
      path.push_back(ei);
      dfs_cycle(root, u, delay_now);
      path.pop_back();
      onpath[u] = false;
    }
  };
  for (int root = 0; root < n && !stop; ++root) {
    if (prefixes[root].empty()) continue;
    onpath[root] = true;
    dfs_cycle(root, root, false);
    onpath[root] = false;
  }
}

LassoPlay parse_trace(const TimedAutomaton& ta, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int section = 0;  // 0 none, 1 prefix, 2 cycle
  State cur{ta.initial, ClockValuation::zero(ta.clocks.size())};
  LassoPlay pi;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string a, b, c;
    if (!(ls >> a)) continue;
    if (a == "prefix:") { section = 1; continue; }
    if (a == "cycle:") { section = 2; continue; }
    if (section == 0)
      throw Error("line " + std::to_string(lineno) + ": step before a section header");
    if (!(ls >> b >> c))
      throw Error("line " + std::to_string(lineno) + ": expected LOC DELAY ACTION");
    int loc = ta.find_location(a);
    if (loc < 0) throw Error("line " + std::to_string(lineno) + ": unknown location " + a);
    if (first && loc != ta.initial)
      throw Error("line " + std::to_string(lineno) + ": trace must start at " +
                  ta.locations.at(ta.initial).name);
    if (loc != cur.loc)
      throw Error("line " + std::to_string(lineno) + ": expected location " +
                  ta.locations.at(cur.loc).name);
    Move m;
    try {
      m.delay = Rational::parse(b);
    } catch (const std::exception&) {
      throw Error("line " + std::to_string(lineno) + ": bad delay " + b);
    }
    if (c == "_") {
      m.action = kBot;
    } else {
      m.action = ta.find_action(c);
      if (m.action < 0)
        throw Error("line " + std::to_string(lineno) + ": unknown action " + c);
    }
    State next;
    try {
      next = step(ta, cur, m);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
    (section == 1 ? pi.prefix : pi.cycle).push_back({cur, m});
    cur = next;
    first = false;
  }
  if (pi.cycle.empty()) throw Error("trace has no cycle section steps");
  pi.cycle_end = cur;
  validate_lasso(ta, pi);
  return pi;
}

std::string emit_trace(const TimedAutomaton& ta, const LassoPlay& pi) {
  std::ostringstream out;
  auto emit = [&](const std::vector<PlayStep>& steps) {
    for (const auto& s : steps)
      out << ta.locations.at(s.before.loc).name << " " << s.move.delay.str() << " "
          << (s.move.is_delay() ? "_" : ta.actions.at(s.move.action)) << "\n";
  };
  out << "prefix:\n";
  emit(pi.prefix);
  out << "cycle:\n";
  emit(pi.cycle);
  return out.str();
}

}  // namespace twp
