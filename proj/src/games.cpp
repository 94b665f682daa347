#include "twp/games.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace twp {

bool TwoStateDPA::accepts(const std::vector<bool>& prefix,
                          const std::vector<bool>& cycle) const {
  int state = 0;
  for (bool b : prefix) state = next(state, b);
  // Iterate the cycle until the entry state repeats, then take the minimum
  // priority over one full loop.
  int entry = state;
  std::vector<int> seen;
  while (true) {
    seen.push_back(entry);
    int s = entry;
    for (bool b : cycle) s = next(s, b);
    if (std::find(seen.begin(), seen.end(), s) != seen.end() && s == entry) break;
    if (std::find(seen.begin(), seen.end(), s) != seen.end()) { entry = s; break; }
    entry = s;
  }
  int s = entry, mn = priority(entry);
  for (bool b : cycle) {
    s = next(s, b);
    mn = std::min(mn, priority(s));
  }
  return mn % 2 == 0;
}

int round_priority(GameObjective obj, bool mem_in, const ArenaEvents& ev) {
  (void)obj;  // both tables share this shape; the memory meaning differs
  if (ev.ticks > 0) return mem_in ? 1 : 2;
  return ev.blamed ? 3 : 4;
}

int next_memory(GameObjective obj, bool mem_in, const ArenaEvents& ev) {
  if (obj == GameObjective::Safety) return (mem_in || ev.bad) ? 1 : 0;
  if (ev.ticks > 0) return ev.bad ? 1 : 0;  // reset at the tick
  return (mem_in || ev.bad) ? 1 : 0;
}

namespace {

// Delay chain with eager ticks: at each position take the tick when the
// gadget clock has completed a unit, then follow the delay edge. Stops at
// the invariant boundary or when the chain starts looping. Each position
// stores the ticks crossed since the previous one.
std::vector<RegionGame::ChainPos> build_chain(const RegionGraph& rg, int v) {
  std::vector<RegionGame::ChainPos> chain;
  std::vector<bool> seen(rg.num_vertices(), false);
  int cur = v;
  std::vector<int> pending;
  int seg_ticks = 0;
  while (true) {
    for (int ei : rg.out[cur]) {
      if (rg.edges[ei].kind == RGEdge::Tick) {
        pending.push_back(ei);
        cur = rg.edges[ei].to;
        ++seg_ticks;
        break;
      }
    }
    if (seen[cur]) break;
    seen[cur] = true;
    RegionGame::ChainPos pos;
    pos.vertex = cur;
    pos.ticks = seg_ticks;
    pos.edges_from_prev = pending;
    pending.clear();
    seg_ticks = 0;
    const Region& r = rg.vregion[cur];
    pos.punctual = chain.empty() || r.has_zero_frac();
    chain.push_back(pos);
    int nxt = -1, nei = -1;
    for (int ei : rg.out[cur])
      if (rg.edges[ei].kind == RGEdge::Delay) { nxt = rg.edges[ei].to; nei = ei; break; }
    if (nxt < 0) break;
    pending.push_back(nei);
    cur = nxt;
  }
  return chain;
}

}  // namespace

std::unique_ptr<RegionGame> build_region_game(const TimedGame& g, GameObjective obj,
                                              const std::vector<bool>& bad_locations) {
  auto game = std::make_unique<RegionGame>();
  game->objective = obj;
  game->game = g;
  game->bad_location = bad_locations;
  game->rg = snz_transform(game->game.ta, bad_locations);
  RegionGraph& rg = game->rg;
  rg.ta = &game->game.ta;  // keep the pointer inside this object

  const TimedAutomaton& ta = game->game.ta;
  const auto& owner = game->game.owner;
  const int nverts = static_cast<int>(rg.num_vertices());

  game->chains.resize(nverts);
  game->vertex_moves.resize(nverts);
  for (int v = 0; v < nverts; ++v) {
    game->chains[v] = build_chain(rg, v);
    auto& moves = game->vertex_moves[v];
    const auto& chain = game->chains[v];
    for (size_t ci = 0; ci < chain.size(); ++ci) {
      moves.push_back({static_cast<int>(ci), kBot, -1});
      for (int ei : rg.out[chain[ci].vertex]) {
        const RGEdge& e = rg.edges[ei];
        if (e.kind != RGEdge::Action) continue;
        int act = ta.edges.at(e.ta_edge).action;
        if (owner.at(act) == 1)
          moves.push_back({static_cast<int>(ci), act, e.ta_edge});
      }
    }
  }

  std::map<std::tuple<int, int, int>, int> node_ids;  // (vertex, mem, move_idx|-1)
  std::deque<int> work;
  auto node_id = [&](int vertex, int mem, int move_idx) {
    auto key = std::make_tuple(vertex, mem, move_idx);
    auto it = node_ids.find(key);
    if (it != node_ids.end()) return it->second;
    int id = static_cast<int>(game->nodes.size());
    node_ids.emplace(key, id);
    game->nodes.push_back({move_idx >= 0, vertex, mem, move_idx});
    game->p1_choices.emplace_back();
    game->resolutions.emplace_back();
    work.push_back(id);
    return id;
  };

  int mem0 = bad_locations[rg.vloc[rg.init]] ? 1 : 0;
  game->init_node = node_id(rg.init, mem0, -1);

  // Target vertex and acceptance events of realizing (chain_idx, action).
  auto realize_move = [&](int v, const RegionGame::MoveDesc& m) {
    const auto& pos = game->chains[v][m.chain_idx];
    int target = pos.vertex;
    ArenaEvents ev;
    ev.ticks = 0;
    for (int ci = 0; ci <= m.chain_idx; ++ci) ev.ticks += game->chains[v][ci].ticks;
    if (m.action != kBot) {
      for (int ei : rg.out[pos.vertex]) {
        const RGEdge& e = rg.edges[ei];
        if (e.kind == RGEdge::Action && e.ta_edge == m.ta_edge) {
          target = e.to;
          break;
        }
      }
    }
    ev.bad = game->bad_location[rg.vloc[target]];
    return std::make_pair(target, ev);
  };

  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    RegionGame::Node node = game->nodes[id];
    if (!node.is_move_node) {
      std::vector<int> choices;
      for (size_t mi = 0; mi < game->vertex_moves[node.vertex].size(); ++mi)
        choices.push_back(node_id(node.vertex, node.mem, static_cast<int>(mi)));
      game->p1_choices[id] = std::move(choices);  // node_id may reallocate
      continue;
    }

    const RegionGame::MoveDesc p1m = game->vertex_moves[node.vertex][node.move_idx];
    const auto& chain = game->chains[node.vertex];
    auto push = [&](const RegionGame::MoveDesc& realized, int realizer, bool blamed) {
      auto [target, ev] = realize_move(node.vertex, realized);
      ev.blamed = blamed;
      RegionGame::Transition t;
      t.events = ev;
      t.priority = round_priority(obj, node.mem != 0, ev);
      int mem2 = next_memory(obj, node.mem != 0, ev);
      t.target = node_id(target, mem2, -1);
      t.realizer = realizer;
      t.realized = realized;
      game->resolutions[id].push_back(t);
    };

    // Let player 1's move happen (player 2 ties or stays slower).
    push(p1m, 1, true);

    // Preempt strictly earlier along the chain.
    for (int cj = 0; cj < p1m.chain_idx; ++cj) {
      push({cj, kBot, -1}, 2, false);
      for (int ei : rg.out[chain[cj].vertex]) {
        const RGEdge& e = rg.edges[ei];
        if (e.kind != RGEdge::Action) continue;
        int act = ta.edges.at(e.ta_edge).action;
        if (owner.at(act) == 2) push({cj, act, e.ta_edge}, 2, false);
      }
    }

    // Same-position responses: strict undercut when the position is not
    // punctual (no blame), otherwise an exact tie resolved adversarially
    // (player 1 is blamed only when its own move yields the same state).
    {
      int ci = p1m.chain_idx;
      auto [t1, ev1] = realize_move(node.vertex, p1m);
      (void)ev1;
      auto same_pos = [&](const RegionGame::MoveDesc& m2) {
        auto [t2, ev2] = realize_move(node.vertex, m2);
        (void)ev2;
        bool blamed = chain[ci].punctual && t2 == t1;
        push(m2, 2, blamed);
      };
      if (!(p1m.action == kBot))
        same_pos({ci, kBot, -1});
      for (int ei : rg.out[chain[ci].vertex]) {
        const RGEdge& e = rg.edges[ei];
        if (e.kind != RGEdge::Action) continue;
        int act = ta.edges.at(e.ta_edge).action;
        if (owner.at(act) == 2) same_pos({ci, act, e.ta_edge});
      }
    }
  }
  return game;
}

void assign_priorities(RegionGame& game) {
  for (size_t mn = 0; mn < game.resolutions.size(); ++mn) {
    if (!game.nodes[mn].is_move_node) continue;
    for (auto& t : game.resolutions[mn])
      t.priority = round_priority(game.objective, game.nodes[mn].mem != 0, t.events);
  }
}

namespace {

// Rounds become relay nodes carrying the round priority; choice nodes are
// neutral (priority 4 never lowers the minimum seen infinitely often).
std::pair<ParityGraph, std::vector<int>> flatten(const RegionGame& game) {
  ParityGraph s;
  std::vector<int> arena_node;
  size_t n = game.num_nodes();
  s.owner.assign(n, 1);
  s.priority.assign(n, 4);
  s.succ.resize(n);
  arena_node.resize(n);
  for (size_t i = 0; i < n; ++i) {
    arena_node[i] = static_cast<int>(i);
    s.owner[i] = game.nodes[i].is_move_node ? 2 : 1;
  }
  for (size_t i = 0; i < n; ++i) {
    if (!game.nodes[i].is_move_node) {
      for (int mn : game.p1_choices[i]) s.succ[i].push_back(mn);
      continue;
    }
    for (const auto& t : game.resolutions[i]) {
      int relay = static_cast<int>(s.owner.size());
      s.owner.push_back(2);
      s.priority.push_back(t.priority);
      s.succ.push_back({t.target});
      arena_node.push_back(-1);
      s.succ[i].push_back(relay);
    }
  }
  return {std::move(s), std::move(arena_node)};
}

struct Zielonka {
  const ParityGraph& g;
  std::vector<int> strat;  // per node, successor chosen by player 1

  explicit Zielonka(const ParityGraph& game)
      : g(game), strat(game.owner.size(), -1) {}

  // Attractor of `target` for player sigma within `active`; records a
  // strategy for player 1's nodes pulled in through an edge.
  std::vector<bool> attractor(int sigma, const std::vector<bool>& target,
                              const std::vector<bool>& active) {
    size_t n = g.owner.size();
    std::vector<bool> attr(n, false);
    std::vector<int> out_count(n, 0);
    std::vector<std::vector<int>> rin(n);
    for (size_t v = 0; v < n; ++v) {
      if (!active[v]) continue;
      for (int u : g.succ[v])
        if (active[u]) {
          ++out_count[v];
          rin[u].push_back(static_cast<int>(v));
        }
    }
    std::deque<int> work;
    for (size_t v = 0; v < n; ++v)
      if (active[v] && target[v]) {
        attr[v] = true;
        work.push_back(static_cast<int>(v));
      }
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (int u : rin[v]) {
        if (attr[u]) continue;
        if (g.owner[u] == sigma) {
          attr[u] = true;
          // Overwrite: entries left over from abandoned attempts are stale.
          if (sigma == 1) strat[u] = v;
          work.push_back(u);
        } else if (--out_count[u] == 0) {
          attr[u] = true;
          work.push_back(u);
        }
      }
    }
    return attr;
  }

  // Winning set of player 1 within `active`. Every solve of a region first
  // clears player 1's strategy entries there, so entries written by the
  // enclosing call's attractors (always disjoint regions) survive and
  // winners keep the entry from the call that finally claims them.
  std::vector<bool> solve(const std::vector<bool>& active) {
    size_t n = g.owner.size();
    std::vector<bool> w1(n, false);
    int p = INT_MAX;
    for (size_t v = 0; v < n; ++v) {
      if (active[v]) {
        if (g.owner[v] == 1) strat[v] = -1;
        p = std::min(p, g.priority[v]);
      }
    }
    if (p == INT_MAX) return w1;  // empty subgame

    int sigma = (p % 2 == 0) ? 1 : 2;
    std::vector<bool> target(n, false);
    for (size_t v = 0; v < n; ++v)
      if (active[v] && g.priority[v] == p) target[v] = true;

    std::vector<bool> attr = attractor(sigma, target, active);
    std::vector<bool> rest = active;
    for (size_t v = 0; v < n; ++v)
      if (attr[v]) rest[v] = false;
    std::vector<bool> w1_rest = solve(rest);

    std::vector<bool> opp_rest(n, false);
    bool opp_nonempty = false;
    for (size_t v = 0; v < n; ++v) {
      if (rest[v] && (sigma == 1 ? !w1_rest[v] : w1_rest[v])) {
        opp_rest[v] = true;
        opp_nonempty = true;
      }
    }

    if (!opp_nonempty) {
      // sigma wins all of `active`: attractor entries plus the recursive
      // entries; target nodes may follow any successor in the subgame.
      if (sigma == 1) {
        for (size_t v = 0; v < n; ++v) {
          if (!active[v]) continue;
          w1[v] = true;
          if (g.owner[v] == 1 && strat[v] == -1)
            for (int u : g.succ[v])
              if (active[u]) { strat[v] = u; break; }
        }
      }
      return sigma == 1 ? active : w1;
    }

    int opp = 3 - sigma;
    std::vector<bool> oppattr = attractor(opp, opp_rest, active);
    std::vector<bool> rest2 = active;
    for (size_t v = 0; v < n; ++v)
      if (oppattr[v]) rest2[v] = false;
    std::vector<bool> w1_rest2 = solve(rest2);
    for (size_t v = 0; v < n; ++v) {
      if (!active[v]) continue;
      w1[v] = oppattr[v] ? (opp == 1) : w1_rest2[v];
    }
    return w1;
  }
};

}  // namespace

ParityGraphSolution solve_parity_graph(const ParityGraph& g) {
  Zielonka z(g);
  std::vector<bool> active(g.owner.size(), true);
  ParityGraphSolution sol;
  sol.p1_wins = z.solve(active);
  sol.strategy = std::move(z.strat);
  for (size_t v = 0; v < g.owner.size(); ++v)
    if (!sol.p1_wins[v] || g.owner[v] != 1) sol.strategy[v] = -1;
  return sol;
}

ParitySolution solve_parity(const RegionGame& game) {
  auto [sg, arena_node] = flatten(game);
  ParityGraphSolution flat = solve_parity_graph(sg);

  ParitySolution sol;
  sol.p1_wins.assign(game.num_nodes(), false);
  sol.strategy.assign(game.num_nodes(), -1);
  for (size_t v = 0; v < sg.owner.size(); ++v) {
    if (arena_node[v] < 0) continue;
    sol.p1_wins[arena_node[v]] = flat.p1_wins[v];
    if (sg.owner[v] == 1 && flat.strategy[v] >= 0)
      sol.strategy[arena_node[v]] = arena_node[flat.strategy[v]];
  }
  return sol;
}

RegionStrategy extract_strategy(const RegionGame& game, const ParitySolution& sol) {
  RegionStrategy out;
  for (size_t i = 0; i < game.num_nodes(); ++i) {
    if (game.nodes[i].is_move_node || !sol.p1_wins[i]) continue;
    int mv = sol.strategy[i];
    if (mv < 0) continue;
    RegionStrategy::Entry e;
    e.node = static_cast<int>(i);
    e.vertex = game.nodes[i].vertex;
    e.mem = game.nodes[i].mem;
    e.move = game.vertex_moves[e.vertex][game.nodes[mv].move_idx];
    out.entries.push_back(e);
  }
  return out;
}

RealizeResult realize(const TimedGame& g, const PrioritySpec& spec, bool direct) {
  ExpandedGame xg = expand_game(g, spec);
  std::vector<bool> bad;
  for (const auto& t : xg.ex.tags) bad.push_back(t.bad);
  RealizeResult out;
  out.arena = build_region_game(xg.game(),
                                direct ? GameObjective::Safety : GameObjective::CoBuchi,
                                bad);
  out.solution = solve_parity(*out.arena);
  out.realizable = out.solution.p1_wins[out.arena->init_node];
  if (out.realizable)
    out.strategy = extract_strategy(*out.arena, out.solution);
  return out;
}

bool solve_safety_game(const TimedGame& g, const std::vector<bool>& unsafe) {
  auto arena = build_region_game(g, GameObjective::Safety, unsafe);
  ParitySolution sol = solve_parity(*arena);
  return sol.p1_wins[arena->init_node];
}

std::string strategy_dump(const RegionGame& game, const RegionStrategy& strat) {
  std::ostringstream out;
  for (const auto& e : strat.entries) {
    out << "node " << e.node << " at " << game.rg.vertex_str(e.vertex)
        << " mem=" << e.mem << " -> chain+" << e.move.chain_idx << " ";
    if (e.move.action == kBot) out << "_";
    else out << game.game.ta.actions.at(e.move.action);
    out << "\n";
  }
  return out.str();
}

std::string region_game_dot(const RegionGame& game, const ParitySolution& sol) {
  std::ostringstream out;
  out << "digraph arena {\n";
  for (size_t i = 0; i < game.num_nodes(); ++i) {
    const auto& n = game.nodes[i];
    out << "  n" << i << " [shape=" << (n.is_move_node ? "box" : "ellipse")
        << ", label=\"" << game.rg.vertex_str(n.vertex) << "\\nmem=" << n.mem
        << "\", color=" << (sol.p1_wins[i] ? "green" : "red") << "];\n";
  }
  for (size_t i = 0; i < game.num_nodes(); ++i) {
    if (!game.nodes[i].is_move_node) {
      for (int mn : game.p1_choices[i]) out << "  n" << i << " -> n" << mn << ";\n";
    } else {
      for (const auto& t : game.resolutions[i])
        out << "  n" << i << " -> n" << t.target << " [label=\"p" << t.priority
            << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

namespace {

// Concrete delay of walking the chain to `chain_idx` from `vals`, plus the
// updated valuation. Mirrors the canonical policy used elsewhere.
std::pair<Rational, std::vector<Rational>> walk_chain(const RegionGame& game, int v,
                                                      int chain_idx,
                                                      std::vector<Rational> vals) {
  Rational total(0);
  const auto& chain = game.chains[v];
  for (int ci = 0; ci <= chain_idx; ++ci) {
    for (int ei : chain[ci].edges_from_prev) {
      const RGEdge& e = game.rg.edges[ei];
      if (e.kind == RGEdge::Tick) {
        vals[game.rg.theta] = Rational(0);
        continue;
      }
      const Region& r = game.rg.vregion[e.from];
      Rational d;
      if (r.time_closed()) d = Rational(1);
      else {
        int top = r.top_class_clock();
        Rational maxfrac = top >= 0 ? vals[top] - Rational(r.parts[top].ip) : Rational(0);
        Rational upper = Rational(1) - maxfrac;
        d = r.has_zero_frac() ? upper * Rational(1, 2) : upper;
      }
      for (auto& x : vals) x += d;
      total += d;
    }
  }
  return {total, vals};
}

}  // namespace

Play simulate_strategy(const RegionGame& game, const ParitySolution& sol,
                       std::mt19937_64& rng, int rounds, bool stalling) {
  const TimedAutomaton& ta = game.game.ta;
  const RegionGraph& rg = game.rg;

  // Concrete valuation over the graph's clocks (model clocks + gadget).
  std::vector<Rational> vals(rg.nclocks, Rational(0));
  Rational now(0);
  int node = game.init_node;

  auto model_state = [&](const std::vector<Rational>& v, int vertex) {
    State s;
    s.loc = rg.vloc[vertex];
    s.val.values.assign(v.begin(), v.begin() + ta.clocks.size());
    s.val.global_time = now;
    return s;
  };

  Play play;
  int vertex = rg.vloc.empty() ? 0 : game.nodes[node].vertex;

  for (int round = 0; round < rounds; ++round) {
    if (!sol.p1_wins[node])
      throw Error("simulation left the winning region");
    int move_node = sol.strategy[node];
    if (move_node < 0) throw Error("winning node without a strategy move");
    const auto& p1m = game.vertex_moves[vertex][game.nodes[move_node].move_idx];

    const auto& menu = game.resolutions[move_node];
    size_t pick_idx;
    if (stalling) {
      // Resolve as early as possible, breaking ties randomly.
      int best = INT_MAX;
      for (const auto& t : menu) best = std::min(best, t.realized.chain_idx);
      std::vector<size_t> mins;
      for (size_t i = 0; i < menu.size(); ++i)
        if (menu[i].realized.chain_idx == best) mins.push_back(i);
      pick_idx = mins[std::uniform_int_distribution<size_t>(0, mins.size() - 1)(rng)];
    } else {
      pick_idx = std::uniform_int_distribution<size_t>(0, menu.size() - 1)(rng);
    }
    const auto& pick = menu[pick_idx];

    // Concrete moves. Player 1 leaves slack within non-punctual positions
    // so that strict undercuts are realizable.
    auto [d1_base, vals1] = walk_chain(game, vertex, p1m.chain_idx, vals);
    Rational room1 = Rational(0);
    if (!game.chains[vertex][p1m.chain_idx].punctual) {
      const Region& r = rg.vregion[game.chains[vertex][p1m.chain_idx].vertex];
      int top = r.top_class_clock();
      Rational maxfrac = top >= 0 ? vals1[top] - Rational(r.parts[top].ip) : Rational(0);
      room1 = (Rational(1) - maxfrac) * Rational(1, 2);
    }
    Rational d1 = d1_base + room1 * Rational(1, 2);
    Move m1{d1, p1m.action};

    auto [d2_base, vals2] = walk_chain(game, vertex, pick.realized.chain_idx, vals);
    Rational d2;
    if (pick.realizer == 1) {
      d2 = d1;  // opponent shadows with an equal delay
    } else if (pick.realized.chain_idx == p1m.chain_idx) {
      bool tie_same = pick.events.blamed;
      d2 = tie_same || game.chains[vertex][p1m.chain_idx].punctual
               ? d1
               : d1_base + room1 * Rational(1, 4);
    } else {
      Rational room2 = Rational(0);
      if (!game.chains[vertex][pick.realized.chain_idx].punctual) {
        const Region& r = rg.vregion[game.chains[vertex][pick.realized.chain_idx].vertex];
        int top = r.top_class_clock();
        Rational maxfrac = top >= 0 ? vals2[top] - Rational(r.parts[top].ip) : Rational(0);
        room2 = (Rational(1) - maxfrac) * Rational(1, 4);
      }
      d2 = d2_base + room2;
    }
    Move m2{d2, pick.realizer == 1 ? kBot : pick.realized.action};

    // Realize the picked transition concretely.
    const auto& realized = pick.realized;
    auto [dr, vr] = walk_chain(game, vertex, realized.chain_idx, vals);
    Rational dreal = pick.realizer == 1 ? d1 : d2;
    Rational extra = dreal - dr;
    for (auto& x : vr) x += extra;
    if (realized.action != kBot) {
      const Edge& e = ta.edges.at(realized.ta_edge);
      for (int c : e.resets) vr[c] = Rational(0);
    }

    State before = model_state(vals, vertex);
    play.steps.push_back({before, m1, m2});
    now += dreal;
    vals = vr;
    vertex = game.nodes[pick.target].vertex;
    node = pick.target;
  }
  play.last = model_state(vals, vertex);
  return play;
}

}  // namespace twp
