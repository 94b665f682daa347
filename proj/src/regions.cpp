#include "twp/regions.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace twp {

bool Region::time_closed() const {
  for (const auto& p : parts)
    if (!p.above) return false;
  return true;
}

bool Region::has_zero_frac() const {
  for (const auto& p : parts)
    if (!p.above && p.fc == 0) return true;
  return false;
}

int Region::top_class_clock() const {
  int best = -1, bestfc = 0;
  for (size_t i = 0; i < parts.size(); ++i)
    if (!parts[i].above && parts[i].fc > bestfc) {
      bestfc = parts[i].fc;
      best = static_cast<int>(i);
    }
  return best;
}

std::string Region::str(const std::vector<std::string>& names,
                        const std::vector<int>& maxc) const {
  std::ostringstream out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out << " ";
    const auto& p = parts[i];
    out << names.at(i);
    if (p.above) out << ">" << maxc.at(i);
    else if (p.fc == 0) out << "=" << p.ip;
    else out << "~" << p.ip << "+f" << p.fc;
  }
  return out.str();
}

std::vector<int> max_constants(const TimedAutomaton& ta) {
  std::vector<int> maxc(ta.clocks.size(), 0);
  auto scan = [&maxc](const ClockConstraint& g) {
    for (const auto& a : g.atoms)
      maxc.at(a.clock) = std::max(maxc.at(a.clock), static_cast<int>(a.bound));
  };
  for (const auto& l : ta.locations) scan(l.invariant);
  for (const auto& e : ta.edges) scan(e.guard);
  return maxc;
}

namespace {

// Renumber nonzero fractional classes to 1..m preserving order.
void canonicalize(Region& r) {
  std::vector<int> used;
  for (const auto& p : r.parts)
    if (!p.above && p.fc > 0) used.push_back(p.fc);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (auto& p : r.parts) {
    if (p.above) { p.fc = 0; continue; }
    if (p.fc > 0) {
      auto it = std::lower_bound(used.begin(), used.end(), p.fc);
      p.fc = static_cast<int>(it - used.begin()) + 1;
    }
  }
  r.classes = static_cast<int>(used.size());
}

}  // namespace

Region region_of(const std::vector<Rational>& values, const std::vector<int>& maxc) {
  Region r;
  r.parts.resize(values.size());
  std::vector<Rational> fracs;
  for (size_t i = 0; i < values.size(); ++i) {
    const Rational& v = values[i];
    if (v.is_negative()) throw Error("negative clock value");
    if (v > Rational(maxc[i])) {
      r.parts[i] = {true, maxc[i], 0};
      continue;
    }
    long long ip = v.floor();
    Rational f = v.frac();
    r.parts[i].above = false;
    r.parts[i].ip = static_cast<int>(ip);
    if (f.is_zero()) {
      r.parts[i].fc = 0;
    } else {
      fracs.push_back(f);
      r.parts[i].fc = -1;  // fixed below
    }
  }
  std::sort(fracs.begin(), fracs.end());
  fracs.erase(std::unique(fracs.begin(), fracs.end()), fracs.end());
  for (size_t i = 0; i < values.size(); ++i) {
    if (r.parts[i].fc == -1) {
      Rational f = values[i].frac();
      auto it = std::lower_bound(fracs.begin(), fracs.end(), f);
      r.parts[i].fc = static_cast<int>(it - fracs.begin()) + 1;
    }
  }
  r.classes = static_cast<int>(fracs.size());
  return r;
}

bool region_satisfies(const Region& r, const ClockConstraint& g,
                      const std::vector<int>& maxc) {
  for (const auto& a : g.atoms) {
    const ClockRegionPart& p = r.parts.at(a.clock);
    if (a.bound > maxc.at(a.clock))
      throw Error("constraint bound exceeds the region's max constant");
    bool ok = false;
    if (p.above) {
      ok = (a.rel == Rel::Ge || a.rel == Rel::Gt);
    } else {
      switch (a.rel) {
        case Rel::Lt: ok = p.ip < a.bound; break;
        case Rel::Le: ok = p.ip < a.bound || (p.ip == a.bound && p.fc == 0); break;
        case Rel::Ge: ok = p.ip >= a.bound; break;
        case Rel::Gt: ok = p.ip > a.bound || (p.ip == a.bound && p.fc > 0); break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

Region region_reset(const Region& r, const std::vector<int>& resets) {
  Region out = r;
  for (int c : resets) out.parts.at(c) = {false, 0, 0};
  canonicalize(out);
  return out;
}

Region region_delay_succ(const Region& r, const std::vector<int>& maxc) {
  if (r.time_closed()) return r;
  Region out = r;
  if (r.has_zero_frac()) {
    // Integer-valued clocks slide into a fresh smallest class (or saturate).
    for (auto& p : out.parts)
      if (!p.above && p.fc > 0) p.fc += 1;
    for (size_t i = 0; i < out.parts.size(); ++i) {
      if (r.parts[i].above || r.parts[i].fc != 0) continue;
      auto& p = out.parts[i];
      if (p.ip == maxc[i]) p = {true, maxc[i], 0};
      else p.fc = 1;
    }
  } else {
    // The top class reaches the next integer.
    int top = r.top_class_clock();
    assert(top >= 0);
    int topfc = r.parts[top].fc;
    for (size_t i = 0; i < out.parts.size(); ++i) {
      auto& p = out.parts[i];
      if (p.above || r.parts[i].fc != topfc) continue;
      p.fc = 0;
      p.ip += 1;
      assert(p.ip <= maxc[i]);
    }
  }
  canonicalize(out);
  return out;
}

std::vector<Rational> region_representative(const Region& r,
                                            const std::vector<int>& maxc) {
  std::vector<Rational> out(r.parts.size());
  long long den = 2LL * (r.classes + 1);
  for (size_t i = 0; i < r.parts.size(); ++i) {
    const auto& p = r.parts[i];
    if (p.above) out[i] = Rational(maxc[i] + 1);
    else if (p.fc == 0) out[i] = Rational(p.ip);
    else out[i] = Rational(p.ip) + Rational(2LL * p.fc - 1, den);
  }
  return out;
}

namespace {

struct RegionKeyHash {
  size_t operator()(const std::vector<int>& k) const {
    size_t h = 1469598103934665603ull;
    for (int x : k) {
      h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

std::vector<int> region_key(int loc, const Region& r) {
  std::vector<int> key;
  key.reserve(r.parts.size() * 3 + 1);
  key.push_back(loc);
  for (const auto& p : r.parts) {
    key.push_back(p.above ? 1 : 0);
    key.push_back(p.ip);
    key.push_back(p.fc);
  }
  return key;
}

RegionGraph build_graph(const TimedAutomaton& ta, bool with_theta,
                        const std::vector<bool>* accepting) {
  RegionGraph g;
  g.ta = &ta;
  g.maxc = max_constants(ta);
  g.nclocks = static_cast<int>(ta.clocks.size());
  if (with_theta) {
    g.theta = g.nclocks;
    g.nclocks += 1;
    g.maxc.push_back(1);
  }

  std::unordered_map<std::vector<int>, int, RegionKeyHash> intern;
  std::deque<int> work;
  auto vertex = [&](int loc, const Region& r) {
    auto key = region_key(loc, r);
    auto it = intern.find(key);
    if (it != intern.end()) return it->second;
    int id = static_cast<int>(g.vloc.size());
    intern.emplace(std::move(key), id);
    g.vloc.push_back(loc);
    g.vregion.push_back(r);
    g.out.emplace_back();
    work.push_back(id);
    return id;
  };

  std::vector<Rational> zero(g.nclocks, Rational(0));
  Region r0 = region_of(zero, g.maxc);
  if (!region_satisfies(r0, ta.locations.at(ta.initial).invariant, g.maxc))
    throw Error("initial invariant rejects the zero valuation");
  g.init = vertex(ta.initial, r0);

  auto add_edge = [&g](RGEdge e) {
    int id = static_cast<int>(g.edges.size());
    g.edges.push_back(e);
    g.out[e.from].push_back(id);
  };

  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    int loc = g.vloc[v];
    Region r = g.vregion[v];

    Region rd = region_delay_succ(r, g.maxc);
    if (region_satisfies(rd, ta.locations.at(loc).invariant, g.maxc)) {
      int u = vertex(loc, rd);
      add_edge({RGEdge::Delay, v, u, -1, false});
    }

    for (size_t ei = 0; ei < ta.edges.size(); ++ei) {
      const Edge& e = ta.edges[ei];
      if (e.src != loc) continue;
      if (!region_satisfies(r, e.guard, g.maxc)) continue;
      Region rr = region_reset(r, e.resets);
      if (!region_satisfies(rr, ta.locations.at(e.dst).invariant, g.maxc)) continue;
      int u = vertex(e.dst, rr);
      add_edge({RGEdge::Action, v, u, static_cast<int>(ei), false});
    }

    if (with_theta) {
      const ClockRegionPart& tp = r.parts[g.theta];
      bool unit_elapsed = tp.above || (tp.ip == 1 && tp.fc == 0);
      if (unit_elapsed) {
        Region rt = region_reset(r, {g.theta});
        int u = vertex(loc, rt);
        bool marked = accepting && (*accepting)[loc];
        add_edge({RGEdge::Tick, v, u, -1, marked});
      }
    }
  }
  return g;
}

}  // namespace

int RegionGraph::delay_successor(int v) const {
  for (int ei : out[v])
    if (edges[ei].kind == RGEdge::Delay) return edges[ei].to;
  return -1;
}

std::string RegionGraph::vertex_str(int v) const {
  auto names = ta->clocks;
  if (theta >= 0) names.push_back("__theta");
  return ta->locations.at(vloc[v]).name + " | " + vregion[v].str(names, maxc);
}

RegionGraph build_region_graph(const TimedAutomaton& ta) {
  return build_graph(ta, false, nullptr);
}

RegionGraph snz_transform(const TimedAutomaton& ta,
                          const std::vector<bool>& accepting_locations) {
  return build_graph(ta, true, &accepting_locations);
}

std::vector<int> tarjan_scc(const RegionGraph& g) {
  int n = static_cast<int>(g.num_vertices());
  std::vector<int> comp(n, -1), low(n, 0), idx(n, -1), stk;
  std::vector<bool> onstk(n, false);
  int counter = 0, ncomp = 0;

  struct Frame { int v; size_t ei; };
  for (int root = 0; root < n; ++root) {
    if (idx[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    idx[root] = low[root] = counter++;
    stk.push_back(root);
    onstk[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.ei < g.out[f.v].size()) {
        int to = g.edges[g.out[f.v][f.ei++]].to;
        if (idx[to] == -1) {
          idx[to] = low[to] = counter++;
          stk.push_back(to);
          onstk[to] = true;
          frames.push_back({to, 0});
        } else if (onstk[to]) {
          low[f.v] = std::min(low[f.v], idx[to]);
        }
      } else {
        int v = f.v;
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        if (low[v] == idx[v]) {
          while (true) {
            int w = stk.back();
            stk.pop_back();
            onstk[w] = false;
            comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
      }
    }
  }
  return comp;
}

namespace {

// Vertices whose SCC contains a tick edge satisfying pred.
std::vector<bool> can_reach_tick_cycle(const RegionGraph& g,
                                       bool marked_only) {
  auto comp = tarjan_scc(g);
  int n = static_cast<int>(g.num_vertices());
  std::vector<bool> good(n, false);
  for (const auto& e : g.edges)
    if (e.kind == RGEdge::Tick && (!marked_only || e.marked) &&
        comp[e.from] == comp[e.to])
      good[e.from] = true;
  // Backward closure.
  std::vector<std::vector<int>> rin(n);
  for (const auto& e : g.edges) rin[e.to].push_back(e.from);
  std::deque<int> work;
  for (int v = 0; v < n; ++v)
    if (good[v]) work.push_back(v);
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    for (int u : rin[v])
      if (!good[u]) {
        good[u] = true;
        work.push_back(u);
      }
  }
  return good;
}

// BFS path as edge ids; `allowed` restricts vertices when non-null.
std::optional<std::vector<int>> bfs_path(const RegionGraph& g, int from, int to,
                                         const std::vector<int>* comp = nullptr) {
  int n = static_cast<int>(g.num_vertices());
  std::vector<int> pre(n, -1);
  std::deque<int> work{from};
  std::vector<bool> seen(n, false);
  seen[from] = true;
  if (from == to) return std::vector<int>{};
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    for (int ei : g.out[v]) {
      int u = g.edges[ei].to;
      if (seen[u]) continue;
      if (comp && (*comp)[u] != (*comp)[from]) continue;
      seen[u] = true;
      pre[u] = ei;
      if (u == to) {
        std::vector<int> path;
        int cur = to;
        while (cur != from) {
          path.push_back(pre[cur]);
          cur = g.edges[pre[cur]].from;
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      work.push_back(u);
    }
  }
  return std::nullopt;
}

// Min-cost path where vertices with few fractional classes are cheap;
// synchronized-phase cycles live in such regions. Returns edge ids.
std::optional<std::vector<int>> lowclass_path(const RegionGraph& g, int from, int to,
                                              const std::vector<int>& comp) {
  int n = static_cast<int>(g.num_vertices());
  std::vector<long long> dist(n, -1);
  std::vector<int> pre(n, -1);
  std::priority_queue<std::pair<long long, int>, std::vector<std::pair<long long, int>>,
                      std::greater<>> pq;
  dist[from] = 0;
  pq.push({0, from});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != dist[v]) continue;
    if (v == to) break;
    for (int ei : g.out[v]) {
      int u = g.edges[ei].to;
      if (comp[u] != comp[from]) continue;
      long long w = 1 + 4ll * g.vregion[u].classes;
      if (dist[u] == -1 || d + w < dist[u]) {
        dist[u] = d + w;
        pre[u] = ei;
        pq.push({dist[u], u});
      }
    }
  }
  if (dist[to] == -1 && from != to) return std::nullopt;
  std::vector<int> path;
  for (int cur = to; cur != from; cur = g.edges[pre[cur]].from) {
    if (pre[cur] == -1) return std::nullopt;
    path.push_back(pre[cur]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Randomized simple path within the SCC, for concretization fallbacks.
std::optional<std::vector<int>> random_path(const RegionGraph& g, int from, int to,
                                            const std::vector<int>& comp, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<bool> used(g.num_vertices(), false);
  std::vector<int> path;
  int cur = from;
  used[from] = true;
  for (int steps = 0; steps < 4 * static_cast<int>(g.num_vertices()); ++steps) {
    if (cur == to && !path.empty()) return path;
    std::vector<int> opts;
    for (int ei : g.out[cur]) {
      int u = g.edges[ei].to;
      if (comp[u] != comp[from]) continue;
      if (u != to && used[u]) continue;
      opts.push_back(ei);
    }
    if (opts.empty()) return std::nullopt;
    int ei = opts[rng() % opts.size()];
    path.push_back(ei);
    cur = g.edges[ei].to;
    if (cur == to) return path;
    used[cur] = true;
  }
  return std::nullopt;
}

std::vector<RegionWitness> tick_cycle_witnesses(const RegionGraph& g, int from,
                                                bool marked_only,
                                                size_t max_candidates) {
  auto comp = tarjan_scc(g);
  // Usable intra-SCC tick edges, closest first.
  std::vector<std::pair<std::vector<int>, int>> anchors;  // (prefix, edge)
  for (size_t ei = 0; ei < g.edges.size(); ++ei) {
    const RGEdge& e = g.edges[ei];
    if (e.kind != RGEdge::Tick || (marked_only && !e.marked)) continue;
    if (comp[e.from] != comp[e.to]) continue;
    auto p = bfs_path(g, from, e.from);
    if (p) anchors.push_back({*p, static_cast<int>(ei)});
  }
  std::sort(anchors.begin(), anchors.end(),
            [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });

  std::vector<RegionWitness> out;
  std::set<std::vector<int>> seen_cycles;
  auto add = [&](const std::vector<int>& prefix, int tick,
                 const std::optional<std::vector<int>>& back) {
    if (!back || out.size() >= max_candidates) return;
    RegionWitness w;
    w.prefix_edges = prefix;
    w.cycle_edges.push_back(tick);
    w.cycle_edges.insert(w.cycle_edges.end(), back->begin(), back->end());
    if (seen_cycles.insert(w.cycle_edges).second) out.push_back(std::move(w));
  };
  for (const auto& [prefix, tick] : anchors) {
    if (out.size() >= max_candidates) break;
    const RGEdge& te = g.edges[tick];
    add(prefix, tick, lowclass_path(g, te.to, te.from, comp));
    add(prefix, tick, bfs_path(g, te.to, te.from, &comp));
    for (uint64_t s = 1; s <= 4 && out.size() < max_candidates; ++s)
      add(prefix, tick, random_path(g, te.to, te.from, comp, 0x9e3779b9ull * s + tick));
  }
  return out;
}

}  // namespace

std::vector<bool> divergence_capable(const RegionGraph& g) {
  return can_reach_tick_cycle(g, false);
}

std::vector<RegionWitness> divergent_buchi_witnesses(const RegionGraph& g,
                                                     size_t max_candidates) {
  return tick_cycle_witnesses(g, g.init, true, max_candidates);
}

std::optional<RegionWitness> find_divergent_buchi(const RegionGraph& g) {
  auto ws = divergent_buchi_witnesses(g, 1);
  if (ws.empty()) return std::nullopt;
  return ws.front();
}

std::vector<RegionWitness> divergent_reach_witnesses(const RegionGraph& g,
                                                     const std::vector<bool>& target,
                                                     size_t max_candidates) {
  auto div = divergence_capable(g);
  // Closest divergence-capable target vertex.
  int n = static_cast<int>(g.num_vertices());
  std::vector<int> pre(n, -1);
  std::vector<bool> seen(n, false);
  std::deque<int> work{g.init};
  seen[g.init] = true;
  int hit = -1;
  if (target[g.init] && div[g.init]) hit = g.init;
  while (!work.empty() && hit == -1) {
    int v = work.front();
    work.pop_front();
    for (int ei : g.out[v]) {
      int u = g.edges[ei].to;
      if (seen[u]) continue;
      seen[u] = true;
      pre[u] = ei;
      if (target[u] && div[u]) { hit = u; break; }
      work.push_back(u);
    }
  }
  if (hit == -1) return {};
  std::vector<int> path;
  for (int cur = hit; cur != g.init; cur = g.edges[pre[cur]].from)
    path.push_back(pre[cur]);
  std::reverse(path.begin(), path.end());
  std::vector<RegionWitness> out = tick_cycle_witnesses(g, hit, false, max_candidates);
  for (auto& w : out)
    w.prefix_edges.insert(w.prefix_edges.begin(), path.begin(), path.end());
  return out;
}

std::optional<RegionWitness> find_divergent_reach(const RegionGraph& g,
                                                  const std::vector<bool>& target) {
  auto ws = divergent_reach_witnesses(g, target, 1);
  if (ws.empty()) return std::nullopt;
  return ws.front();
}

std::string region_graph_dot(const RegionGraph& g) {
  std::ostringstream out;
  out << "digraph regions {\n  rankdir=LR;\n";
  for (size_t v = 0; v < g.num_vertices(); ++v)
    out << "  v" << v << " [label=\"" << g.vertex_str(static_cast<int>(v))
        << "\"" << (static_cast<int>(v) == g.init ? ", shape=doubleoctagon" : "")
        << "];\n";
  for (const auto& e : g.edges) {
    out << "  v" << e.from << " -> v" << e.to;
    if (e.kind == RGEdge::Delay) out << " [label=\"delay\"]";
    else if (e.kind == RGEdge::Action)
      out << " [label=\"" << g.ta->actions.at(g.ta->edges.at(e.ta_edge).action) << "\"]";
    else out << " [label=\"tick\", style=dashed" << (e.marked ? ", color=red" : "") << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace twp
