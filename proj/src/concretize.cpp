#include "twp/concretize.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>

namespace twp {

namespace {

// Affine form c0 + sum(k[i] * u_i) over a fixed set of unknowns.
struct Affine {
  Rational c;
  std::vector<Rational> k;

  explicit Affine(size_t width, Rational c0 = Rational(0)) : c(c0), k(width) {}
  static Affine unknown(size_t width, size_t idx, Rational scale = Rational(1)) {
    Affine a(width);
    a.k[idx] = scale;
    return a;
  }
  Affine operator+(const Affine& o) const {
    Affine r = *this;
    r.c += o.c;
    for (size_t i = 0; i < k.size(); ++i) r.k[i] += o.k[i];
    return r;
  }
  Affine operator-(const Affine& o) const {
    Affine r = *this;
    r.c -= o.c;
    for (size_t i = 0; i < k.size(); ++i) r.k[i] -= o.k[i];
    return r;
  }
  Affine scaled(const Rational& s) const {
    Affine r = *this;
    r.c *= s;
    for (auto& x : r.k) x *= s;
    return r;
  }
  Rational eval(const std::vector<Rational>& u) const {
    Rational v = c;
    for (size_t i = 0; i < k.size(); ++i)
      if (!k[i].is_zero()) v += k[i] * u[i];
    return v;
  }
};

// One step of a region path over rational values. `choose` supplies free
// delays: called with the exclusive upper bound (1 - maxfrac), or with the
// self-loop marker for time-closed regions where any positive delay works.
struct StepCtx {
  const RegionGraph& g;
  std::vector<Rational>& vals;
  std::function<Rational(bool self_loop, const Rational& upper)> choose;

  Rational step(int edge_id) {
    const RGEdge& e = g.edges[edge_id];
    const Region& r = g.vregion[e.from];
    if (e.kind == RGEdge::Delay) {
      Rational d = delay_for(r);
      for (auto& v : vals) v += d;
      return d;
    }
    if (e.kind == RGEdge::Action) {
      for (int c : g.ta->edges.at(e.ta_edge).resets) vals[c] = Rational(0);
      return Rational(0);
    }
    vals[g.theta] = Rational(0);  // tick
    return Rational(0);
  }

 private:
  Rational delay_for(const Region& r) {
    if (r.time_closed()) return choose(true, Rational(1));
    int top = r.top_class_clock();
    Rational maxfrac = top >= 0 ? vals[top] - Rational(r.parts[top].ip) : Rational(0);
    Rational upper = Rational(1) - maxfrac;
    if (r.has_zero_frac()) return choose(false, upper);
    return upper;  // forced: the top class reaches the next integer
  }
};

// Same stepping over affine forms; decisions come from the regions alone,
// so no value comparisons are needed.
struct AffineStepper {
  const RegionGraph& g;
  size_t width;
  std::vector<Affine> vals;
  std::function<Affine(bool self_loop, const Affine& upper)> choose;

  Affine step(int edge_id) {
    const RGEdge& e = g.edges[edge_id];
    const Region& r = g.vregion[e.from];
    if (e.kind == RGEdge::Delay) {
      Affine d = delay_for(r);
      for (auto& v : vals) v = v + d;
      return d;
    }
    Affine z(width);
    if (e.kind == RGEdge::Action) {
      for (int c : g.ta->edges.at(e.ta_edge).resets) vals[c] = z;
    } else {
      vals[g.theta] = z;
    }
    return z;
  }

  Affine delay_for(const Region& r) {
    Affine one(width, Rational(1));
    if (r.time_closed()) return choose(true, one);
    int top = r.top_class_clock();
    Affine maxfrac =
        top >= 0 ? vals[top] - Affine(width, Rational(r.parts[top].ip)) : Affine(width);
    Affine upper = one - maxfrac;
    if (r.has_zero_frac()) return choose(false, upper);
    return upper;
  }
};

bool region_matches(const RegionGraph& g, int vertex, const std::vector<Rational>& vals) {
  return region_of(vals, g.maxc) == g.vregion[vertex];
}

// Replays a path with prescribed delays, validating region membership.
std::optional<std::vector<Rational>> replay_check(const RegionGraph& g,
                                                  const std::vector<int>& epath,
                                                  std::vector<Rational> vals,
                                                  const std::vector<Rational>& delays) {
  if (epath.empty()) return vals;
  if (!region_matches(g, g.edges[epath[0]].from, vals)) return std::nullopt;
  for (size_t i = 0; i < epath.size(); ++i) {
    const RGEdge& e = g.edges[epath[i]];
    const Rational& d = delays[i];
    if (d.is_negative()) return std::nullopt;
    if (e.kind == RGEdge::Delay) {
      for (auto& v : vals) v += d;
    } else if (e.kind == RGEdge::Action) {
      if (!d.is_zero()) return std::nullopt;
      if (!region_satisfies(g.vregion[e.from], g.ta->edges.at(e.ta_edge).guard, g.maxc))
        return std::nullopt;
      for (int c : g.ta->edges.at(e.ta_edge).resets) vals[c] = Rational(0);
    } else {
      if (!d.is_zero()) return std::nullopt;
      vals[g.theta] = Rational(0);
    }
    if (!region_matches(g, e.to, vals)) return std::nullopt;
  }
  return vals;
}

// Gaussian elimination over rationals: A x = b; free columns take values
// from `defaults`. Returns nullopt when inconsistent.
std::optional<std::vector<Rational>> solve_linear(std::vector<std::vector<Rational>> A,
                                                  std::vector<Rational> b,
                                                  const std::vector<Rational>& defaults) {
  size_t rows = A.size();
  size_t cols = defaults.size();
  std::vector<int> pivot_col(rows, -1);
  size_t rank = 0;
  for (size_t c = 0; c < cols && rank < rows; ++c) {
    size_t piv = rank;
    while (piv < rows && A[piv][c].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(A[piv], A[rank]);
    std::swap(b[piv], b[rank]);
    Rational inv = Rational(1) / A[rank][c];
    for (size_t cc = 0; cc < cols; ++cc) A[rank][cc] *= inv;
    b[rank] *= inv;
    for (size_t r = 0; r < rows; ++r) {
      if (r == rank || A[r][c].is_zero()) continue;
      Rational f = A[r][c];
      for (size_t cc = 0; cc < cols; ++cc) A[r][cc] -= f * A[rank][cc];
      b[r] -= f * b[rank];
    }
    pivot_col[rank] = static_cast<int>(c);
    ++rank;
  }
  for (size_t r = rank; r < rows; ++r)
    if (!b[r].is_zero()) return std::nullopt;

  std::vector<Rational> x = defaults;
  // Solve pivot variables given defaults for the free ones.
  for (size_t r = rank; r-- > 0;) {
    int pc = pivot_col[r];
    Rational v = b[r];
    for (size_t c = 0; c < cols; ++c)
      if (static_cast<int>(c) != pc && !A[r][c].is_zero()) v -= A[r][c] * x[c];
    x[pc] = v;
  }
  return x;
}

std::vector<Rational> project_uncapped(const Region& root, const std::vector<Rational>& vals) {
  std::vector<Rational> key;
  for (size_t i = 0; i < vals.size(); ++i)
    if (!root.parts[i].above) key.push_back(vals[i]);
  return key;
}

}  // namespace

SimResult simulate_policy(const RegionGraph& g, const std::vector<int>& epath,
                          std::vector<Rational> values) {
  SimResult out;
  if (!epath.empty() && !region_matches(g, g.edges[epath[0]].from, values))
    throw Error("simulate_policy: start values not in the path's first region");
  StepCtx ctx{g, values,
              [](bool self_loop, const Rational& upper) {
                return self_loop ? Rational(1) : upper * Rational(1, 2);
              }};
  for (int ei : epath) {
    const RGEdge& e = g.edges[ei];
    Rational d = ctx.step(ei);
    out.steps.push_back({d, e.kind, e.ta_edge});
    if (!region_matches(g, e.to, values))
      throw Error("simulate_policy: left the region path");
  }
  out.end = std::move(values);
  return out;
}

namespace {

// Affine fixed point of one policy traversal of the cycle: start values are
// unknowns for clocks below their max constant at the root, constants above.
std::optional<std::vector<Rational>> affine_fixpoint(const RegionGraph& g,
                                                     const std::vector<int>& cycle,
                                                     int root_vertex) {
  const Region& root = g.vregion[root_vertex];
  std::vector<int> unknown_of(g.nclocks, -1);
  size_t width = 0;
  for (int c = 0; c < g.nclocks; ++c)
    if (!root.parts[c].above) unknown_of[c] = static_cast<int>(width++);
  std::vector<Affine> vals;
  for (int c = 0; c < g.nclocks; ++c) {
    if (unknown_of[c] >= 0)
      vals.push_back(Affine::unknown(width, unknown_of[c]));
    else
      vals.push_back(Affine(width, Rational(g.maxc[c] + 1)));
  }
  AffineStepper st{g, width, std::move(vals),
                   [width](bool self_loop, const Affine& upper) {
                     return self_loop ? Affine(width, Rational(1))
                                      : upper.scaled(Rational(1, 2));
                   }};
  for (int ei : cycle) st.step(ei);

  // end_c - u_c = 0 for every unknown clock.
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  for (int c = 0; c < g.nclocks; ++c) {
    if (unknown_of[c] < 0) continue;
    Affine eq = st.vals[c];
    eq.k[unknown_of[c]] -= Rational(1);
    A.push_back(eq.k);
    b.push_back(-eq.c);
  }
  auto rep = region_representative(root, g.maxc);
  std::vector<Rational> defaults(width);
  for (int c = 0; c < g.nclocks; ++c)
    if (unknown_of[c] >= 0) defaults[unknown_of[c]] = rep[c];
  auto sol = solve_linear(std::move(A), std::move(b), defaults);
  if (!sol) return std::nullopt;
  std::vector<Rational> start(g.nclocks);
  for (int c = 0; c < g.nclocks; ++c)
    start[c] = unknown_of[c] >= 0 ? (*sol)[unknown_of[c]] : Rational(g.maxc[c] + 1);
  return start;
}

// Solves free delays of `loops` policy-shaped traversals from `from` so the
// endpoint hits `target` on the root's uncapped clocks.
std::optional<std::vector<CStep>> solve_bridge(const RegionGraph& g,
                                               const std::vector<int>& cycle,
                                               int root_vertex,
                                               const std::vector<Rational>& from,
                                               const std::vector<Rational>& target,
                                               int loops) {
  // Count free choices.
  size_t width = 0;
  for (int l = 0; l < loops; ++l)
    for (int ei : cycle) {
      const RGEdge& e = g.edges[ei];
      if (e.kind != RGEdge::Delay) continue;
      const Region& r = g.vregion[e.from];
      if (r.time_closed() || r.has_zero_frac()) ++width;
    }
  std::vector<Affine> vals;
  for (int c = 0; c < g.nclocks; ++c) vals.push_back(Affine(width, from[c]));
  size_t next = 0;
  AffineStepper st{g, width, std::move(vals),
                   [&next, width](bool, const Affine&) {
                     return Affine::unknown(width, next++);
                   }};
  std::vector<Affine> delays;
  std::vector<int> epath;
  for (int l = 0; l < loops; ++l)
    for (int ei : cycle) {
      delays.push_back(st.step(ei));
      epath.push_back(ei);
    }

  const Region& root = g.vregion[root_vertex];
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  for (int c = 0; c < g.nclocks; ++c) {
    if (root.parts[c].above) continue;
    A.push_back(st.vals[c].k);
    b.push_back(target[c] - st.vals[c].c);
  }
  std::vector<Rational> defaults(width, Rational(1, 2));
  auto sol = solve_linear(std::move(A), std::move(b), defaults);
  if (!sol) return std::nullopt;

  std::vector<Rational> dvals;
  for (const auto& d : delays) dvals.push_back(d.eval(*sol));
  auto end = replay_check(g, epath, from, dvals);
  if (!end) return std::nullopt;
  for (int c = 0; c < g.nclocks; ++c)
    if (!root.parts[c].above && (*end)[c] != target[c]) return std::nullopt;

  std::vector<CStep> steps;
  for (size_t i = 0; i < epath.size(); ++i)
    steps.push_back({dvals[i], g.edges[epath[i]].kind, g.edges[epath[i]].ta_edge});
  return steps;
}

}  // namespace

std::optional<ClosedLasso> concretize_lasso(const RegionGraph& g,
                                            const std::vector<int>& prefix_edges,
                                            const std::vector<int>& cycle_edges) {
  if (cycle_edges.empty()) return std::nullopt;
  std::vector<Rational> zero(g.nclocks, Rational(0));
  SimResult pre = simulate_policy(g, prefix_edges, zero);
  int root_vertex = g.edges[cycle_edges.front()].from;
  const Region& root = g.vregion[root_vertex];

  ClosedLasso out;
  out.prefix = pre.steps;

  // Phase 1: orbit of the policy map; a repeat on the uncapped clocks
  // closes the cycle (drift above the max constants is unobservable). The
  // iteration cap keeps halving denominators inside 64 bits; on overflow we
  // fall through to the affine fixed point.
  try {
    std::vector<std::vector<Rational>> keys{project_uncapped(root, pre.end)};
    std::vector<std::vector<CStep>> loops;
    std::vector<Rational> cur = pre.end;
    for (int it = 0; it < 40; ++it) {
      SimResult one = simulate_policy(g, cycle_edges, cur);
      loops.push_back(one.steps);
      cur = one.end;
      auto key = project_uncapped(root, cur);
      for (size_t j = 0; j < keys.size(); ++j) {
        if (keys[j] == key) {
          for (size_t l = 0; l < j; ++l)
            out.prefix.insert(out.prefix.end(), loops[l].begin(), loops[l].end());
          for (size_t l = j; l < loops.size(); ++l)
            out.cycle.insert(out.cycle.end(), loops[l].begin(), loops[l].end());
          // Recover root values at loop boundary j.
          std::vector<Rational> rv = pre.end;
          for (size_t l = 0; l < j; ++l)
            rv = simulate_policy(g, cycle_edges, rv).end;
          out.root = rv;
          return out;
        }
      }
      keys.push_back(key);
    }
  } catch (const std::overflow_error&) {
    // fall through
  } catch (const Error&) {
    return std::nullopt;  // region path itself broken; caller picks another
  }

  // Phase 2: affine fixed point plus a bridge from the prefix end.
  try {
    auto star = affine_fixpoint(g, cycle_edges, root_vertex);
    if (!star) return std::nullopt;
    SimResult check = simulate_policy(g, cycle_edges, *star);
    for (int c = 0; c < g.nclocks; ++c)
      if (!root.parts[c].above && check.end[c] != (*star)[c]) return std::nullopt;

    for (int loops_n = 1; loops_n <= 3; ++loops_n) {
      auto bridge = solve_bridge(g, cycle_edges, root_vertex, pre.end, *star, loops_n);
      if (!bridge) continue;
      out.prefix = pre.steps;
      out.prefix.insert(out.prefix.end(), bridge->begin(), bridge->end());
      out.cycle = check.steps;
      out.root = *star;
      return out;
    }
  } catch (const std::overflow_error&) {
  } catch (const Error&) {
  }
  return std::nullopt;
}

std::optional<ClosedLasso> concretize_lasso_rotating(const RegionGraph& g,
                                                     const std::vector<int>& prefix_edges,
                                                     const std::vector<int>& cycle_edges) {
  std::vector<int> pre = prefix_edges, cyc = cycle_edges;
  for (size_t rot = 0; rot < cycle_edges.size(); ++rot) {
    if (auto r = concretize_lasso(g, pre, cyc)) return r;
    pre.push_back(cyc.front());
    std::rotate(cyc.begin(), cyc.begin() + 1, cyc.end());
  }
  return std::nullopt;
}

}  // namespace twp
