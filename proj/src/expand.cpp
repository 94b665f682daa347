#include "twp/expand.hpp"

#include <algorithm>

namespace twp {

namespace {

long long ipow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

int tag_index(const std::vector<int>& q, int d) {
  int idx = 0;
  for (int c : q) idx = idx * d + c;
  return idx;
}

std::vector<int> tag_from_index(int idx, int d, int k) {
  std::vector<int> q(k);
  for (int i = k - 1; i >= 0; --i) {
    q[i] = idx % d;
    idx /= d;
  }
  return q;
}

std::string tag_suffix(const std::vector<int>& q) {
  std::string s;
  for (size_t i = 0; i < q.size(); ++i) {
    if (i) s += "_";
    s += std::to_string(q[i]);
  }
  return s;
}

}  // namespace

int ExpandedAutomaton::loc_of(int base, const std::vector<int>& q) const {
  long long block = ipow(prio_bound, dims) + 1;
  return static_cast<int>(base * block + tag_index(q, prio_bound));
}

int ExpandedAutomaton::bad_of(int base) const {
  long long block = ipow(prio_bound, dims) + 1;
  return static_cast<int>(base * block + block - 1);
}

std::vector<bool> ExpandedAutomaton::bad_mask() const {
  std::vector<bool> m(tags.size());
  for (size_t i = 0; i < tags.size(); ++i) m[i] = tags[i].bad;
  return m;
}

std::vector<int> up_vector(const std::vector<int>& q,
                           const std::vector<int>& ell_priorities) {
  if (q.size() != ell_priorities.size())
    throw Error("up_vector: dimension mismatch");
  std::vector<int> out(q.size());
  for (size_t i = 0; i < q.size(); ++i)
    out[i] = (q[i] % 2 == 1) ? std::min(q[i], ell_priorities[i]) : ell_priorities[i];
  return out;
}

ClockConstraint bad_entry_guard(int i, const std::vector<int>& q,
                                const PrioritySpec& spec,
                                const std::vector<int>& z_clocks) {
  if (i < 0 || i >= static_cast<int>(q.size()) || q[i] % 2 == 0)
    throw Error("bad_entry_guard: dimension " + std::to_string(i + 1) + " is not odd");
  ClockConstraint g;
  for (int j = 0; j < i; ++j)
    if (q[j] % 2 == 1)
      g.atoms.push_back({z_clocks.at(j), Rel::Lt, spec.lambda.at(j)});
  g.atoms.push_back({z_clocks.at(i), Rel::Ge, spec.lambda.at(i)});
  g.atoms.push_back({z_clocks.at(i), Rel::Le, spec.lambda.at(i)});
  return g;
}

ExpandedAutomaton expand(const TimedAutomaton& ta, const PrioritySpec& spec) {
  const int k = spec.dimension();
  if (k != ta.dimension())
    throw Error("expand: lambda dimension " + std::to_string(k) +
                " does not match model dimension " + std::to_string(ta.dimension()));
  for (long long l : spec.lambda)
    if (l < 1) throw Error("expand: window bounds must be positive");
  for (const auto& c : ta.clocks)
    if (c.rfind("__", 0) == 0)
      throw Error("expand: clock name collision on reserved prefix: " + c);
  for (const auto& a : ta.actions)
    if (a.rfind("__", 0) == 0)
      throw Error("expand: action name collision on reserved prefix: " + a);

  ExpandedAutomaton out;
  out.base_locations = static_cast<int>(ta.locations.size());
  out.base_clocks = static_cast<int>(ta.clocks.size());
  out.dims = k;
  out.prio_bound = ta.priority_bound();
  const int d = out.prio_bound;
  const long long tag_count = ipow(d, k);

  TimedAutomaton& ex = out.ta;
  ex.name = ta.name + "_x";
  ex.clocks = ta.clocks;
  for (int i = 0; i < k; ++i) {
    out.z_clocks.push_back(static_cast<int>(ex.clocks.size()));
    ex.clocks.push_back("__z" + std::to_string(i + 1));
  }
  ex.actions = ta.actions;
  out.beta1 = static_cast<int>(ex.actions.size());
  ex.actions.push_back("__beta1");
  out.beta2 = static_cast<int>(ex.actions.size());
  ex.actions.push_back("__beta2");

  std::vector<int> all_z = out.z_clocks;

  // Locations: per base location, all priority vectors then the bad marker.
  for (int b = 0; b < out.base_locations; ++b) {
    const Location& base = ta.locations[b];
    for (long long ti = 0; ti < tag_count; ++ti) {
      std::vector<int> q = tag_from_index(static_cast<int>(ti), d, k);
      Location loc;
      loc.name = base.name + ".q" + tag_suffix(q);
      loc.priorities = q;
      loc.invariant = base.invariant;
      for (int i = 0; i < k; ++i)
        if (q[i] % 2 == 1)
          loc.invariant.atoms.push_back({out.z_clocks[i], Rel::Le, spec.lambda[i]});
      ex.locations.push_back(std::move(loc));
      out.tags.push_back({b, false, q});
    }
    Location badloc;
    badloc.name = base.name + ".bad";
    badloc.priorities = base.priorities;
    badloc.invariant = ClockConstraint::eq(out.z_clocks[0], 0);
    ex.locations.push_back(std::move(badloc));
    out.tags.push_back({b, true, {}});
  }
  ex.initial = out.loc_of(ta.initial, ta.locations[ta.initial].priorities);

  // Edges derived from base edges, one per non-bad tag.
  for (long long ti = 0; ti < tag_count; ++ti) {
    std::vector<int> q = tag_from_index(static_cast<int>(ti), d, k);
    for (const Edge& e : ta.edges) {
      Edge ne;
      ne.src = out.loc_of(e.src, q);
      ne.action = e.action;
      ne.guard = e.guard;
      for (int i = 0; i < k; ++i)
        if (q[i] % 2 == 1)
          ne.guard.atoms.push_back({out.z_clocks[i], Rel::Lt, spec.lambda[i]});
      ne.resets = e.resets;
      for (int i = 0; i < k; ++i)
        if (q[i] % 2 == 0) ne.resets.push_back(out.z_clocks[i]);
      std::sort(ne.resets.begin(), ne.resets.end());
      ne.dst = out.loc_of(e.dst, up_vector(q, ta.locations[e.dst].priorities));
      ex.edges.push_back(std::move(ne));
    }
  }
  // Bad-entry edges: per non-bad tag, per odd dimension, per beta action.
  for (int b = 0; b < out.base_locations; ++b) {
    for (long long ti = 0; ti < tag_count; ++ti) {
      std::vector<int> q = tag_from_index(static_cast<int>(ti), d, k);
      for (int i = 0; i < k; ++i) {
        if (q[i] % 2 == 0) continue;
        ClockConstraint guard = bad_entry_guard(i, q, spec, out.z_clocks);
        for (int beta : {out.beta1, out.beta2}) {
          Edge ne;
          ne.src = out.loc_of(b, q);
          ne.guard = guard;
          ne.action = beta;
          ne.resets = all_z;
          ne.dst = out.bad_of(b);
          ex.edges.push_back(std::move(ne));
        }
      }
    }
  }
  // Bad-exit edges reopen a window at the current location's priorities.
  for (int b = 0; b < out.base_locations; ++b) {
    for (int beta : {out.beta1, out.beta2}) {
      Edge ne;
      ne.src = out.bad_of(b);
      ne.action = beta;
      ne.dst = out.loc_of(b, ta.locations[b].priorities);
      ex.edges.push_back(std::move(ne));
    }
  }
  return out;
}

ExpandedGame expand_game(const TimedGame& g, const PrioritySpec& spec) {
  ExpandedGame out;
  out.ex = expand(g.ta, spec);
  out.owner = g.owner;
  out.owner.push_back(1);  // beta1
  out.owner.push_back(2);  // beta2
  return out;
}

}  // namespace twp
