// Acceptance suite: one verdict line per criterion, nonzero exit on any
// failure. Randomness is seeded, so runs are reproducible.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/gen.hpp"
#include "support/golden.hpp"
#include "twp/concretize.hpp"
#include "twp/expand.hpp"
#include "twp/games.hpp"
#include "twp/oracle.hpp"
#include "twp/parser.hpp"
#include "twp/regions.hpp"
#include "twp/verify.hpp"

using namespace twp;
using twp::test::GenParams;

namespace {

struct Check {
  int failures = 0;
  int checks = 0;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      if (failures < 5) notes << "\n      failed: " << what;
      ++failures;
    }
  }
};

TimedAutomaton ring() {
  return *parse_model(twp::test::kRingModel).automaton;
}

long long ipow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Shared corpus built by criterion 4 and reused by 6 and 8.
struct ModelCase {
  TimedAutomaton ta;
  PrioritySpec spec;
  bool direct_holds = false;
  bool tw_holds = false;
};
struct Shared {
  std::vector<ModelCase> cases;
  long long window_pairs = 0;     // inductive-property pairs checked
  long long window_pair_bad = 0;
  long long parity_checked = 0;   // lassos checked for direct => parity
  long long parity_bad = 0;
  long long lassos_total = 0;
};
Shared g_shared;

// ---------------------------------------------------------------------------

void criterion1(Check& c) {
  TimedAutomaton ta = ring();
  for (long long lambda : {1, 2, 3}) {
    ExpandedAutomaton xa = expand(ta, PrioritySpec{{lambda}});
    std::string why;
    bool ok = twp::test::matches_ring_expansion(xa, lambda, &why);
    c.expect(ok, "fragment mismatch at bound " + std::to_string(lambda) + ": " + why);
  }
}

void criterion2(Check& c) {
  TimedAutomaton ta = ring();
  for (long long lambda = 1; lambda <= 5; ++lambda) {
    PrioritySpec spec{{lambda}};
    Verdict d = verify_direct(ta, spec);
    c.expect(!d.holds, "direct objective not violated at bound " + std::to_string(lambda));
    c.expect(d.counterexample.has_value(), "missing direct counterexample");
    if (d.counterexample) {
      validate_lasso(ta, *d.counterexample);
      c.expect(!check_dtw(ta, *d.counterexample, spec), "direct witness not confirmed");
    }
    Verdict t = verify_tw(ta, spec);
    c.expect(!t.holds, "objective not violated at bound " + std::to_string(lambda));
    if (t.counterexample) {
      validate_lasso(ta, *t.counterexample);
      c.expect(!check_tw(ta, *t.counterexample, spec), "witness not confirmed");
    }
  }
  // All divergent behavior of the model satisfies plain parity.
  int n = 0;
  enumerate_lassos(ta, {10, 10, 400, 1, 6}, [&](const LassoPlay& pi) {
    ++n;
    c.expect(check_parity(ta, pi, 0), "enumerated lasso violates parity");
    return true;
  });
  c.expect(n > 0, "no lassos enumerated");
}

void criterion3(Check& c) {
  std::mt19937_64 rng(1003);
  int done = 0;
  while (done < 100) {
    GenParams p;
    p.max_locations = 6;
    p.dims = 1 + static_cast<int>(rng() % 3);
    p.max_priority = static_cast<int>(rng() % 4);  // d <= 4
    TimedAutomaton ta = twp::test::random_ta(rng, p);
    if (!validate_model(ta).empty()) continue;
    PrioritySpec spec = twp::test::random_lambda(rng, p.dims, 3);
    ExpandedAutomaton xa = expand(ta, spec);
    long long d = ta.priority_bound();
    long long dk = ipow(d, p.dims);
    long long L = static_cast<long long>(ta.locations.size());
    long long E = static_cast<long long>(ta.edges.size());
    c.expect(static_cast<long long>(xa.ta.locations.size()) == L * (dk + 1),
             "location count identity");
    c.expect(static_cast<long long>(xa.ta.edges.size()) <=
                 E * dk + 2 * p.dims * L * dk + 2 * L,
             "edge count bound");
    ++done;
  }
}

// Window-pair inductive property over one lasso (all dimensions).
void check_window_pairs(const TimedAutomaton& ta, const LassoPlay& pi,
                        const PrioritySpec& spec, Check& c) {
  UnrolledPlay u = unroll(ta, pi, pi.cycle_duration() * Rational(3) + Rational(8), 4);
  size_t horizon = pi.prefix.size() + 2 * pi.cycle.size();
  for (int dim = 0; dim < spec.dimension(); ++dim) {
    for (size_t n = 0; n < horizon; ++n) {
      int mn = INT_MAX;
      size_t close = SIZE_MAX;
      for (size_t j = n; j < u.states.size(); ++j) {
        mn = std::min(mn, ta.locations[u.states[j].loc].priorities[dim]);
        if (mn % 2 == 0) { close = j; break; }
        if (u.states[j].val.global_time - u.states[n].val.global_time >=
            Rational(spec.lambda[dim]))
          break;
      }
      if (close == SIZE_MAX) continue;
      if (u.states[close].val.global_time - u.states[n].val.global_time >=
          Rational(spec.lambda[dim]))
        continue;
      for (size_t i = n; i <= close; ++i) {
        ++g_shared.window_pairs;
        if (!check_tgw_at(ta, u, dim, spec.lambda[dim], i)) {
          ++g_shared.window_pair_bad;
          c.expect(false, "inductive property violated");
        }
      }
    }
  }
}

void criterion4(Check& c) {
  std::mt19937_64 rng(1004);
  const int kModels = 210;
  size_t max_region = 0;
  while (static_cast<int>(g_shared.cases.size()) < kModels) {
    GenParams p;
    p.dims = 1 + static_cast<int>(rng() % 2);
    p.max_locations = 4 + static_cast<int>(rng() % 3);
    p.max_clocks = 2;
    p.max_actions = 3;
    p.max_edges_per_loc = 3;
    p.max_constant = 2 + static_cast<int>(rng() % 2);
    p.max_priority = 2;
    TimedAutomaton ta;
    try {
      ta = twp::test::random_ta_bounded(rng, p, 400);
    } catch (const Error&) {
      continue;
    }
    max_region = std::max(max_region, build_region_graph(ta).num_vertices());
    PrioritySpec spec = twp::test::random_lambda(rng, p.dims, 3);

    Verdict vd = verify_direct(ta, spec);
    Verdict vt = verify_tw(ta, spec);

    // Oracle side: definitional checks over the enumerated lassos plus the
    // returned witnesses.
    bool oracle_dtw_viol = false, oracle_tw_viol = false;
    if (vd.counterexample) {
      validate_lasso(ta, *vd.counterexample);
      oracle_dtw_viol = !check_dtw(ta, *vd.counterexample, spec);
    }
    if (vt.counterexample) {
      validate_lasso(ta, *vt.counterexample);
      oracle_tw_viol = !check_tw(ta, *vt.counterexample, spec);
    }
    LassoLimits limits{10, 12, 400, 1, 8};
    enumerate_lassos(ta, limits, [&](const LassoPlay& pi) {
      ++g_shared.lassos_total;
      bool dtw = check_dtw(ta, pi, spec);
      bool tw = check_tw(ta, pi, spec);
      if (!dtw) oracle_dtw_viol = true;
      if (!tw) oracle_tw_viol = true;
      if (!dtw && tw) {
        // containment holds trivially; nothing to record
      }
      // Criterion 6 input.
      check_window_pairs(ta, pi, spec, c);
      // Criterion 8 input: a lasso satisfying the direct objective (or the
      // model satisfying it) must satisfy parity on every dimension.
      if (dtw) {
        for (int dim = 0; dim < spec.dimension(); ++dim) {
          ++g_shared.parity_checked;
          if (!check_parity(ta, pi, dim)) {
            ++g_shared.parity_bad;
            c.expect(false, "direct-satisfying lasso violates parity");
          }
        }
      }
      return true;
    });

    c.expect(vd.holds == !oracle_dtw_viol, "direct verdict disagrees with the oracle");
    c.expect(vt.holds == !oracle_tw_viol, "verdict disagrees with the oracle");
    // Containment at the verdict level.
    c.expect(!vd.holds || vt.holds, "direct holds but the non-direct does not");

    g_shared.cases.push_back({std::move(ta), spec, vd.holds, vt.holds});
  }
  c.notes << " [largest region graph: " << max_region
          << " vertices, lassos checked: " << g_shared.lassos_total << "]";
}

void criterion5(Check& c) {
  std::mt19937_64 rng(1005);
  int lassos_done = 0, coherent_done = 0;
  while (lassos_done < 520) {
    GenParams p;
    p.max_locations = 3;
    p.max_clocks = 1;
    TimedGame g;
    try {
      g = twp::test::random_game_bounded(rng, p, 120);
    } catch (const Error&) {
      continue;
    }
    PrioritySpec spec = twp::test::random_lambda(rng, 1, 2);
    ExpandedGame xg = expand_game(g, spec);
    long long lmax = spec.lambda[0];

    enumerate_lassos(g.ta, {8, 8, 25, 1, 3}, [&](const LassoPlay& pi) {
      ++lassos_done;
      Rational pre_dur(0);
      for (const auto& s : pi.prefix) pre_dur += s.move.delay;
      Rational cyc = pi.cycle_duration();
      Rational half = pre_dur + cyc * Rational(2) + Rational(2 * lmax);
      Rational total = half + cyc * Rational(3) + Rational(2 * lmax + 1);

      Play play = path_as_play(pi, g.ta, total, 5);
      Play ex = expand_play(g, xg, spec, play);

      bool dtw = check_dtw(g.ta, pi, spec);
      bool safe = !visits_bad(xg, ex);
      c.expect(dtw == safe, "expansion disagrees with the direct check");

      bool tw = check_tw(g.ta, pi, spec);
      bool eventually_safe = true;
      for (const auto& st : ex.steps)
        if (xg.ex.tags[st.before.loc].bad && st.before.val.global_time > half)
          eventually_safe = false;
      c.expect(tw == eventually_safe, "expansion disagrees with the suffix check");

      if (safe) {
        ++coherent_done;
        Play back = project_play(xg, ex);
        bool same = back.steps.size() == play.steps.size();
        for (size_t i = 0; same && i < back.steps.size(); ++i)
          same = back.steps[i].before == play.steps[i].before;
        same = same && back.last == play.last;
        c.expect(same, "projection does not invert the expansion");
      }
      return lassos_done < 520;
    });
  }
  c.expect(coherent_done > 50, "too few coherent plays exercised");
}

void criterion6(Check& c) {
  c.expect(g_shared.window_pairs > 1000, "too few window pairs examined");
  c.expect(g_shared.window_pair_bad == 0, "inductive property failures recorded");
}

void criterion7(Check& c) {
  // (a) Priority table rows: the eight play classes and their winners.
  {
    ArenaEvents tick{1, false, false}, silent{0, false, false};
    ArenaEvents blamed{0, false, true}, tick_blamed{1, false, true};
    for (GameObjective obj : {GameObjective::Safety, GameObjective::CoBuchi}) {
      c.expect(round_priority(obj, true, tick) == 1, "dirty tick row");
      c.expect(round_priority(obj, false, tick) == 2, "clean tick row");
      c.expect(round_priority(obj, false, tick_blamed) == 2, "tick beats blame");
      c.expect(round_priority(obj, true, tick_blamed) == 1, "dirty tick with blame");
      c.expect(round_priority(obj, true, blamed) == 3, "blame row (memory set)");
      c.expect(round_priority(obj, false, blamed) == 3, "blame row");
      c.expect(round_priority(obj, true, silent) == 4, "neutral row (memory set)");
      c.expect(round_priority(obj, false, silent) == 4, "neutral row");
    }
    // Winners by minimum priority seen infinitely often:
    // divergent & objective-satisfying (2 even) wins, divergent violating
    // (1) loses, convergent blamed (3) loses, convergent blameless (4) wins.
    c.expect(2 % 2 == 0 && 4 % 2 == 0 && 1 % 2 == 1 && 3 % 2 == 1, "parity of rows");
  }

  // (b) Safety games match the window reduction, both objectives.
  std::vector<std::pair<TimedGame, PrioritySpec>> winners;  // for (c)
  {
    std::mt19937_64 rng(1007);
    int done = 0;
    while (done < 20) {
      GenParams p;
      p.max_locations = 3;
      p.max_clocks = 1;
      TimedGame g;
      try {
        g = twp::test::random_game_bounded(rng, p, 60);
      } catch (const Error&) {
        continue;
      }
      std::vector<bool> unsafe(g.ta.locations.size(), false);
      unsafe[rng() % unsafe.size()] = true;
      bool plain = solve_safety_game(g, unsafe);
      TimedGame reduced{twp::test::safety_to_window(g.ta, unsafe), g.owner};
      RealizeResult rd = realize(reduced, PrioritySpec{{1}}, true);
      RealizeResult rt = realize(reduced, PrioritySpec{{1}}, false);
      c.expect(rd.realizable == plain, "direct reduction disagrees with safety game");
      c.expect(rt.realizable == plain, "reduction disagrees with safety game");
      c.expect(!rd.realizable || rt.realizable, "direct win without non-direct win");
      if (rd.realizable) winners.push_back({reduced, PrioritySpec{{1}}});
      ++done;
    }
  }

  // (c) Simulate every returned strategy against 500 random adversaries.
  {
    std::mt19937_64 rng(1070);
    // A couple of hand games guaranteed winnable join the pool.
    auto add_game = [&](const char* text, long long lambda) {
      auto r = parse_model(text);
      if (r.ok() && r.is_game()) winners.push_back({r.game(), PrioritySpec{{lambda}}});
    };
    add_game(
        "automaton g\nclock x\naction a owner 1\n"
        "loc l0 init prio [1]\nloc l1 prio [0]\nedge l0 -> l1 on a\n",
        1);
    add_game(
        "automaton g\nclock x\naction a owner 1\naction b owner 2\n"
        "loc l0 init prio [1]\nloc l1 prio [0]\n"
        "edge l0 -> l1 on a\nedge l1 -> l0 on b reset {x}\n",
        2);

    for (auto& [game, spec] : winners) {
      RealizeResult r = realize(game, spec, true);
      if (!r.realizable) continue;
      const TimedAutomaton& arena_ta = r.arena->game.ta;  // expanded space
      long long lmax = 1;
      for (long long l : spec.lambda) lmax = std::max(lmax, l);
      const Rational div_floor(3 * lmax + 3);

      // 400 randomized adversaries: plays that clearly diverge must satisfy
      // the safety objective outright.
      for (int sim = 0; sim < 400; ++sim) {
        Play play = simulate_strategy(*r.arena, r.solution, rng, 48);
        if (play.last.val.global_time < div_floor) continue;
        bool bad_seen = false;
        for (const auto& st : play.steps)
          bad_seen |= r.arena->bad_location[st.before.loc];
        c.expect(!bad_seen, "bad state on a divergent outcome");
      }

      // 100 stalling adversaries: if time freezes, blame on player 1 must
      // die out (convergent outcomes are won by blamelessness alone).
      for (int sim = 0; sim < 100; ++sim) {
        Play play = simulate_strategy(*r.arena, r.solution, rng, 300, true);
        size_t n = play.steps.size();
        Rational tail_time =
            play.last.val.global_time - play.steps[n - 100].before.val.global_time;
        if (tail_time > Rational(0)) continue;  // still progressing: not convergent
        bool blameless = true;
        for (size_t i = n - 50; i < n; ++i) {
          const State& next = i + 1 < n ? play.steps[i + 1].before : play.last;
          if (p1_responsible(arena_ta, play.steps[i].before, play.steps[i].m1,
                             play.steps[i].m2, next))
            blameless = false;
        }
        c.expect(blameless, "player 1 blamed forever on a convergent outcome");
      }
    }
    c.expect(!winners.empty(), "no winning strategies to simulate");
  }
}

void criterion8(Check& c) {
  // Monotone bounds and verdict containment across the criterion-4 corpus.
  std::mt19937_64 rng(1008);
  int monotone_checked = 0;
  for (const auto& mc : g_shared.cases) {
    c.expect(!mc.direct_holds || mc.tw_holds, "direct holds without non-direct");
    if (monotone_checked < 60 && rng() % 3 == 0) {
      PrioritySpec bigger = mc.spec;
      for (auto& l : bigger.lambda) l += 1 + static_cast<long long>(rng() % 2);
      if (mc.direct_holds)
        c.expect(verify_direct(mc.ta, bigger).holds, "direct verdict not monotone");
      if (mc.tw_holds)
        c.expect(verify_tw(mc.ta, bigger).holds, "verdict not monotone");
      ++monotone_checked;
    }
  }
  c.expect(monotone_checked >= 40, "too few monotonicity samples");
  // Realizability containment on random games.
  int games_done = 0;
  while (games_done < 12) {
    GenParams p;
    p.max_locations = 3;
    p.max_clocks = 1;
    TimedGame g;
    try {
      g = twp::test::random_game_bounded(rng, p, 40);
    } catch (const Error&) {
      continue;
    }
    PrioritySpec spec = twp::test::random_lambda(rng, 1, 2);
    if (realize(g, spec, true).realizable)
      c.expect(realize(g, spec, false).realizable,
               "direct realizable but non-direct is not");
    ++games_done;
  }
  // Lasso-level containment was tallied during criterion 4.
  c.expect(g_shared.parity_bad == 0, "direct-satisfying lasso violating parity");
  c.expect(g_shared.parity_checked > 200, "too few parity containment samples");
}

struct Criterion {
  const char* name;
  std::function<void(Check&)> run;
  double limit_s;  // 0 = no stated limit
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"golden expansion of the three-location model", criterion1, 1.0},
      {"separation example: window objectives violated, parity holds", criterion2, 5.0},
      {"size formulas on 100 random models", criterion3, 10.0},
      {"symbolic verdicts match the lasso oracle on 210 random models", criterion4,
       300.0},
      {"expansion/projection mappings on 520 random lassos", criterion5, 60.0},
      {"inductive window property on every enumerated pair", criterion6, 0},
      {"game solver: tables, safety reduction, strategy simulations", criterion7,
       300.0},
      {"monotonicity and containment", criterion8, 0},
  };

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0).count();
    bool in_time = criteria[i].limit_s == 0 || secs <= criteria[i].limit_s;
    if (!in_time) c.expect(false, "time limit exceeded");
    bool pass = c.failures == 0;
    printf("[%s] criterion %zu: %s (%d checks, %.2f s)%s\n", pass ? "PASS" : "FAIL",
           i + 1, criteria[i].name, c.checks, secs, c.notes.str().c_str());
    fflush(stdout);
    if (!pass) ++failed;
  }
  if (failed == 0) {
    printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    printf("%d acceptance criteria FAILED\n", failed);
  }
  return failed == 0 ? 0 : 1;
}
