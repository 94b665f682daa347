#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "twp/expand.hpp"
#include "twp/oracle.hpp"
#include "twp/regions.hpp"

namespace twp {

enum class GameObjective { Safety, CoBuchi };

// Two-state deterministic parity automaton over location sequences, keyed
// by whether the read location is bad. Acceptance: the smallest priority
// seen infinitely often is even.
struct TwoStateDPA {
  int prio_init = 0, prio_bad = 1;
  bool sticky = false;  // safety sinks in the bad state

  static TwoStateDPA safety() { return {0, 1, true}; }
  static TwoStateDPA cobuchi() { return {2, 1, false}; }

  int next(int state, bool bad_letter) const {
    if (sticky && state == 1) return 1;
    return bad_letter ? 1 : 0;
  }
  int priority(int state) const { return state == 0 ? prio_init : prio_bad; }
  // Acceptance on the ultimately periodic word prefix . cycle^omega.
  bool accepts(const std::vector<bool>& prefix, const std::vector<bool>& cycle) const;
};

struct ArenaEvents {
  int ticks = 0;
  bool bad = false;
  bool blamed = false;
};

// Priority of one arena round under the winning-condition encoding:
// unit-time completions beat blame accounting, and the memory bit carries
// the per-objective bad-window status.
int round_priority(GameObjective obj, bool mem_in, const ArenaEvents& ev);
int next_memory(GameObjective obj, bool mem_in, const ArenaEvents& ev);

// Turn-based arena over the region abstraction. Player 1 commits a
// symbolic move (a position on the delay chain plus an own action or the
// delay pseudo-action); player 2 resolves by letting it happen, preempting
// strictly earlier, or contesting ties adversarially.
class RegionGame {
 public:
  struct ChainPos {
    int vertex = 0;
    int ticks = 0;                    // ticks crossed since the chain start
    std::vector<int> edges_from_prev; // graph edges (delays/ticks) walked
    bool punctual = false;            // the delay to this position is exact
  };
  struct MoveDesc {
    int chain_idx = 0;
    int action = kBot;  // action id of the underlying game, or kBot
    int ta_edge = -1;   // edge realizing the action at the chain position
  };
  struct Transition {
    int target = 0;      // P1 node after the round
    ArenaEvents events;
    int priority = 4;
    int realizer = 1;          // which player's move fired
    MoveDesc realized;         // position and action that fired
  };
  struct Node {
    bool is_move_node = false;
    int vertex = 0;
    int mem = 0;
    int move_idx = -1;  // for move nodes
  };

  GameObjective objective;
  TimedGame game;              // underlying (possibly expanded) game
  RegionGraph rg;              // snz region graph of game.ta
  std::vector<bool> bad_location;

  std::vector<std::vector<ChainPos>> chains;       // per vertex
  std::vector<std::vector<MoveDesc>> vertex_moves; // per vertex, P1 options

  std::vector<Node> nodes;
  std::vector<std::vector<int>> p1_choices;             // P1 node -> move nodes
  std::vector<std::vector<Transition>> resolutions;     // move node -> rounds
  int init_node = 0;

  size_t num_nodes() const { return nodes.size(); }
};

std::unique_ptr<RegionGame> build_region_game(const TimedGame& g, GameObjective obj,
                                              const std::vector<bool>& bad_locations);

// Recomputes every transition priority from its recorded events.
void assign_priorities(RegionGame& game);

// Plain min-parity game graph with vertex priorities.
struct ParityGraph {
  std::vector<int> owner;     // 1 or 2
  std::vector<int> priority;
  std::vector<std::vector<int>> succ;  // every vertex has a successor
};
struct ParityGraphSolution {
  std::vector<bool> p1_wins;
  std::vector<int> strategy;  // per player-1 winning vertex: chosen successor
};
// Zielonka's recursive algorithm; the strategy is positional.
ParityGraphSolution solve_parity_graph(const ParityGraph& g);

struct ParitySolution {
  std::vector<bool> p1_wins;   // per arena node
  std::vector<int> strategy;   // per P1 node: chosen move node, or -1
};

// Arena solving (priorities 1..4 on rounds, min-parity for P1).
ParitySolution solve_parity(const RegionGame& game);

// Per winning P1 node: the committed symbolic move.
struct RegionStrategy {
  struct Entry {
    int node = 0;
    int vertex = 0;
    int mem = 0;
    RegionGame::MoveDesc move;
  };
  std::vector<Entry> entries;
};

struct RealizeResult {
  bool realizable = false;
  std::unique_ptr<RegionGame> arena;
  ParitySolution solution;
  std::optional<RegionStrategy> strategy;
};

// Player-1 winning-strategy existence for the (direct) objective, via the
// expanded game and the region arena. Multi-dimensional inputs always use
// the product expansion.
RealizeResult realize(const TimedGame& g, const PrioritySpec& spec, bool direct);

// Winner of the plain timed safety game (avoid `unsafe`) under the same
// winning-condition semantics; used to cross-check the reduction.
bool solve_safety_game(const TimedGame& g, const std::vector<bool>& unsafe);

RegionStrategy extract_strategy(const RegionGame& game, const ParitySolution& sol);
std::string strategy_dump(const RegionGame& game, const RegionStrategy& strat);
std::string region_game_dot(const RegionGame& game, const ParitySolution& sol);

// One play of the strategy against a randomized opponent; returns the
// concrete play over game.ta for oracle-level evaluation. A stalling
// adversary always resolves at the earliest chain position, trying to
// freeze time and force a convergent outcome.
Play simulate_strategy(const RegionGame& game, const ParitySolution& sol,
                       std::mt19937_64& rng, int rounds, bool stalling = false);

}  // namespace twp
