#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "twp/concretize.hpp"
#include "twp/games.hpp"
#include "twp/oracle.hpp"
#include "twp/parser.hpp"
#include "twp/regions.hpp"
#include "twp/verify.hpp"

namespace {

using twp::Error;
using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

twp::ParseResult load_model(const std::string& path) {
  auto r = twp::parse_model(read_file(path));
  if (!r.ok()) {
    for (const auto& d : r.diagnostics) {
      std::cerr << path;
      if (d.line >= 0) std::cerr << ":" << d.line;
      std::cerr << ": " << d.message << "\n";
    }
    throw Error("model rejected");
  }
  return r;
}

std::vector<long long> parse_lambda(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    long long v = std::stoll(item, &pos);
    if (pos != item.size() || v < 1)
      throw Error("window bounds must be positive integers: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw Error("empty window bound list");
  return out;
}

twp::PrioritySpec spec_for(const twp::TimedAutomaton& ta, const std::string& lambda) {
  twp::PrioritySpec spec{parse_lambda(lambda)};
  if (spec.dimension() != ta.dimension())
    throw Error("model has " + std::to_string(ta.dimension()) +
                " priority dimension(s) but " + std::to_string(spec.dimension()) +
                " window bound(s) were given");
  return spec;
}

// Expanded automaton in DOT form, the edge-reachable fragment highlighted.
std::string expanded_dot(const twp::ExpandedAutomaton& xa) {
  std::vector<bool> reach(xa.ta.locations.size(), false);
  reach[xa.ta.initial] = true;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& e : xa.ta.edges)
      if (reach[e.src] && !reach[e.dst]) {
        reach[e.dst] = true;
        grew = true;
      }
  }
  std::ostringstream out;
  out << "digraph expanded {\n  rankdir=LR;\n";
  for (size_t l = 0; l < xa.ta.locations.size(); ++l) {
    const auto& loc = xa.ta.locations[l];
    out << "  l" << l << " [label=\"" << loc.name << "\\n"
        << twp::constraint_str(xa.ta, loc.invariant) << "\""
        << (static_cast<int>(l) == xa.ta.initial ? ", shape=doubleoctagon" : "")
        << (reach[l] ? "" : ", style=dotted, color=gray") << "];\n";
  }
  for (const auto& e : xa.ta.edges) {
    out << "  l" << e.src << " -> l" << e.dst << " [label=\""
        << twp::constraint_str(xa.ta, e.guard) << ", " << xa.ta.actions.at(e.action);
    if (!e.resets.empty()) {
      out << ", {";
      for (size_t i = 0; i < e.resets.size(); ++i)
        out << (i ? "," : "") << xa.ta.clocks.at(e.resets[i]);
      out << "}";
    }
    out << "\"" << (reach[e.src] ? "" : ", style=dotted, color=gray") << "];\n";
  }
  out << "}\n";
  return out.str();
}

int run_verify(const std::string& model_path, const std::string& lambda, bool direct,
               bool product, bool as_json, const std::string& dot_path) {
  auto parsed = load_model(model_path);
  const twp::TimedAutomaton& ta = *parsed.automaton;
  twp::PrioritySpec spec = spec_for(ta, lambda);

  auto t0 = std::chrono::steady_clock::now();
  twp::Verdict v = product ? (direct ? twp::verify_direct(ta, spec)
                                     : twp::verify_tw(ta, spec))
                           : twp::verify_per_dimension(ta, spec, direct);
  auto ms = std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0).count();

  if (!dot_path.empty()) {
    twp::ExpandedAutomaton xa = twp::expand(ta, spec);
    write_file(dot_path, twp::region_graph_dot(twp::snz_transform(xa.ta, xa.bad_mask())));
  }

  if (as_json) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "verify";
    j["model"] = model_path;
    j["objective"] = direct ? "dtw" : "tw";
    j["lambda"] = spec.lambda;
    j["holds"] = v.holds;
    j["sizes"] = {{"expanded_locations", v.stats.expanded_locations},
                  {"expanded_edges", v.stats.expanded_edges},
                  {"region_vertices", v.stats.region_vertices},
                  {"region_edges", v.stats.region_edges}};
    if (v.counterexample)
      j["counterexample"] = twp::emit_trace(ta, *v.counterexample);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (direct ? "direct timed window" : "timed window") << " objective: "
              << (v.holds ? "HOLDS" : "VIOLATED") << "\n";
    std::cout << "expanded locations: " << v.stats.expanded_locations
              << ", region vertices: " << v.stats.region_vertices << ", "
              << ms << " ms\n";
    if (v.counterexample) {
      std::cout << "counterexample lasso:\n" << twp::emit_trace(ta, *v.counterexample);
    }
  }
  return v.holds ? 0 : 1;
}

int run_realize(const std::string& model_path, const std::string& lambda, bool direct,
                bool as_json, const std::string& strategy_path,
                const std::string& dot_path) {
  auto parsed = load_model(model_path);
  if (!parsed.is_game())
    throw Error("realize requires a game model (actions need owner clauses)");
  twp::TimedGame g = parsed.game();
  twp::PrioritySpec spec = spec_for(g.ta, lambda);

  auto t0 = std::chrono::steady_clock::now();
  twp::RealizeResult r = twp::realize(g, spec, direct);
  auto ms = std::chrono::duration<double, std::milli>(
                std::chrono::steady_clock::now() - t0).count();

  if (r.realizable && !strategy_path.empty())
    write_file(strategy_path, twp::strategy_dump(*r.arena, *r.strategy));
  if (!dot_path.empty())
    write_file(dot_path, twp::region_game_dot(*r.arena, r.solution));

  if (as_json) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "realize";
    j["model"] = model_path;
    j["objective"] = direct ? "dtw" : "tw";
    j["lambda"] = spec.lambda;
    j["realizable"] = r.realizable;
    j["sizes"] = {{"arena_nodes", r.arena->num_nodes()},
                  {"region_vertices", r.arena->rg.num_vertices()}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "player 1 " << (r.realizable ? "WINS" : "does NOT win") << " the "
              << (direct ? "direct " : "") << "timed window objective\n";
    std::cout << "arena nodes: " << r.arena->num_nodes() << ", region vertices: "
              << r.arena->rg.num_vertices() << ", " << ms << " ms\n";
    if (r.realizable && !strategy_path.empty())
      std::cout << "strategy written to " << strategy_path << "\n";
  }
  return r.realizable ? 0 : 1;
}

int run_expand(const std::string& model_path, const std::string& lambda,
               const std::string& dot_path) {
  auto parsed = load_model(model_path);
  twp::PrioritySpec spec = spec_for(*parsed.automaton, lambda);
  twp::ExpandedAutomaton xa = twp::expand(*parsed.automaton, spec);
  std::vector<int> owners;
  if (parsed.is_game()) {
    twp::ExpandedGame xg = twp::expand_game(parsed.game(), spec);
    owners = xg.owner;
  }
  std::cout << twp::emit_model(xa.ta, parsed.is_game() ? &owners : nullptr);
  if (!dot_path.empty()) write_file(dot_path, expanded_dot(xa));
  return 0;
}

int run_check_trace(const std::string& model_path, const std::string& trace_path,
                    const std::string& lambda, const std::string& objective) {
  auto parsed = load_model(model_path);
  const twp::TimedAutomaton& ta = *parsed.automaton;
  twp::PrioritySpec spec = spec_for(ta, lambda);
  twp::LassoPlay pi = twp::parse_trace(ta, read_file(trace_path));

  bool all = true;
  for (int dim = 0; dim < spec.dimension(); ++dim) {
    bool ok;
    if (objective == "parity") {
      ok = twp::check_parity(ta, pi, dim);
    } else {
      twp::TimedAutomaton sliced = ta;
      for (auto& l : sliced.locations) l.priorities = {l.priorities.at(dim)};
      twp::PrioritySpec one{{spec.lambda[dim]}};
      ok = objective == "dtw" ? twp::check_dtw(sliced, pi, one)
                              : twp::check_tw(sliced, pi, one);
    }
    std::cout << "dimension " << (dim + 1) << ": " << (ok ? "true" : "false") << "\n";
    all = all && ok;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"timed window parity verification and synthesis"};
  app.require_subcommand(1);

  std::string model, lambda, trace, objective = "dtw";
  std::string dot_path, strategy_path;
  bool direct = false, product = false, as_json = false;

  auto* verify = app.add_subcommand("verify", "check all time-divergent paths");
  verify->add_option("model", model)->required();
  verify->add_option("--lambda", lambda, "window bounds N1[,N2,...]")->required();
  verify->add_flag("--direct", direct, "direct objective");
  verify->add_flag("--product", product, "force the product expansion");
  verify->add_flag("--json", as_json);
  verify->add_option("--dot", dot_path, "write the region graph as DOT");

  auto* realize = app.add_subcommand("realize", "decide player-1 realizability");
  realize->add_option("model", model)->required();
  realize->add_option("--lambda", lambda)->required();
  realize->add_flag("--direct", direct);
  realize->add_flag("--json", as_json);
  realize->add_option("--strategy", strategy_path, "write the winning strategy");
  realize->add_option("--dot", dot_path, "write the arena with winning-set coloring");

  auto* expand = app.add_subcommand("expand", "emit the expanded automaton");
  expand->add_option("model", model)->required();
  expand->add_option("--lambda", lambda)->required();
  expand->add_option("--dot", dot_path);

  auto* check = app.add_subcommand("check-trace", "evaluate a lasso trace");
  check->add_option("model", model)->required();
  check->add_option("trace", trace)->required();
  check->add_option("--lambda", lambda)->required();
  check->add_option("--objective", objective)->check(CLI::IsMember({"dtw", "tw", "parity"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed())
      return run_verify(model, lambda, direct, product, as_json, dot_path);
    if (realize->parsed())
      return run_realize(model, lambda, direct, as_json, strategy_path, dot_path);
    if (expand->parsed()) return run_expand(model, lambda, dot_path);
    if (check->parsed()) return run_check_trace(model, trace, lambda, objective);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
