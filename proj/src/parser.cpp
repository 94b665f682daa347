#include "twp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace twp {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) { toks.push_back(cur); cur.clear(); }
  };
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) { flush(); continue; }
    // Punctuation that separates tokens even without whitespace.
    if (c == '{' || c == '}' || c == '[' || c == ']' || c == ',') {
      flush();
      toks.push_back(std::string(1, c));
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      flush();
      toks.push_back("->");
      ++i;
      continue;
    }
    if (c == '&' && i + 1 < line.size() && line[i + 1] == '&') {
      flush();
      toks.push_back("&&");
      ++i;
      continue;
    }
    if (c == '<' || c == '>' || c == '=' || c == '!') {
      flush();
      std::string op(1, c);
      if (i + 1 < line.size() && line[i + 1] == '=') { op += '='; ++i; }
      toks.push_back(op);
      continue;
    }
    cur += c;
  }
  flush();
  return toks;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  ParseResult run() {
    std::istringstream in(text_);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto toks = tokenize(line);
      if (toks.empty()) continue;
      parse_line(lineno, toks);
    }
    finish();
    ParseResult r;
    r.diagnostics = diags_;
    if (diags_.empty()) {
      r.automaton = std::move(ta_);
      if (saw_owner_) r.owners = std::move(owners_);
    }
    return r;
  }

 private:
  void err(int line, const std::string& m) { diags_.push_back({line, m}); }

  void parse_line(int ln, const std::vector<std::string>& t) {
    const std::string& kw = t[0];
    if (kw == "automaton") {
      if (t.size() != 2) { err(ln, "expected: automaton NAME"); return; }
      ta_.name = t[1];
    } else if (kw == "clock") {
      if (t.size() != 2) { err(ln, "expected: clock NAME"); return; }
      if (ta_.find_clock(t[1]) >= 0) { err(ln, "duplicate clock " + t[1]); return; }
      ta_.clocks.push_back(t[1]);
    } else if (kw == "action") {
      parse_action(ln, t);
    } else if (kw == "loc") {
      parse_loc(ln, t);
    } else if (kw == "edge") {
      pending_edges_.push_back({ln, t});
    } else {
      err(ln, "unknown directive '" + kw + "'");
    }
  }

  void parse_action(int ln, const std::vector<std::string>& t) {
    if (t.size() != 2 && !(t.size() == 4 && t[2] == "owner")) {
      err(ln, "expected: action NAME [owner 1|2]");
      return;
    }
    if (ta_.find_action(t[1]) >= 0) { err(ln, "duplicate action " + t[1]); return; }
    ta_.actions.push_back(t[1]);
    int owner = 0;
    if (t.size() == 4) {
      if (t[3] == "1") owner = 1;
      else if (t[3] == "2") owner = 2;
      else { err(ln, "owner must be 1 or 2"); return; }
      saw_owner_ = true;
    }
    owners_.push_back(owner);
    owner_lines_.push_back(ln);
  }

  void parse_loc(int ln, const std::vector<std::string>& t) {
    size_t i = 1;
    if (i >= t.size()) { err(ln, "expected: loc NAME ..."); return; }
    Location loc;
    loc.name = t[i++];
    if (ta_.find_location(loc.name) >= 0) { err(ln, "duplicate location " + loc.name); return; }
    bool init = false;
    if (i < t.size() && t[i] == "init") { init = true; ++i; }
    if (i >= t.size() || t[i] != "prio") { err(ln, "location requires prio [..]"); return; }
    ++i;
    if (i >= t.size() || t[i] != "[") { err(ln, "expected [ after prio"); return; }
    ++i;
    while (i < t.size() && t[i] != "]") {
      if (t[i] == ",") { ++i; continue; }
      try {
        size_t pos = 0;
        long long p = std::stoll(t[i], &pos);
        if (pos != t[i].size() || p < 0) throw std::invalid_argument("");
        loc.priorities.push_back(static_cast<int>(p));
      } catch (const std::exception&) {
        err(ln, "bad priority '" + t[i] + "'");
        return;
      }
      ++i;
    }
    if (i >= t.size()) { err(ln, "unterminated priority vector"); return; }
    ++i;  // ]
    if (loc.priorities.empty()) { err(ln, "empty priority vector"); return; }
    if (i < t.size()) {
      if (t[i] != "inv") { err(ln, "unexpected token '" + t[i] + "'"); return; }
      ++i;
      auto g = parse_guard(ln, t, i, t.size());
      if (!g) return;
      loc.invariant = *g;
    }
    if (init) {
      if (saw_init_) { err(ln, "multiple init locations"); return; }
      saw_init_ = true;
      ta_.initial = static_cast<int>(ta_.locations.size());
    }
    ta_.locations.push_back(std::move(loc));
  }

  // GUARD ::= true | ATOM (&& ATOM)* ; ATOM ::= clock OP uint
  std::optional<ClockConstraint> parse_guard(int ln, const std::vector<std::string>& t,
                                             size_t from, size_t to) {
    ClockConstraint g;
    if (from >= to) { err(ln, "empty guard"); return std::nullopt; }
    if (t[from] == "true") {
      if (from + 1 != to) { err(ln, "tokens after 'true'"); return std::nullopt; }
      return g;
    }
    size_t i = from;
    while (i < to) {
      if (i + 3 > to) { err(ln, "incomplete guard atom"); return std::nullopt; }
      const std::string& cname = t[i];
      const std::string& op = t[i + 1];
      const std::string& num = t[i + 2];
      int clock = ta_.find_clock(cname);
      if (clock < 0) { err(ln, "unknown clock '" + cname + "'"); return std::nullopt; }
      long long bound = 0;
      try {
        size_t pos = 0;
        bound = std::stoll(num, &pos);
        if (pos != num.size() || bound < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        err(ln, "bad bound '" + num + "'");
        return std::nullopt;
      }
      if (op == "<") g.atoms.push_back({clock, Rel::Lt, bound});
      else if (op == "<=") g.atoms.push_back({clock, Rel::Le, bound});
      else if (op == ">=") g.atoms.push_back({clock, Rel::Ge, bound});
      else if (op == ">") g.atoms.push_back({clock, Rel::Gt, bound});
      else if (op == "==") {
        g.atoms.push_back({clock, Rel::Ge, bound});
        g.atoms.push_back({clock, Rel::Le, bound});
      } else {
        err(ln, "bad relation '" + op + "'");
        return std::nullopt;
      }
      i += 3;
      if (i < to) {
        if (t[i] != "&&") { err(ln, "expected && between atoms"); return std::nullopt; }
        ++i;
      }
    }
    return g;
  }

  void parse_edge(int ln, const std::vector<std::string>& t) {
    // edge SRC -> DST on ACT [when GUARD] [reset {x,y}]
    size_t i = 1;
    auto need = [&](const std::string& what) -> std::optional<std::string> {
      if (i >= t.size()) { err(ln, "expected " + what); return std::nullopt; }
      return t[i++];
    };
    auto src = need("source location");
    if (!src) return;
    if (i >= t.size() || t[i] != "->") { err(ln, "expected ->"); return; }
    ++i;
    auto dst = need("target location");
    if (!dst) return;
    if (i >= t.size() || t[i] != "on") { err(ln, "expected 'on ACTION'"); return; }
    ++i;
    auto act = need("action");
    if (!act) return;

    Edge e;
    e.src = ta_.find_location(*src);
    e.dst = ta_.find_location(*dst);
    e.action = ta_.find_action(*act);
    if (e.src < 0) { err(ln, "unknown location '" + *src + "'"); return; }
    if (e.dst < 0) { err(ln, "unknown location '" + *dst + "'"); return; }
    if (e.action < 0) { err(ln, "unknown action '" + *act + "'"); return; }

    if (i < t.size() && t[i] == "when") {
      ++i;
      size_t guard_end = t.size();
      for (size_t j = i; j < t.size(); ++j)
        if (t[j] == "reset") { guard_end = j; break; }
      auto g = parse_guard(ln, t, i, guard_end);
      if (!g) return;
      e.guard = *g;
      i = guard_end;
    }
    if (i < t.size() && t[i] == "reset") {
      ++i;
      if (i >= t.size() || t[i] != "{") { err(ln, "expected { after reset"); return; }
      ++i;
      while (i < t.size() && t[i] != "}") {
        if (t[i] == ",") { ++i; continue; }
        int c = ta_.find_clock(t[i]);
        if (c < 0) { err(ln, "unknown clock '" + t[i] + "' in reset"); return; }
        e.resets.push_back(c);
        ++i;
      }
      if (i >= t.size()) { err(ln, "unterminated reset set"); return; }
      ++i;  // }
      std::sort(e.resets.begin(), e.resets.end());
      e.resets.erase(std::unique(e.resets.begin(), e.resets.end()), e.resets.end());
    }
    if (i != t.size()) { err(ln, "unexpected trailing tokens"); return; }
    ta_.edges.push_back(std::move(e));
  }

  void finish() {
    // Edges are parsed after all declarations so forward references work.
    for (auto& [ln, toks] : pending_edges_) parse_edge(ln, toks);
    if (ta_.locations.empty()) {
      diags_.push_back({-1, "model has no locations"});
      return;
    }
    if (!saw_init_) diags_.push_back({-1, "no location marked init"});
    if (saw_owner_) {
      for (size_t i = 0; i < owners_.size(); ++i)
        if (owners_[i] == 0)
          diags_.push_back({owner_lines_[i],
                            "action " + ta_.actions[i] + " is missing an owner"});
    }
    if (!diags_.empty()) return;
    for (const auto& d : validate_model(ta_)) diags_.push_back(d);
  }

  std::string text_;
  TimedAutomaton ta_;
  std::vector<int> owners_;
  std::vector<int> owner_lines_;
  std::vector<std::pair<int, std::vector<std::string>>> pending_edges_;
  bool saw_owner_ = false;
  bool saw_init_ = false;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ParseResult parse_model(const std::string& text) {
  return Parser(text).run();
}

std::string constraint_str(const TimedAutomaton& ta, const ClockConstraint& g) {
  if (g.is_true()) return "true";
  std::string out;
  for (size_t i = 0; i < g.atoms.size(); ++i) {
    if (i) out += " && ";
    const auto& a = g.atoms[i];
    out += ta.clocks.at(a.clock) + " " + rel_str(a.rel) + " " + std::to_string(a.bound);
  }
  return out;
}

std::string emit_model(const TimedAutomaton& ta, const std::vector<int>* owners) {
  std::ostringstream out;
  out << "automaton " << (ta.name.empty() ? "M" : ta.name) << "\n";
  for (const auto& c : ta.clocks) out << "clock " << c << "\n";
  for (size_t i = 0; i < ta.actions.size(); ++i) {
    out << "action " << ta.actions[i];
    if (owners) out << " owner " << (*owners)[i];
    out << "\n";
  }
  for (size_t i = 0; i < ta.locations.size(); ++i) {
    const Location& l = ta.locations[i];
    out << "loc " << l.name;
    if (static_cast<int>(i) == ta.initial) out << " init";
    out << " prio [";
    for (size_t j = 0; j < l.priorities.size(); ++j) {
      if (j) out << ",";
      out << l.priorities[j];
    }
    out << "]";
    if (!l.invariant.is_true()) out << " inv " << constraint_str(ta, l.invariant);
    out << "\n";
  }
  for (const auto& e : ta.edges) {
    out << "edge " << ta.locations.at(e.src).name << " -> "
        << ta.locations.at(e.dst).name << " on " << ta.actions.at(e.action);
    if (!e.guard.is_true()) out << " when " << constraint_str(ta, e.guard);
    if (!e.resets.empty()) {
      out << " reset {";
      for (size_t j = 0; j < e.resets.size(); ++j) {
        if (j) out << ",";
        out << ta.clocks.at(e.resets[j]);
      }
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace twp
