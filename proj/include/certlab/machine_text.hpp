#ifndef CERTLAB_MACHINE_TEXT_HPP
#define CERTLAB_MACHINE_TEXT_HPP

// Line-oriented .tm machine files:
//
//   name: periodic-verifier
//   tapes: input:ro certificate:ro work
//   alphabet: _ a b 0 1          # first symbol is the blank
//   start: s0
//   accept: acc
//   reject: rej
//   s0 a,0,_ -> s1 a,0,a R,S,R
//
// States are declared implicitly by use.  '#' starts a comment when it is the
// first character of a token, so '#' itself is written as '\#' in symbol
// lists.

#include <fstream>
#include <map>
#include <sstream>

#include "certlab/tape_machine.hpp"

namespace certlab {

class MachineParseError : public std::runtime_error {
 public:
  MachineParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    if (line[i] == '#') break;  // comment
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string unescape_symbol(std::string_view s) {
  if (s.size() == 2 && s[0] == '\\') return std::string(1, s[1]);
  return std::string(s);
}

inline std::string escape_symbol(std::string_view s) {
  if (s == "#" || s == "\\") return "\\" + std::string(s);
  return std::string(s);
}

inline std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(unescape_symbol(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

/// Parses a .tm document.  Structural errors and MachineSpec invariant
/// violations are reported with the line number of the offending rule.
inline MachineSpec parse_machine(std::string_view text) {
  MachineSpec spec;
  std::map<std::string, StateId, std::less<>> state_ids;
  auto state = [&](const std::string& s) {
    auto [it, inserted] = state_ids.emplace(s, static_cast<StateId>(spec.states.size()));
    if (inserted) spec.states.push_back(s);
    return it->second;
  };
  std::optional<std::string> start, accept, reject;
  std::vector<std::size_t> rule_lines;
  struct PendingRule {
    std::size_t line;
    std::vector<std::string> tokens;
  };
  std::vector<PendingRule> pending;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    auto tok = detail::split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string& head = tok[0];
    if (head.size() > 1 && head.back() == ':') {
      std::string key = head.substr(0, head.size() - 1);
      std::vector<std::string> rest(tok.begin() + 1, tok.end());
      if (key == "name") {
        if (rest.size() != 1) throw MachineParseError(lineno, "name takes one identifier");
        spec.name = rest[0];
      } else if (key == "tapes") {
        for (const auto& t : rest) {
          if (t == "input:ro") spec.tapes.push_back(TapeRole::Input);
          else if (t == "certificate:ro") spec.tapes.push_back(TapeRole::Certificate);
          else if (t == "work") spec.tapes.push_back(TapeRole::Work);
          else throw MachineParseError(lineno, "unknown tape role '" + t + "'");
        }
        if (spec.tapes.size() > kMaxTapes) throw MachineParseError(lineno, "too many tapes");
      } else if (key == "alphabet") {
        if (rest.empty()) throw MachineParseError(lineno, "alphabet is empty");
        for (const auto& s : rest) {
          std::string sym = detail::unescape_symbol(s);
          if (spec.find_symbol(sym)) throw MachineParseError(lineno, "duplicate symbol '" + sym + "'");
          spec.alphabet.push_back(sym);
        }
        if (spec.alphabet.size() > std::numeric_limits<Symbol>::max())
          throw MachineParseError(lineno, "alphabet too large");
      } else if (key == "start" || key == "accept" || key == "reject") {
        if (rest.size() != 1) throw MachineParseError(lineno, key + " takes one state");
        (key == "start" ? start : key == "accept" ? accept : reject) = rest[0];
      } else {
        throw MachineParseError(lineno, "unknown header '" + key + "'");
      }
      continue;
    }
    pending.push_back({lineno, std::move(tok)});
    if (end == text.size()) break;
  }

  if (spec.tapes.empty()) throw MachineParseError(lineno, "missing 'tapes:' header");
  if (spec.alphabet.empty()) throw MachineParseError(lineno, "missing 'alphabet:' header");
  if (!start || !accept || !reject) throw MachineParseError(lineno, "missing start/accept/reject header");
  spec.start = state(*start);
  spec.accept = state(*accept);
  spec.reject = state(*reject);

  const std::size_t tc = spec.tapes.size();
  for (const auto& p : pending) {
    const auto& t = p.tokens;
    if (t.size() != 6 || t[2] != "->")
      throw MachineParseError(p.line, "expected '<state> <r1>,.. -> <state'> <w1>,.. <m1>,..'");
    auto reads = detail::split_commas(t[1]);
    auto writes = detail::split_commas(t[4]);
    auto moves = detail::split_commas(t[5]);
    if (reads.size() != tc || writes.size() != tc || moves.size() != tc)
      throw MachineParseError(p.line, "rule arity does not match the " + std::to_string(tc) + " declared tapes");
    Transition tr;
    tr.from = state(t[0]);
    tr.to = state(t[3]);
    for (std::size_t i = 0; i < tc; ++i) {
      auto r = spec.find_symbol(reads[i]);
      auto w = spec.find_symbol(writes[i]);
      if (!r) throw MachineParseError(p.line, "symbol '" + reads[i] + "' is not in the alphabet");
      if (!w) throw MachineParseError(p.line, "symbol '" + writes[i] + "' is not in the alphabet");
      tr.read[i] = *r;
      tr.write[i] = *w;
      if (moves[i] == "L") tr.move[i] = Move::Left;
      else if (moves[i] == "R") tr.move[i] = Move::Right;
      else if (moves[i] == "S") tr.move[i] = Move::Stay;
      else throw MachineParseError(p.line, "move must be L, R or S, got '" + moves[i] + "'");
    }
    spec.transitions.push_back(tr);
    rule_lines.push_back(p.line);
  }

  auto violations = validate_machine(spec);
  if (!violations.empty()) {
    const auto& v = violations.front();
    std::size_t line = v.rule ? rule_lines[*v.rule] : 1;
    throw MachineParseError(line, v.message);
  }
  return spec;
}

inline MachineSpec load_machine(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_machine(ss.str());
}

inline void write_machine(std::ostream& os, const MachineSpec& spec) {
  os << "name: " << spec.name << "\n";
  os << "tapes:";
  for (TapeRole r : spec.tapes)
    os << (r == TapeRole::Input ? " input:ro" : r == TapeRole::Certificate ? " certificate:ro" : " work");
  os << "\nalphabet:";
  for (const auto& s : spec.alphabet) os << ' ' << detail::escape_symbol(s);
  os << "\nstart: " << spec.states[spec.start] << "\naccept: " << spec.states[spec.accept]
     << "\nreject: " << spec.states[spec.reject] << "\n";
  const std::size_t tc = spec.tape_count();
  for (const Transition& t : spec.transitions) {
    os << spec.states[t.from] << ' ';
    for (std::size_t i = 0; i < tc; ++i) os << (i ? "," : "") << detail::escape_symbol(spec.alphabet[t.read[i]]);
    os << " -> " << spec.states[t.to] << ' ';
    for (std::size_t i = 0; i < tc; ++i) os << (i ? "," : "") << detail::escape_symbol(spec.alphabet[t.write[i]]);
    os << ' ';
    for (std::size_t i = 0; i < tc; ++i) os << (i ? "," : "") << move_char(t.move[i]);
    os << "\n";
  }
}

inline std::string format_machine(const MachineSpec& spec) {
  std::ostringstream os;
  write_machine(os, spec);
  return os.str();
}

}  // namespace certlab

#endif  // CERTLAB_MACHINE_TEXT_HPP
