#ifndef CERTLAB_PROGRAM_IR_HPP
#define CERTLAB_PROGRAM_IR_HPP

// Structured head-movement programs.  A program declares its tapes (with the
// symbols each tape may hold) and a flat list of primitives with labels.
//
// .tmir text form, one primitive per line:
//
//   name: periodic-verifier
//   blank: _
//   terminators: _ \#
//   tape in input _ a b
//   tape cert certificate _ 0 1
//   tape w work _ 1 a b
//   loop:
//     move w R 2            shift in:R w:L        write w 1
//     seek w L _,a          copy in w in:R w:R    cmp in w mismatch
//     scan in w             modscan in w nonzero  inc k
//     dec k zero            branch in a=x _=y else=z
//     goto loop             accept                reject
//
// `accept` and `reject` are also valid jump targets.  Falling off the end of
// the program rejects.

#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "certlab/machine_text.hpp"

namespace certlab::ir {

struct TapeDecl {
  std::string name;
  TapeRole role = TapeRole::Work;
  std::vector<std::string> symbols;  // includes the blank
};

struct HeadMove {
  std::string tape;
  Move dir = Move::Stay;
};

struct Label { std::string name; };
struct MoveOp { std::string tape; Move dir; std::size_t count = 1; };
struct Seek { std::string tape; Move dir; std::vector<std::string> stop; };
struct Write { std::string tape; std::string symbol; };
struct Copy { std::string src, dst; std::vector<HeadMove> moves; };
struct Shift { std::vector<HeadMove> moves; };
struct Compare { std::string a, b; std::string on_mismatch; };
struct Scan { std::string a, b; };
struct ModScan { std::string tape, counter; std::string on_nonzero; };
struct Increment { std::string counter; };
struct Decrement { std::string counter; std::string on_zero; };
struct Branch {
  std::string tape;
  std::vector<std::pair<std::string, std::string>> cases;  // symbol -> label
  std::optional<std::string> otherwise;
};
struct Goto { std::string target; };
struct Halt { bool accept = false; };

using Op = std::variant<Label, MoveOp, Seek, Write, Copy, Shift, Compare, Scan, ModScan, Increment, Decrement,
                        Branch, Goto, Halt>;

struct Instr {
  Op op;
  std::size_t line = 0;  // source line, 0 when built programmatically
};

struct ProgramIR {
  std::string name;
  std::string blank = "_";
  std::vector<std::string> terminators{"_", "#"};
  std::vector<TapeDecl> tapes;
  std::vector<Instr> code;

  const TapeDecl* tape(std::string_view n) const {
    for (const auto& t : tapes)
      if (t.name == n) return &t;
    return nullptr;
  }
  std::size_t tape_index(std::string_view n) const {
    for (std::size_t i = 0; i < tapes.size(); ++i)
      if (tapes[i].name == n) return i;
    return tapes.size();
  }
};

inline constexpr std::string_view kAcceptTarget = "accept";
inline constexpr std::string_view kRejectTarget = "reject";

/// Small fluent builder used by the shipped problem machines.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(std::string name) { p_.name = std::move(name); }

  ProgramBuilder& tape(std::string name, TapeRole role, std::vector<std::string> symbols) {
    p_.tapes.push_back({std::move(name), role, std::move(symbols)});
    return *this;
  }
  ProgramBuilder& label(std::string n) { return add(Label{std::move(n)}); }
  ProgramBuilder& move(std::string t, Move d, std::size_t count = 1) { return add(MoveOp{std::move(t), d, count}); }
  ProgramBuilder& seek(std::string t, Move d, std::vector<std::string> stop) {
    return add(Seek{std::move(t), d, std::move(stop)});
  }
  ProgramBuilder& write(std::string t, std::string s) { return add(Write{std::move(t), std::move(s)}); }
  ProgramBuilder& copy(std::string src, std::string dst, std::vector<HeadMove> moves = {}) {
    return add(Copy{std::move(src), std::move(dst), std::move(moves)});
  }
  ProgramBuilder& shift(std::vector<HeadMove> moves) { return add(Shift{std::move(moves)}); }
  ProgramBuilder& compare(std::string a, std::string b, std::string on_mismatch) {
    return add(Compare{std::move(a), std::move(b), std::move(on_mismatch)});
  }
  ProgramBuilder& scan(std::string a, std::string b) { return add(Scan{std::move(a), std::move(b)}); }
  ProgramBuilder& modscan(std::string t, std::string counter, std::string on_nonzero) {
    return add(ModScan{std::move(t), std::move(counter), std::move(on_nonzero)});
  }
  ProgramBuilder& inc(std::string counter) { return add(Increment{std::move(counter)}); }
  ProgramBuilder& dec(std::string counter, std::string on_zero) {
    return add(Decrement{std::move(counter), std::move(on_zero)});
  }
  ProgramBuilder& branch(std::string t, std::vector<std::pair<std::string, std::string>> cases,
                         std::optional<std::string> otherwise = std::nullopt) {
    return add(Branch{std::move(t), std::move(cases), std::move(otherwise)});
  }
  ProgramBuilder& jump(std::string target) { return add(Goto{std::move(target)}); }
  ProgramBuilder& accept() { return add(Halt{true}); }
  ProgramBuilder& reject() { return add(Halt{false}); }
  // Back to the first cell of the run the head is on, or of the run just to
  // its left when the head rests on the blank past its end.
  ProgramBuilder& rewind(const std::string& t) {
    return move(t, Move::Left).seek(t, Move::Left, {p_.blank}).move(t, Move::Right);
  }

  ProgramIR build() && { return std::move(p_); }
  const ProgramIR& peek() const { return p_; }

 private:
  ProgramBuilder& add(Op op) {
    p_.code.push_back({std::move(op), 0});
    return *this;
  }
  ProgramIR p_;
};

// --------------------------------------------------------------------------
// Text form

class IrParseError : public std::runtime_error {
 public:
  IrParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline Move parse_dir(std::string_view s, std::size_t line) {
  if (s == "L") return Move::Left;
  if (s == "R") return Move::Right;
  if (s == "S") return Move::Stay;
  throw IrParseError(line, "direction must be L, R or S");
}

inline HeadMove parse_head_move(std::string_view s, std::size_t line) {
  auto colon = s.rfind(':');
  if (colon == std::string_view::npos) throw IrParseError(line, "expected <tape>:<dir>, got '" + std::string(s) + "'");
  return {std::string(s.substr(0, colon)), parse_dir(s.substr(colon + 1), line)};
}

}  // namespace detail

inline ProgramIR parse_program(std::string_view text) {
  ProgramIR p;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    auto tok = certlab::detail::split_ws(raw);
    if (tok.empty()) continue;
    const std::string& h = tok[0];
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (tok.size() < lo || tok.size() > hi) throw IrParseError(lineno, "wrong number of operands for '" + h + "'");
    };
    auto sym = [](const std::string& s) { return certlab::detail::unescape_symbol(s); };
    if (h == "name:") {
      need(2, 2);
      p.name = tok[1];
    } else if (h == "blank:") {
      need(2, 2);
      p.blank = sym(tok[1]);
    } else if (h == "terminators:") {
      p.terminators.clear();
      for (std::size_t i = 1; i < tok.size(); ++i) p.terminators.push_back(sym(tok[i]));
    } else if (h == "tape") {
      if (tok.size() < 4) throw IrParseError(lineno, "tape <name> <input|certificate|work> <symbols...>");
      TapeDecl d;
      d.name = tok[1];
      if (tok[2] == "input") d.role = TapeRole::Input;
      else if (tok[2] == "certificate") d.role = TapeRole::Certificate;
      else if (tok[2] == "work") d.role = TapeRole::Work;
      else throw IrParseError(lineno, "unknown tape role '" + tok[2] + "'");
      for (std::size_t i = 3; i < tok.size(); ++i) d.symbols.push_back(sym(tok[i]));
      p.tapes.push_back(std::move(d));
    } else if (tok.size() == 1 && h.size() > 1 && h.back() == ':') {
      p.code.push_back({Label{h.substr(0, h.size() - 1)}, lineno});
    } else if (h == "move") {
      need(3, 4);
      std::size_t count = 1;
      if (tok.size() == 4) {
        try {
          count = std::stoul(tok[3]);
        } catch (const std::exception&) {
          throw IrParseError(lineno, "bad count '" + tok[3] + "'");
        }
      }
      p.code.push_back({MoveOp{tok[1], detail::parse_dir(tok[2], lineno), count}, lineno});
    } else if (h == "seek") {
      need(4, 4);
      p.code.push_back({Seek{tok[1], detail::parse_dir(tok[2], lineno), certlab::detail::split_commas(tok[3])}, lineno});
    } else if (h == "write") {
      need(3, 3);
      p.code.push_back({Write{tok[1], sym(tok[2])}, lineno});
    } else if (h == "copy") {
      need(3, 3 + kMaxTapes);
      Copy c{tok[1], tok[2], {}};
      for (std::size_t i = 3; i < tok.size(); ++i) c.moves.push_back(detail::parse_head_move(tok[i], lineno));
      p.code.push_back({std::move(c), lineno});
    } else if (h == "shift") {
      need(2, 1 + kMaxTapes);
      Shift s;
      for (std::size_t i = 1; i < tok.size(); ++i) s.moves.push_back(detail::parse_head_move(tok[i], lineno));
      p.code.push_back({std::move(s), lineno});
    } else if (h == "cmp") {
      need(4, 4);
      p.code.push_back({Compare{tok[1], tok[2], tok[3]}, lineno});
    } else if (h == "scan") {
      need(3, 3);
      p.code.push_back({Scan{tok[1], tok[2]}, lineno});
    } else if (h == "modscan") {
      need(4, 4);
      p.code.push_back({ModScan{tok[1], tok[2], tok[3]}, lineno});
    } else if (h == "inc") {
      need(2, 2);
      p.code.push_back({Increment{tok[1]}, lineno});
    } else if (h == "dec") {
      need(3, 3);
      p.code.push_back({Decrement{tok[1], tok[2]}, lineno});
    } else if (h == "branch") {
      if (tok.size() < 3) throw IrParseError(lineno, "branch <tape> <sym>=<label>... [else=<label>]");
      Branch b{tok[1], {}, std::nullopt};
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto eq = tok[i].rfind('=');
        if (eq == std::string::npos || eq == 0) throw IrParseError(lineno, "bad branch case '" + tok[i] + "'");
        std::string key = tok[i].substr(0, eq), target = tok[i].substr(eq + 1);
        if (key == "else") b.otherwise = target;
        else b.cases.emplace_back(sym(key), target);
      }
      p.code.push_back({std::move(b), lineno});
    } else if (h == "goto") {
      need(2, 2);
      p.code.push_back({Goto{tok[1]}, lineno});
    } else if (h == "accept" || h == "reject") {
      need(1, 1);
      p.code.push_back({Halt{h == "accept"}, lineno});
    } else {
      throw IrParseError(lineno, "unknown primitive '" + h + "'");
    }
  }
  return p;
}

inline std::string format_program(const ProgramIR& p) {
  using certlab::detail::escape_symbol;
  std::ostringstream os;
  auto dir = [](Move m) { return std::string(1, move_char(m)); };
  auto moves = [&](const std::vector<HeadMove>& ms) {
    std::string s;
    for (const auto& m : ms) s += " " + m.tape + ":" + dir(m.dir);
    return s;
  };
  os << "name: " << p.name << "\nblank: " << escape_symbol(p.blank) << "\nterminators:";
  for (const auto& t : p.terminators) os << ' ' << escape_symbol(t);
  os << "\n";
  for (const auto& t : p.tapes) {
    os << "tape " << t.name << ' '
       << (t.role == TapeRole::Input ? "input" : t.role == TapeRole::Certificate ? "certificate" : "work");
    for (const auto& s : t.symbols) os << ' ' << escape_symbol(s);
    os << "\n";
  }
  for (const auto& ins : p.code) {
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, Label>) {
            os << op.name << ":\n";
            return;
          } else {
            os << "  ";
            if constexpr (std::is_same_v<T, MoveOp>) os << "move " << op.tape << ' ' << dir(op.dir) << ' ' << op.count;
            else if constexpr (std::is_same_v<T, Seek>) {
              os << "seek " << op.tape << ' ' << dir(op.dir) << ' ';
              for (std::size_t i = 0; i < op.stop.size(); ++i) os << (i ? "," : "") << escape_symbol(op.stop[i]);
            } else if constexpr (std::is_same_v<T, Write>) os << "write " << op.tape << ' ' << escape_symbol(op.symbol);
            else if constexpr (std::is_same_v<T, Copy>) os << "copy " << op.src << ' ' << op.dst << moves(op.moves);
            else if constexpr (std::is_same_v<T, Shift>) os << "shift" << moves(op.moves);
            else if constexpr (std::is_same_v<T, Compare>) os << "cmp " << op.a << ' ' << op.b << ' ' << op.on_mismatch;
            else if constexpr (std::is_same_v<T, Scan>) os << "scan " << op.a << ' ' << op.b;
            else if constexpr (std::is_same_v<T, ModScan>) os << "modscan " << op.tape << ' ' << op.counter << ' ' << op.on_nonzero;
            else if constexpr (std::is_same_v<T, Increment>) os << "inc " << op.counter;
            else if constexpr (std::is_same_v<T, Decrement>) os << "dec " << op.counter << ' ' << op.on_zero;
            else if constexpr (std::is_same_v<T, Branch>) {
              os << "branch " << op.tape;
              for (const auto& [s, l] : op.cases) os << ' ' << escape_symbol(s) << '=' << l;
              if (op.otherwise) os << " else=" << *op.otherwise;
            } else if constexpr (std::is_same_v<T, Goto>) os << "goto " << op.target;
            else if constexpr (std::is_same_v<T, Halt>) os << (op.accept ? "accept" : "reject");
            os << "\n";
          }
        },
        ins.op);
  }
  return os.str();
}

// --------------------------------------------------------------------------
// Host-level interpreter.  Executes primitives by their meaning (loops and
// arithmetic in C++), independently of the state gadgets the assembler
// emits; used to check assembled machines.

enum class IrVerdict { Accepted, Rejected, Diverged };

inline IrVerdict interpret(const ProgramIR& p, std::string_view input, std::string_view certificate,
                           std::uint64_t budget = 50'000'000) {
  struct HostTape {
    std::map<std::int64_t, std::string> cells;
    std::int64_t head = 0;
  };
  const std::string& blank = p.blank;
  std::vector<HostTape> tapes(p.tapes.size());
  for (std::size_t i = 0; i < p.tapes.size(); ++i) {
    std::string_view src = p.tapes[i].role == TapeRole::Input         ? input
                           : p.tapes[i].role == TapeRole::Certificate ? certificate
                                                                      : std::string_view{};
    for (std::size_t k = 0; k < src.size(); ++k) tapes[i].cells[static_cast<std::int64_t>(k)] = std::string(1, src[k]);
  }
  auto T = [&](const std::string& name) -> HostTape& { return tapes[p.tape_index(name)]; };
  auto get = [&](HostTape& t, std::int64_t at) -> std::string {
    auto it = t.cells.find(at);
    return it == t.cells.end() ? blank : it->second;
  };
  auto rd = [&](HostTape& t) { return get(t, t.head); };
  auto put = [&](HostTape& t, std::int64_t at, const std::string& s) {
    if (s == blank) t.cells.erase(at);
    else t.cells[at] = s;
  };
  auto step = [](HostTape& t, Move d) { t.head += d == Move::Right ? 1 : d == Move::Left ? -1 : 0; };
  auto is_term = [&](const std::string& s) {
    return std::find(p.terminators.begin(), p.terminators.end(), s) != p.terminators.end();
  };

  std::map<std::string, std::size_t, std::less<>> labels;
  for (std::size_t i = 0; i < p.code.size(); ++i)
    if (auto* l = std::get_if<Label>(&p.code[i].op)) labels[l->name] = i;

  std::size_t pc = 0;
  std::uint64_t work = 0;
  // Returns false when the target is a halting pseudo-label.
  std::optional<IrVerdict> halted;
  auto jump = [&](const std::string& target) {
    if (target == kAcceptTarget) halted = IrVerdict::Accepted;
    else if (target == kRejectTarget) halted = IrVerdict::Rejected;
    else pc = labels.at(target);
  };

  while (!halted) {
    if (pc >= p.code.size()) return IrVerdict::Rejected;
    if (++work > budget) return IrVerdict::Diverged;
    const Op& op = p.code[pc].op;
    std::size_t next = pc + 1;
    bool jumped = false;
    auto go = [&](const std::string& target) {
      jump(target);
      jumped = true;
    };
    std::visit(
        [&](const auto& o) {
          using Ty = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<Ty, Label>) {
          } else if constexpr (std::is_same_v<Ty, MoveOp>) {
            for (std::size_t k = 0; k < o.count; ++k) step(T(o.tape), o.dir);
          } else if constexpr (std::is_same_v<Ty, Seek>) {
            HostTape& t = T(o.tape);
            while (std::find(o.stop.begin(), o.stop.end(), rd(t)) == o.stop.end()) {
              step(t, o.dir);
              if (++work > budget) return;
            }
          } else if constexpr (std::is_same_v<Ty, Write>) {
            put(T(o.tape), T(o.tape).head, o.symbol);
          } else if constexpr (std::is_same_v<Ty, Copy>) {
            put(T(o.dst), T(o.dst).head, rd(T(o.src)));
            for (const auto& m : o.moves) step(T(m.tape), m.dir);
          } else if constexpr (std::is_same_v<Ty, Shift>) {
            for (const auto& m : o.moves) step(T(m.tape), m.dir);
          } else if constexpr (std::is_same_v<Ty, Compare>) {
            HostTape &a = T(o.a), &b = T(o.b);
            while (!is_term(rd(a)) && !is_term(rd(b))) {
              if (rd(a) != rd(b)) {
                go(o.on_mismatch);
                return;
              }
              ++a.head, ++b.head;
            }
          } else if constexpr (std::is_same_v<Ty, Scan>) {
            HostTape &a = T(o.a), &b = T(o.b);
            while (!is_term(rd(a)) && !is_term(rd(b))) ++a.head, ++b.head;
          } else if constexpr (std::is_same_v<Ty, ModScan>) {
            HostTape &t = T(o.tape), &c = T(o.counter);
            std::int64_t period = 0;
            while (get(c, c.head + period) != blank) ++period;
            std::int64_t len = 0;
            while (!is_term(rd(t))) ++t.head, ++len;
            if (period == 0) {
              work = budget + 1;  // undefined on an empty counter: diverges
              return;
            }
            if (len % period != 0) go(o.on_nonzero);
          } else if constexpr (std::is_same_v<Ty, Increment> || std::is_same_v<Ty, Decrement>) {
            // Binary counter ending at the head (LSB) and starting after the
            // blank to its left (MSB).
            // An empty counter is a head resting on a blank.
            HostTape& c = T(o.counter);
            std::int64_t lo = c.head;
            while (get(c, lo - 1) != blank) --lo;
            std::uint64_t value = 0;
            std::int64_t width = c.head - lo + 1;
            if (get(c, c.head) == blank) width = 0;
            for (std::int64_t i = 0; i < width; ++i) value = value * 2 + (get(c, lo + i) == "1" ? 1 : 0);
            if constexpr (std::is_same_v<Ty, Decrement>) {
              if (value == 0) {
                for (std::int64_t i = 0; i < width; ++i) put(c, lo + i, "0");
                go(o.on_zero);
                return;
              }
              --value;
            } else {
              ++value;
              // Growing past the MSB extends the counter one cell left.
              if (width == 0 || value >> width) {
                ++width;
                if (get(c, c.head) == blank && width == 1) lo = c.head;
                else --lo;
              }
            }
            for (std::int64_t i = width - 1; i >= 0; --i) {
              put(c, lo + i, (value & 1) ? "1" : "0");
              value >>= 1;
            }
          } else if constexpr (std::is_same_v<Ty, Branch>) {
            std::string s = rd(T(o.tape));
            for (const auto& [sym, target] : o.cases)
              if (sym == s) {
                go(target);
                return;
              }
            if (o.otherwise) go(*o.otherwise);
          } else if constexpr (std::is_same_v<Ty, Goto>) {
            go(o.target);
          } else if constexpr (std::is_same_v<Ty, Halt>) {
            halted = o.accept ? IrVerdict::Accepted : IrVerdict::Rejected;
          }
        },
        op);
    if (work > budget) return IrVerdict::Diverged;
    if (!jumped) pc = next;
  }
  return *halted;
}

}  // namespace certlab::ir

#endif  // CERTLAB_PROGRAM_IR_HPP
