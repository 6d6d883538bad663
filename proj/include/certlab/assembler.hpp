#ifndef CERTLAB_ASSEMBLER_HPP
#define CERTLAB_ASSEMBLER_HPP

// Expands ProgramIR primitives into transition tables.  Every primitive has a
// fixed gadget, so step counts are stable:
//
//   move t d k        k states, k steps
//   seek t d S        1 state, distance + 1 steps
//   write / copy / shift / branch     1 state, 1 step
//   cmp a b L, scan a b               1 state, iterations + 1 steps
//   modscan t c L     6 states: scan with counter wraparound, then an end
//                     check that leaves c at the start of its run
//   inc c             2 states: carry walk left, return walk right to LSB
//   dec c Z           3 states: borrow walk left, return walk, zero restore
//   label, goto, accept, reject       no states (jumps resolve statically)
//
// Binary counters keep the head parked on the least significant bit; the
// most significant bit is the leftmost non-blank cell.

#include <functional>

#include "certlab/program_ir.hpp"

namespace certlab {

class AssemblyError : public std::runtime_error {
 public:
  enum class Kind {
    TapeLayout,
    UnknownTape,
    UnresolvedLabel,
    DuplicateLabel,
    ReadOnlyWrite,
    AlphabetOverflow,
    BadCounter,
    GotoCycle,
  };
  AssemblyError(Kind k, std::size_t line, const std::string& msg)
      : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) + msg), kind_(k), line_(line) {}
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

struct CompiledArtifact {
  MachineSpec machine;
  // For every state, the index of the IR instruction it was expanded from
  // (npos for the halting states).
  std::vector<std::size_t> source_map;
};

inline constexpr std::size_t kMaxKeysPerState = std::size_t{1} << 16;

namespace detail {

class Assembler {
 public:
  explicit Assembler(const ir::ProgramIR& p) : p_(p) {}

  CompiledArtifact run() {
    check_layout();
    build_alphabet();
    collect_labels();
    for (std::size_t i = 0; i < p_.code.size(); ++i) check(i);
    allocate_states();
    entry_.assign(p_.code.size() + 1, kUnresolved);
    spec_.start = entry(0);
    for (std::size_t i = 0; i < p_.code.size(); ++i) emit(i);
    auto v = validate_machine(spec_);
    if (!v.empty()) throw std::logic_error("assembler emitted an invalid machine: " + v.front().message);
    return {std::move(spec_), std::move(source_map_)};
  }

 private:
  using Read = std::array<Symbol, kMaxTapes>;
  struct Act {
    StateId to;
    Read write;
    std::array<Move, kMaxTapes> move{};
  };
  using Rule = std::function<std::optional<Act>(const Read&)>;
  static constexpr StateId kUnresolved = std::numeric_limits<StateId>::max();
  static constexpr StateId kResolving = kUnresolved - 1;

  [[noreturn]] void fail(AssemblyError::Kind k, std::size_t i, const std::string& msg) const {
    throw AssemblyError(k, i < p_.code.size() ? p_.code[i].line : 0, msg);
  }

  void distinct(std::size_t i, const std::string& a, const std::string& b) {
    tape(i, a), tape(i, b);
    if (a == b) fail(AssemblyError::Kind::TapeLayout, i, "primitive needs two different tapes, got '" + a + "' twice");
  }

  void check_layout() {
    std::size_t in = 0, cert = 0;
    for (const auto& t : p_.tapes) {
      in += t.role == TapeRole::Input;
      cert += t.role == TapeRole::Certificate;
      if (std::find(t.symbols.begin(), t.symbols.end(), p_.blank) == t.symbols.end())
        throw AssemblyError(AssemblyError::Kind::AlphabetOverflow, 0, "tape " + t.name + " does not declare the blank");
    }
    if (in != 1 || cert != 1 || p_.tapes.size() > kMaxTapes)
      throw AssemblyError(AssemblyError::Kind::TapeLayout, 0,
                          "program needs exactly one input and one certificate tape");
    std::size_t keys = 1;
    for (const auto& t : p_.tapes) {
      keys *= t.symbols.size();
      if (keys > kMaxKeysPerState)
        throw AssemblyError(AssemblyError::Kind::AlphabetOverflow, 0,
                            "tape alphabets give more than " + std::to_string(kMaxKeysPerState) +
                                " symbol vectors per state");
    }
  }

  void build_alphabet() {
    spec_.name = p_.name;
    spec_.alphabet.push_back(p_.blank);
    for (const auto& t : p_.tapes) {
      spec_.tapes.push_back(t.role);
      for (const auto& s : t.symbols)
        if (!spec_.find_symbol(s)) spec_.alphabet.push_back(s);
      std::vector<Symbol> ids;
      for (const auto& s : t.symbols) ids.push_back(*spec_.find_symbol(s));
      tape_syms_.push_back(std::move(ids));
    }
  }

  void collect_labels() {
    for (std::size_t i = 0; i < p_.code.size(); ++i)
      if (auto* l = std::get_if<ir::Label>(&p_.code[i].op)) {
        if (l->name == ir::kAcceptTarget || l->name == ir::kRejectTarget)
          fail(AssemblyError::Kind::DuplicateLabel, i, "label '" + l->name + "' is reserved");
        if (!labels_.emplace(l->name, i).second)
          fail(AssemblyError::Kind::DuplicateLabel, i, "duplicate label '" + l->name + "'");
      }
  }

  std::size_t tape(std::size_t i, const std::string& name) const {
    std::size_t t = p_.tape_index(name);
    if (t == p_.tapes.size()) fail(AssemblyError::Kind::UnknownTape, i, "unknown tape '" + name + "'");
    return t;
  }
  std::size_t writable(std::size_t i, const std::string& name) const {
    std::size_t t = tape(i, name);
    if (is_read_only(p_.tapes[t].role))
      fail(AssemblyError::Kind::ReadOnlyWrite, i, "primitive writes read-only tape '" + name + "'");
    return t;
  }
  Symbol symbol(std::size_t i, std::size_t t, const std::string& s) const {
    const auto& syms = p_.tapes[t].symbols;
    if (std::find(syms.begin(), syms.end(), s) == syms.end())
      fail(AssemblyError::Kind::AlphabetOverflow, i,
           "symbol '" + s + "' is not in the alphabet of tape '" + p_.tapes[t].name + "'");
    return *spec_.find_symbol(s);
  }
  void target(std::size_t i, const std::string& l) const {
    if (l != ir::kAcceptTarget && l != ir::kRejectTarget && !labels_.count(l))
      fail(AssemblyError::Kind::UnresolvedLabel, i, "unresolved label '" + l + "'");
  }
  void counter(std::size_t i, const std::string& name) const {
    std::size_t t = writable(i, name);
    const auto& syms = p_.tapes[t].symbols;
    for (const char* bit : {"0", "1"})
      if (std::find(syms.begin(), syms.end(), bit) == syms.end())
        fail(AssemblyError::Kind::BadCounter, i, "counter tape '" + name + "' must declare 0 and 1");
  }

  void check(std::size_t i) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, ir::MoveOp>) tape(i, o.tape);
          else if constexpr (std::is_same_v<T, ir::Seek>) {
            std::size_t t = tape(i, o.tape);
            for (const auto& s : o.stop) symbol(i, t, s);
          } else if constexpr (std::is_same_v<T, ir::Write>) symbol(i, writable(i, o.tape), o.symbol);
          else if constexpr (std::is_same_v<T, ir::Copy>) {
            std::size_t s = tape(i, o.src), d = writable(i, o.dst);
            for (const auto& sym : p_.tapes[s].symbols) symbol(i, d, sym);
            for (const auto& m : o.moves) tape(i, m.tape);
          } else if constexpr (std::is_same_v<T, ir::Shift>) {
            for (const auto& m : o.moves) tape(i, m.tape);
          } else if constexpr (std::is_same_v<T, ir::Compare>) {
            distinct(i, o.a, o.b), target(i, o.on_mismatch);
          } else if constexpr (std::is_same_v<T, ir::Scan>) {
            distinct(i, o.a, o.b);
          } else if constexpr (std::is_same_v<T, ir::ModScan>) {
            distinct(i, o.tape, o.counter), writable(i, o.counter), target(i, o.on_nonzero);
          } else if constexpr (std::is_same_v<T, ir::Increment>) counter(i, o.counter);
          else if constexpr (std::is_same_v<T, ir::Decrement>) {
            counter(i, o.counter), target(i, o.on_zero);
          } else if constexpr (std::is_same_v<T, ir::Branch>) {
            std::size_t t = tape(i, o.tape);
            for (const auto& [s, l] : o.cases) symbol(i, t, s), target(i, l);
            if (o.otherwise) target(i, *o.otherwise);
          } else if constexpr (std::is_same_v<T, ir::Goto>) target(i, o.target);
        },
        p_.code[i].op);
  }

  static std::size_t state_count(const ir::Op& op) {
    return std::visit(
        [](const auto& o) -> std::size_t {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, ir::MoveOp>) return o.count;
          else if constexpr (std::is_same_v<T, ir::ModScan>) return 6;
          else if constexpr (std::is_same_v<T, ir::Increment>) return 2;
          else if constexpr (std::is_same_v<T, ir::Decrement>) return 3;
          else if constexpr (std::is_same_v<T, ir::Label> || std::is_same_v<T, ir::Goto> ||
                             std::is_same_v<T, ir::Halt>)
            return 0;
          else return 1;
        },
        op);
  }

  static const char* op_name(const ir::Op& op) {
    static constexpr const char* names[] = {"label", "move", "seek",    "write", "copy",   "shift", "cmp",
                                            "scan",  "modscan", "inc", "dec",   "branch", "goto",  "halt"};
    return names[op.index()];
  }

  void allocate_states() {
    first_state_.resize(p_.code.size());
    for (std::size_t i = 0; i < p_.code.size(); ++i) {
      first_state_[i] = static_cast<StateId>(spec_.states.size());
      std::size_t n = state_count(p_.code[i].op);
      for (std::size_t k = 0; k < n; ++k) {
        std::string name = "i" + std::to_string(i) + "." + op_name(p_.code[i].op);
        if (n > 1) name += "." + std::to_string(k);
        spec_.states.push_back(std::move(name));
        source_map_.push_back(i);
      }
    }
    spec_.accept = static_cast<StateId>(spec_.states.size());
    spec_.states.push_back("accept");
    spec_.reject = static_cast<StateId>(spec_.states.size());
    spec_.states.push_back("reject");
    source_map_.push_back(std::string::npos);
    source_map_.push_back(std::string::npos);
  }

  StateId label_entry(const std::string& l) {
    if (l == ir::kAcceptTarget) return spec_.accept;
    if (l == ir::kRejectTarget) return spec_.reject;
    return entry(labels_.at(l));
  }

  // State reached when control arrives at instruction i.
  StateId entry(std::size_t i) {
    if (i >= p_.code.size()) return spec_.reject;
    if (entry_[i] == kResolving) fail(AssemblyError::Kind::GotoCycle, i, "jump cycle without any primitive");
    if (entry_[i] != kUnresolved) return entry_[i];
    entry_[i] = kResolving;
    const ir::Op& op = p_.code[i].op;
    StateId s;
    if (auto* g = std::get_if<ir::Goto>(&op)) s = label_entry(g->target);
    else if (auto* h = std::get_if<ir::Halt>(&op)) s = h->accept ? spec_.accept : spec_.reject;
    else if (state_count(op) == 0) s = entry(i + 1);
    else s = first_state_[i];
    entry_[i] = s;
    return s;
  }

  void add_rules(StateId from, const Rule& rule) {
    const std::size_t tc = tape_syms_.size();
    std::array<std::size_t, kMaxTapes> idx{};
    Read r{};
    for (;;) {
      for (std::size_t k = 0; k < tc; ++k) r[k] = tape_syms_[k][idx[k]];
      if (auto act = rule(r)) {
        Transition t;
        t.from = from;
        t.to = act->to;
        t.read = r;
        t.write = act->write;
        t.move = act->move;
        spec_.transitions.push_back(t);
      }
      std::size_t k = 0;
      while (k < tc && ++idx[k] == tape_syms_[k].size()) idx[k++] = 0;
      if (k == tc) break;
    }
  }

  static Act stay(StateId to, const Read& r) {
    Act a{to, r, {}};
    a.move.fill(Move::Stay);
    return a;
  }

  bool is_term(Symbol s) const {
    for (const auto& t : p_.terminators)
      if (spec_.alphabet[s] == t) return true;
    return false;
  }

  void emit(std::size_t i) {
    const StateId s0 = first_state_[i];
    const StateId next = entry(i + 1);
    const Symbol one = spec_.find_symbol("1").value_or(kBlank);
    const Symbol zero = spec_.find_symbol("0").value_or(kBlank);
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, ir::MoveOp>) {
            std::size_t t = tape(i, o.tape);
            for (std::size_t k = 0; k < o.count; ++k) {
              StateId to = k + 1 < o.count ? s0 + static_cast<StateId>(k + 1) : next;
              add_rules(s0 + static_cast<StateId>(k), [&](const Read& r) {
                Act a = stay(to, r);
                a.move[t] = o.dir;
                return a;
              });
            }
          } else if constexpr (std::is_same_v<T, ir::Seek>) {
            std::size_t t = tape(i, o.tape);
            std::vector<Symbol> stop;
            for (const auto& s : o.stop) stop.push_back(*spec_.find_symbol(s));
            add_rules(s0, [&](const Read& r) {
              if (std::find(stop.begin(), stop.end(), r[t]) != stop.end()) return stay(next, r);
              Act a = stay(s0, r);
              a.move[t] = o.dir;
              return a;
            });
          } else if constexpr (std::is_same_v<T, ir::Write>) {
            std::size_t t = tape(i, o.tape);
            Symbol w = *spec_.find_symbol(o.symbol);
            add_rules(s0, [&](const Read& r) {
              Act a = stay(next, r);
              a.write[t] = w;
              return a;
            });
          } else if constexpr (std::is_same_v<T, ir::Copy>) {
            std::size_t src = tape(i, o.src), dst = tape(i, o.dst);
            add_rules(s0, [&](const Read& r) {
              Act a = stay(next, r);
              a.write[dst] = r[src];
              for (const auto& m : o.moves) a.move[tape(i, m.tape)] = m.dir;
              return a;
            });
          } else if constexpr (std::is_same_v<T, ir::Shift>) {
            add_rules(s0, [&](const Read& r) {
              Act a = stay(next, r);
              for (const auto& m : o.moves) a.move[tape(i, m.tape)] = m.dir;
              return a;
            });
          } else if constexpr (std::is_same_v<T, ir::Compare> || std::is_same_v<T, ir::Scan>) {
            std::size_t a = tape(i, o.a), b = tape(i, o.b);
            StateId mismatch = next;
            if constexpr (std::is_same_v<T, ir::Compare>) mismatch = label_entry(o.on_mismatch);
            add_rules(s0, [&](const Read& r) {
              if (is_term(r[a]) || is_term(r[b])) return stay(next, r);
              if constexpr (std::is_same_v<T, ir::Compare>)
                if (r[a] != r[b]) return stay(mismatch, r);
              Act act = stay(s0, r);
              act.move[a] = act.move[b] = Move::Right;
              return act;
            });
          } else if constexpr (std::is_same_v<T, ir::ModScan>) {
            emit_modscan(i, o, s0, next);
          } else if constexpr (std::is_same_v<T, ir::Increment>) {
            std::size_t c = tape(i, o.counter);
            const StateId carry = s0, ret = s0 + 1;
            add_rules(carry, [&](const Read& r) {
              Act a = stay(carry, r);
              if (r[c] == one) {
                a.write[c] = zero;
                a.move[c] = Move::Left;
              } else {
                a.to = ret;
                a.write[c] = one;
                a.move[c] = Move::Right;
              }
              return a;
            });
            emit_return(c, ret, next);
          } else if constexpr (std::is_same_v<T, ir::Decrement>) {
            std::size_t c = tape(i, o.counter);
            const StateId borrow = s0, ret = s0 + 1, restore = s0 + 2;
            const StateId on_zero = label_entry(o.on_zero);
            add_rules(borrow, [&](const Read& r) {
              Act a = stay(borrow, r);
              if (r[c] == one) {
                a.to = ret;
                a.write[c] = zero;
                a.move[c] = Move::Right;
              } else if (r[c] == kBlank) {
                a.to = restore;
                a.move[c] = Move::Right;
              } else {
                a.write[c] = one;
                a.move[c] = Move::Left;
              }
              return a;
            });
            emit_return(c, ret, next);
            // Counter was zero: undo the borrow walk and leave it at zero.
            add_rules(restore, [&](const Read& r) {
              if (r[c] == kBlank) {
                Act a = stay(on_zero, r);
                a.move[c] = Move::Left;
                return a;
              }
              Act a = stay(restore, r);
              a.write[c] = zero;
              a.move[c] = Move::Right;
              return a;
            });
          } else if constexpr (std::is_same_v<T, ir::Branch>) {
            std::size_t t = tape(i, o.tape);
            std::vector<std::pair<Symbol, StateId>> cases;
            for (const auto& [s, l] : o.cases) cases.emplace_back(*spec_.find_symbol(s), label_entry(l));
            StateId other = o.otherwise ? label_entry(*o.otherwise) : next;
            add_rules(s0, [&](const Read& r) {
              for (const auto& [sym, to] : cases)
                if (r[t] == sym) return stay(to, r);
              return stay(other, r);
            });
          }
        },
        p_.code[i].op);
  }

  // Walk right to the blank past the LSB, then step back onto it.
  void emit_return(std::size_t c, StateId ret, StateId next) {
    add_rules(ret, [&](const Read& r) {
      Act a = stay(r[c] == kBlank ? next : ret, r);
      a.move[c] = r[c] == kBlank ? Move::Left : Move::Right;
      return a;
    });
  }

  void emit_modscan(std::size_t i, const ir::ModScan& o, StateId s0, StateId next) {
    std::size_t t = tape(i, o.tape), c = tape(i, o.counter);
    const StateId scan = s0, wrap = s0 + 1, end = s0 + 2, end_prev = s0 + 3, zero_rw = s0 + 4, nz_rw = s0 + 5;
    const StateId nonzero = label_entry(o.on_nonzero);
    auto mv = [&](StateId to, const Read& r, std::initializer_list<std::pair<std::size_t, Move>> ms) {
      Act a = stay(to, r);
      for (auto [tp, d] : ms) a.move[tp] = d;
      return a;
    };
    add_rules(scan, [&](const Read& r) {
      if (is_term(r[t])) return stay(end, r);
      if (r[c] == kBlank) return mv(wrap, r, {{c, Move::Left}});
      return mv(scan, r, {{t, Move::Right}, {c, Move::Right}});
    });
    add_rules(wrap, [&](const Read& r) {
      if (r[c] == kBlank) return mv(scan, r, {{c, Move::Right}});
      return mv(wrap, r, {{c, Move::Left}});
    });
    add_rules(end, [&](const Read& r) {
      if (r[c] == kBlank) return mv(zero_rw, r, {{c, Move::Left}});
      return mv(end_prev, r, {{c, Move::Left}});
    });
    add_rules(end_prev, [&](const Read& r) {
      if (r[c] == kBlank) return mv(next, r, {{c, Move::Right}});
      return mv(nz_rw, r, {{c, Move::Left}});
    });
    for (auto [st, to] : {std::pair{zero_rw, next}, std::pair{nz_rw, nonzero}}) {
      add_rules(st, [&, st = st, to = to](const Read& r) {
        if (r[c] == kBlank) return mv(to, r, {{c, Move::Right}});
        return mv(st, r, {{c, Move::Left}});
      });
    }
  }

  const ir::ProgramIR& p_;
  MachineSpec spec_;
  std::vector<std::vector<Symbol>> tape_syms_;
  std::map<std::string, std::size_t, std::less<>> labels_;
  std::vector<StateId> first_state_;
  std::vector<StateId> entry_;
  std::vector<std::size_t> source_map_;
};

}  // namespace detail

inline CompiledArtifact assemble(const ir::ProgramIR& program) { return detail::Assembler(program).run(); }

}  // namespace certlab

#endif  // CERTLAB_ASSEMBLER_HPP
