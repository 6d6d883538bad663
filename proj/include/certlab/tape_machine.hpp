#ifndef CERTLAB_TAPE_MACHINE_HPP
#define CERTLAB_TAPE_MACHINE_HPP

// Multi-tape deterministic Turing machines with a read-only input tape, a
// read-only certificate tape and any number of work tapes.  Acceptance is by
// halting in the accept state; every transition costs exactly one step.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace certlab {

using Symbol = std::uint16_t;
using StateId = std::uint32_t;

inline constexpr std::size_t kMaxTapes = 8;
inline constexpr Symbol kBlank = 0;  // alphabet[0] is always the blank

enum class TapeRole : std::uint8_t { Input, Certificate, Work };
enum class Move : std::uint8_t { Left, Right, Stay };

inline char move_char(Move m) {
  switch (m) {
    case Move::Left: return 'L';
    case Move::Right: return 'R';
    case Move::Stay: return 'S';
  }
  return '?';
}

inline bool is_read_only(TapeRole r) { return r != TapeRole::Work; }

/// One rule of the transition table.  Only the first `tape_count()` entries of
/// each array are meaningful.
struct Transition {
  StateId from = 0;
  StateId to = 0;
  std::array<Symbol, kMaxTapes> read{};
  std::array<Symbol, kMaxTapes> write{};
  std::array<Move, kMaxTapes> move{};
};

struct MachineSpec {
  std::string name;
  std::vector<std::string> states;
  StateId start = 0;
  StateId accept = 0;
  StateId reject = 0;
  std::vector<std::string> alphabet;  // alphabet[0] is the blank
  std::vector<TapeRole> tapes;
  std::vector<Transition> transitions;

  std::size_t tape_count() const { return tapes.size(); }

  std::optional<StateId> find_state(std::string_view s) const {
    for (StateId i = 0; i < states.size(); ++i)
      if (states[i] == s) return i;
    return std::nullopt;
  }
  std::optional<Symbol> find_symbol(std::string_view s) const {
    for (std::size_t i = 0; i < alphabet.size(); ++i)
      if (alphabet[i] == s) return static_cast<Symbol>(i);
    return std::nullopt;
  }
  std::size_t tape_of_role(TapeRole role) const {
    for (std::size_t i = 0; i < tapes.size(); ++i)
      if (tapes[i] == role) return i;
    return tapes.size();
  }
  bool is_halting(StateId s) const { return s == accept || s == reject; }
};

// --------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  TapeLayout,
  UnknownState,
  SymbolNotInAlphabet,
  Nondeterministic,
  ReadOnlyWrite,
  HaltingStateHasRule,
  EmptyAlphabet,
};

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> rule;  // index into transitions
  std::string message;
};

inline std::string describe_key(const MachineSpec& spec, const Transition& t) {
  std::string s = "(";
  s += t.from < spec.states.size() ? spec.states[t.from] : "?";
  s += ", [";
  for (std::size_t i = 0; i < spec.tape_count(); ++i) {
    if (i) s += ',';
    s += t.read[i] < spec.alphabet.size() ? spec.alphabet[t.read[i]] : "?";
  }
  s += "])";
  return s;
}

/// Checks every MachineSpec invariant.  An empty result means the machine is
/// well formed; violations are reported as data.
inline std::vector<Violation> validate_machine(const MachineSpec& spec) {
  std::vector<Violation> out;
  const std::size_t tc = spec.tape_count();
  if (spec.alphabet.empty())
    out.push_back({ViolationKind::EmptyAlphabet, std::nullopt, "alphabet is empty"});
  std::size_t inputs = 0, certs = 0;
  for (TapeRole r : spec.tapes) {
    inputs += r == TapeRole::Input;
    certs += r == TapeRole::Certificate;
  }
  if (inputs != 1 || certs != 1 || tc > kMaxTapes)
    out.push_back({ViolationKind::TapeLayout, std::nullopt,
                   "machine needs exactly one input tape, one certificate tape and at most " +
                       std::to_string(kMaxTapes) + " tapes"});
  const auto n_states = spec.states.size();
  for (StateId s : {spec.start, spec.accept, spec.reject})
    if (s >= n_states)
      out.push_back({ViolationKind::UnknownState, std::nullopt, "distinguished state out of range"});
  if (spec.accept == spec.reject && spec.accept < n_states)
    out.push_back({ViolationKind::UnknownState, std::nullopt, "accept and reject must differ"});
  if (!out.empty() && tc > kMaxTapes) return out;

  struct KeyHash {
    std::size_t operator()(const std::pair<StateId, std::array<Symbol, kMaxTapes>>& k) const {
      std::size_t h = k.first * 0x9E3779B97F4A7C15ull;
      for (Symbol s : k.second) h = (h ^ s) * 0x100000001B3ull;
      return h;
    }
  };
  std::unordered_map<std::pair<StateId, std::array<Symbol, kMaxTapes>>, std::size_t, KeyHash> seen;
  seen.reserve(spec.transitions.size());

  for (std::size_t i = 0; i < spec.transitions.size(); ++i) {
    const Transition& t = spec.transitions[i];
    if (t.from >= n_states || t.to >= n_states) {
      out.push_back({ViolationKind::UnknownState, i, "rule " + std::to_string(i) + " names an unknown state"});
      continue;
    }
    if (spec.is_halting(t.from))
      out.push_back({ViolationKind::HaltingStateHasRule, i,
                     "halting state " + spec.states[t.from] + " has outgoing rule " + describe_key(spec, t)});
    bool symbols_ok = true;
    for (std::size_t k = 0; k < tc; ++k)
      if (t.read[k] >= spec.alphabet.size() || t.write[k] >= spec.alphabet.size()) symbols_ok = false;
    if (!symbols_ok) {
      out.push_back({ViolationKind::SymbolNotInAlphabet, i, "rule " + std::to_string(i) + " uses a symbol outside the alphabet"});
      continue;
    }
    for (std::size_t k = 0; k < tc; ++k)
      if (is_read_only(spec.tapes[k]) && t.write[k] != t.read[k])
        out.push_back({ViolationKind::ReadOnlyWrite, i,
                       "rule " + describe_key(spec, t) + " writes " + spec.alphabet[t.write[k]] + " over " +
                           spec.alphabet[t.read[k]] + " on read-only tape " + std::to_string(k)});
    std::array<Symbol, kMaxTapes> key{};
    std::copy_n(t.read.begin(), tc, key.begin());
    auto [it, inserted] = seen.emplace(std::make_pair(t.from, key), i);
    if (!inserted)
      out.push_back({ViolationKind::Nondeterministic, i,
                     "Nondeterministic" + describe_key(spec, t) + ": rules " + std::to_string(it->second) + " and " +
                         std::to_string(i)});
  }
  return out;
}

class InvalidMachine : public std::runtime_error {
 public:
  InvalidMachine(std::string what, std::vector<Violation> v)
      : std::runtime_error(std::move(what)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------------------
// Execution

enum class RunStatus { Accepted, Rejected, FuelExhausted, Stuck };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Accepted: return "accepted";
    case RunStatus::Rejected: return "rejected";
    case RunStatus::FuelExhausted: return "fuel-exhausted";
    case RunStatus::Stuck: return "stuck";
  }
  return "?";
}

struct Excursion {
  std::int64_t min_cell = 0;
  std::int64_t max_cell = 0;
};

struct RunResult {
  RunStatus status = RunStatus::Stuck;
  std::uint64_t steps = 0;
  std::vector<Excursion> excursions;  // per tape
  StateId final_state = 0;

  bool accepted() const { return status == RunStatus::Accepted; }
};

struct TapeSnapshot {
  std::int64_t first_cell = 0;  // index of cells[0]
  std::vector<Symbol> cells;    // visited range, blank-filled
  std::int64_t head = 0;

  Symbol at(std::int64_t i) const {
    return i >= first_cell && i < first_cell + static_cast<std::int64_t>(cells.size())
               ? cells[static_cast<std::size_t>(i - first_cell)]
               : kBlank;
  }
};

struct Configuration {
  StateId state = 0;
  std::vector<TapeSnapshot> tapes;
  std::uint64_t steps = 0;
};

namespace detail {

// Two-way infinite tape stored as a growable vector around an origin.
class Tape {
 public:
  explicit Tape(std::span<const Symbol> content) : cells_(content.begin(), content.end()) {
    if (cells_.empty()) cells_.push_back(kBlank);
  }

  Symbol read() const { return cells_[pos_]; }
  void write(Symbol s) { cells_[pos_] = s; }
  std::int64_t head() const { return static_cast<std::int64_t>(pos_) - origin_; }

  void move(Move m) {
    if (m == Move::Right) {
      if (++pos_ == cells_.size()) cells_.resize(cells_.size() * 2, kBlank);
      hi_ = std::max(hi_, head());
    } else if (m == Move::Left) {
      if (pos_ == 0) grow_left();
      --pos_;
      lo_ = std::min(lo_, head());
    }
  }

  Excursion excursion() const { return {lo_, hi_}; }

  TapeSnapshot snapshot() const {
    TapeSnapshot s;
    std::int64_t lo = std::min<std::int64_t>(lo_, 0);
    std::int64_t hi = std::max<std::int64_t>(hi_, static_cast<std::int64_t>(cells_.size()) - 1 - origin_);
    s.first_cell = lo;
    s.head = head();
    for (std::int64_t i = lo; i <= hi; ++i) {
      std::int64_t p = i + origin_;
      s.cells.push_back(p >= 0 && p < static_cast<std::int64_t>(cells_.size()) ? cells_[static_cast<std::size_t>(p)]
                                                                                : kBlank);
    }
    while (s.cells.size() > 1 && s.cells.back() == kBlank && s.first_cell + static_cast<std::int64_t>(s.cells.size()) - 1 > std::max(hi_, s.head))
      s.cells.pop_back();
    return s;
  }

 private:
  void grow_left() {
    std::size_t extra = std::max<std::size_t>(cells_.size(), 16);
    cells_.insert(cells_.begin(), extra, kBlank);
    pos_ += extra;
    origin_ += static_cast<std::int64_t>(extra);
  }

  std::vector<Symbol> cells_;
  std::size_t pos_ = 0;
  std::int64_t origin_ = 0;  // vector index of cell 0
  std::int64_t lo_ = 0, hi_ = 0;
};

}  // namespace detail

/// A validated machine together with a lookup table for fast stepping.
/// Immutable after construction and safe to share between threads.
class Simulator {
 public:
  explicit Simulator(MachineSpec spec) : spec_(std::move(spec)) {
    auto v = validate_machine(spec_);
    if (!v.empty()) {
      std::string msg = "invalid machine '" + spec_.name + "':";
      for (std::size_t i = 0; i < std::min<std::size_t>(v.size(), 5); ++i) msg += "\n  " + v[i].message;
      throw InvalidMachine(msg, std::move(v));
    }
    input_tape_ = spec_.tape_of_role(TapeRole::Input);
    cert_tape_ = spec_.tape_of_role(TapeRole::Certificate);
    build_index();
  }

  const MachineSpec& spec() const { return spec_; }

  /// Maps a string of single-character symbol names onto alphabet indices.
  std::vector<Symbol> encode(std::string_view text) const {
    std::vector<Symbol> out;
    out.reserve(text.size());
    for (char c : text) {
      auto s = spec_.find_symbol(std::string_view(&c, 1));
      if (!s) throw EncodingError(std::string("symbol '") + c + "' is not in the alphabet of " + spec_.name);
      out.push_back(*s);
    }
    return out;
  }

  RunResult run(std::string_view input, std::string_view certificate, std::uint64_t fuel) const {
    return run(std::span<const Symbol>(encode(input)), std::span<const Symbol>(encode(certificate)), fuel);
  }

  RunResult run(std::span<const Symbol> input, std::span<const Symbol> certificate, std::uint64_t fuel) const {
    check_symbols(input, "input");
    check_symbols(certificate, "certificate");
    std::vector<detail::Tape> tapes = make_tapes(input, certificate);
    const std::size_t tc = spec_.tape_count();
    StateId state = spec_.start;
    std::uint64_t steps = 0;
    RunStatus status;
    for (;;) {
      if (state == spec_.accept) { status = RunStatus::Accepted; break; }
      if (state == spec_.reject) { status = RunStatus::Rejected; break; }
      if (steps >= fuel) { status = RunStatus::FuelExhausted; break; }
      const Transition* t = lookup(state, tapes);
      if (!t) { status = RunStatus::Stuck; break; }
      for (std::size_t i = 0; i < tc; ++i) {
        tapes[i].write(t->write[i]);
        tapes[i].move(t->move[i]);
      }
      state = t->to;
      ++steps;
    }
    RunResult r;
    r.status = status;
    r.steps = steps;
    r.final_state = state;
    r.excursions.reserve(tc);
    for (auto& tp : tapes) r.excursions.push_back(tp.excursion());
    return r;
  }

  /// The first `limit` configurations of the run (the start configuration
  /// included).
  std::vector<Configuration> trace(std::span<const Symbol> input, std::span<const Symbol> certificate,
                                   std::uint64_t fuel, std::size_t limit) const {
    check_symbols(input, "input");
    check_symbols(certificate, "certificate");
    std::vector<detail::Tape> tapes = make_tapes(input, certificate);
    std::vector<Configuration> out;
    StateId state = spec_.start;
    std::uint64_t steps = 0;
    auto snap = [&] {
      Configuration c;
      c.state = state;
      c.steps = steps;
      for (auto& tp : tapes) c.tapes.push_back(tp.snapshot());
      out.push_back(std::move(c));
    };
    while (out.size() < limit) {
      snap();
      if (spec_.is_halting(state) || steps >= fuel) break;
      const Transition* t = lookup(state, tapes);
      if (!t) break;
      for (std::size_t i = 0; i < spec_.tape_count(); ++i) {
        tapes[i].write(t->write[i]);
        tapes[i].move(t->move[i]);
      }
      state = t->to;
      ++steps;
    }
    return out;
  }

  std::vector<Configuration> trace(std::string_view input, std::string_view certificate, std::uint64_t fuel,
                                   std::size_t limit) const {
    auto in = encode(input);
    auto cert = encode(certificate);
    return trace(std::span<const Symbol>(in), std::span<const Symbol>(cert), fuel, limit);
  }

  /// The transition that fires from `state` on the given symbol vector.
  const Transition* rule_for(StateId state, std::span<const Symbol> read) const {
    std::uint64_t key = state * key_space_;
    for (std::size_t i = 0; i < read.size(); ++i) {
      if (read[i] >= local_[i].size()) return nullptr;
      std::int32_t l = local_[i][read[i]];
      if (l < 0) return nullptr;
      key += static_cast<std::uint64_t>(l) * stride_[i];
    }
    return find(key);
  }

 private:
  void check_symbols(std::span<const Symbol> s, const char* what) const {
    for (Symbol x : s)
      if (x >= spec_.alphabet.size())
        throw EncodingError(std::string(what) + " symbol " + std::to_string(x) + " is not in the alphabet");
  }

  std::vector<detail::Tape> make_tapes(std::span<const Symbol> input, std::span<const Symbol> certificate) const {
    std::vector<detail::Tape> tapes;
    tapes.reserve(spec_.tape_count());
    for (std::size_t i = 0; i < spec_.tape_count(); ++i) {
      if (i == input_tape_)
        tapes.emplace_back(input);
      else if (i == cert_tape_)
        tapes.emplace_back(certificate);
      else
        tapes.emplace_back(std::span<const Symbol>{});
    }
    return tapes;
  }

  const Transition* lookup(StateId state, const std::vector<detail::Tape>& tapes) const {
    std::uint64_t key = state * key_space_;
    for (std::size_t i = 0; i < tapes.size(); ++i) {
      std::int32_t l = local_[i][tapes[i].read()];
      if (l < 0) return nullptr;
      key += static_cast<std::uint64_t>(l) * stride_[i];
    }
    return find(key);
  }

  const Transition* find(std::uint64_t key) const {
    if (!dense_.empty()) {
      std::int32_t r = dense_[key];
      return r < 0 ? nullptr : &spec_.transitions[static_cast<std::size_t>(r)];
    }
    auto it = sparse_.find(key);
    return it == sparse_.end() ? nullptr : &spec_.transitions[it->second];
  }

  // Per tape, the symbols that occur in some rule key get a dense local index;
  // the table key is state * key_space + sum(local * stride).
  void build_index() {
    const std::size_t tc = spec_.tape_count();
    local_.assign(tc, std::vector<std::int32_t>(spec_.alphabet.size(), -1));
    std::vector<std::int32_t> counts(tc, 0);
    for (const Transition& t : spec_.transitions)
      for (std::size_t i = 0; i < tc; ++i)
        if (local_[i][t.read[i]] < 0) local_[i][t.read[i]] = counts[i]++;
    stride_.assign(tc, 1);
    key_space_ = 1;
    for (std::size_t i = 0; i < tc; ++i) {
      stride_[i] = key_space_;
      key_space_ *= std::max<std::uint64_t>(counts[i], 1);
    }
    const std::uint64_t total = key_space_ * spec_.states.size();
    constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 25;
    auto key_of = [&](const Transition& t) {
      std::uint64_t k = t.from * key_space_;
      for (std::size_t i = 0; i < tc; ++i) k += static_cast<std::uint64_t>(local_[i][t.read[i]]) * stride_[i];
      return k;
    };
    if (total <= kDenseLimit) {
      dense_.assign(total, -1);
      for (std::size_t r = 0; r < spec_.transitions.size(); ++r)
        dense_[key_of(spec_.transitions[r])] = static_cast<std::int32_t>(r);
    } else {
      sparse_.reserve(spec_.transitions.size());
      for (std::size_t r = 0; r < spec_.transitions.size(); ++r) sparse_.emplace(key_of(spec_.transitions[r]), r);
    }
  }

  MachineSpec spec_;
  std::size_t input_tape_ = 0;
  std::size_t cert_tape_ = 1;
  std::vector<std::vector<std::int32_t>> local_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t key_space_ = 1;
  std::vector<std::int32_t> dense_;
  std::unordered_map<std::uint64_t, std::size_t> sparse_;
};

/// Runs `spec` once.  Validates the machine first; prefer constructing a
/// Simulator when the same machine is run repeatedly.
inline RunResult run(const MachineSpec& spec, std::span<const Symbol> input, std::span<const Symbol> certificate,
                     std::uint64_t fuel) {
  return Simulator(spec).run(input, certificate, fuel);
}

inline std::vector<Configuration> trace(const MachineSpec& spec, std::span<const Symbol> input,
                                        std::span<const Symbol> certificate, std::uint64_t fuel,
                                        std::size_t limit) {
  return Simulator(spec).trace(input, certificate, fuel, limit);
}

}  // namespace certlab

#endif  // CERTLAB_TAPE_MACHINE_HPP
