#ifndef CERTLAB_SINGLE_TAPE_HPP
#define CERTLAB_SINGLE_TAPE_HPP

// Compiles a multi-tape machine into one that simulates every tape on a single
// read-write tape.  Each cell of that tape holds a tuple (one track per
// original tape) plus one head-marker bit per track.  The result keeps the
// read-only input and certificate tapes, copies both onto the tracks first
// (layout), and from then on only moves the head of its single work tape.
//
// One simulated step costs four sweeps over the formatted region:
//   read      left to right, collecting the symbols under the markers of the
//             tapes the current state actually looks at;
//   write     right to left, applying writes and left moves;
//   right     left to right, applying right moves;
//   rewind    back to the left boundary.
// Cells outside the region are plain blanks; a marker moving onto one
// formats it.

#include <map>
#include <queue>

#include "certlab/tape_machine.hpp"

namespace certlab {

class SingleTapeError : public std::runtime_error {
 public:
  SingleTapeError(const std::string& msg, std::size_t required)
      : std::runtime_error(msg), required_(required) {}
  /// Product alphabet size the machine needs.
  std::size_t required_cap() const { return required_; }

 private:
  std::size_t required_;
};

inline constexpr std::size_t kDefaultProductCap = 4096;

namespace detail {

class SingleTapeCompiler {
 public:
  SingleTapeCompiler(const MachineSpec& m, std::size_t cap) : m_(m), cap_(cap), t_(m.tape_count()) {}

  MachineSpec run() {
    auto v = validate_machine(m_);
    if (!v.empty()) throw InvalidMachine("cannot compile an invalid machine: " + v.front().message, v);
    build_tracks();
    build_alphabet();
    analyse_states();
    out_.name = m_.name + "-1tape";
    out_.tapes = {TapeRole::Input, TapeRole::Certificate, TapeRole::Work};
    out_.accept = add_state("accept");
    out_.reject = add_state("reject");
    emit_layout();
    while (!work_.empty()) {
      auto [id, fn] = std::move(work_.front());
      work_.pop();
      fn(id);
    }
    return std::move(out_);
  }

 private:
  static constexpr std::int32_t kKeep = -1;
  static constexpr Symbol kForeign = std::numeric_limits<Symbol>::max();

  struct Action {
    StateId to;
    std::array<std::int32_t, kMaxTapes> write;  // track value index or kKeep
    std::array<Move, kMaxTapes> move;
    auto operator<=>(const Action&) const = default;
  };

  struct Cell {
    std::array<std::uint16_t, kMaxTapes> vals{};
    std::uint32_t markers = 0;
  };

  // ---- tracks and product alphabet -------------------------------------

  void build_tracks() {
    tracks_.assign(t_, {});
    for (std::size_t i = 0; i < t_; ++i) tracks_[i].push_back(kBlank);
    auto add = [&](std::size_t i, Symbol s) {
      if (std::find(tracks_[i].begin(), tracks_[i].end(), s) == tracks_[i].end()) tracks_[i].push_back(s);
    };
    for (const auto& tr : m_.transitions)
      for (std::size_t i = 0; i < t_; ++i) add(i, tr.read[i]), add(i, tr.write[i]);
    for (std::size_t i = 0; i < t_; ++i)
      if (is_read_only(m_.tapes[i]) && tracks_[i].size() < m_.alphabet.size()) tracks_[i].push_back(kForeign);
    std::size_t product = std::size_t{1} << t_;
    radix_.assign(t_, 1);
    std::size_t vals = 1;
    for (std::size_t i = 0; i < t_; ++i) {
      radix_[i] = vals;
      vals *= tracks_[i].size();
    }
    product *= vals;
    if (product > cap_)
      throw SingleTapeError("product alphabet of " + std::to_string(product) + " symbols exceeds the cap of " +
                                std::to_string(cap_) + "; compile with a cap of at least " + std::to_string(product),
                            product);
    n_cells_ = product;
  }

  std::uint16_t value_of(std::size_t tape, Symbol s) const {
    for (std::size_t k = 0; k < tracks_[tape].size(); ++k)
      if (tracks_[tape][k] == s) return static_cast<std::uint16_t>(k);
    return static_cast<std::uint16_t>(tracks_[tape].size() - 1);  // foreign
  }

  Symbol encode(const Cell& c) const {
    std::size_t v = 0;
    for (std::size_t i = 0; i < t_; ++i) v += c.vals[i] * radix_[i];
    return static_cast<Symbol>(base_ + (v << t_) + c.markers);
  }

  Cell decode(Symbol s) const {
    Cell c;
    std::size_t code = s - base_;
    c.markers = static_cast<std::uint32_t>(code & ((std::size_t{1} << t_) - 1));
    std::size_t v = code >> t_;
    for (std::size_t i = 0; i < t_; ++i) {
      c.vals[i] = static_cast<std::uint16_t>(v / radix_[i] % tracks_[i].size());
    }
    return c;
  }

  bool is_tuple(Symbol s) const { return s >= base_; }

  void build_alphabet() {
    out_.alphabet = m_.alphabet;
    base_ = out_.alphabet.size();
    if (base_ + n_cells_ > std::numeric_limits<Symbol>::max())
      throw SingleTapeError("alphabet does not fit the symbol type", base_ + n_cells_);
    for (std::size_t code = 0; code < n_cells_; ++code) {
      Cell c = decode(static_cast<Symbol>(base_ + code));
      std::string name = "<";
      for (std::size_t i = 0; i < t_; ++i) {
        if (i) name += '|';
        Symbol s = tracks_[i][c.vals[i]];
        name += s == kForeign ? std::string("?") : m_.alphabet[s];
        if (c.markers >> i & 1) name += '^';
      }
      name += '>';
      out_.alphabet.push_back(std::move(name));
    }
  }

  // ---- per-state behaviour of the original machine ----------------------

  void analyse_states() {
    const std::size_t n_vals = n_cells_ >> t_;
    std::vector<std::vector<const Transition*>> by_state(m_.states.size());
    for (const auto& tr : m_.transitions) by_state[tr.from].push_back(&tr);
    keep_.assign(m_.states.size(), {});
    table_.assign(m_.states.size(), {});
    relevant_.assign(m_.states.size(), 0);
    for (StateId q = 0; q < m_.states.size(); ++q) {
      if (m_.is_halting(q)) continue;
      auto& keep = keep_[q];
      keep.fill(true);
      for (const Transition* tr : by_state[q])
        for (std::size_t i = 0; i < t_; ++i) keep[i] = keep[i] && tr->write[i] == tr->read[i];
      auto& table = table_[q];
      table.assign(n_vals, -1);
      for (const Transition* tr : by_state[q]) {
        std::size_t v = 0;
        for (std::size_t i = 0; i < t_; ++i) v += value_of(i, tr->read[i]) * radix_[i];
        Action a{};
        a.to = tr->to;
        for (std::size_t i = 0; i < t_; ++i) {
          a.write[i] = keep[i] ? kKeep : value_of(i, tr->write[i]);
          a.move[i] = tr->move[i];
        }
        table[v] = intern(a);
      }
      std::uint32_t rel = 0;
      for (std::size_t i = 0; i < t_; ++i) {
        for (std::size_t v = 0; v < n_vals && !(rel >> i & 1); ++v) {
          std::size_t vi = v / radix_[i] % tracks_[i].size();
          if (vi == 0) continue;
          if (table[v] != table[v - vi * radix_[i]]) rel |= 1u << i;
        }
      }
      relevant_[q] = rel;
    }
  }

  std::int32_t intern(const Action& a) {
    auto [it, inserted] = action_ids_.emplace(a, static_cast<std::int32_t>(actions_.size()));
    if (inserted) actions_.push_back(a);
    return it->second;
  }

  // ---- state allocation ---------------------------------------------------

  StateId add_state(std::string name) {
    out_.states.push_back(std::move(name));
    return static_cast<StateId>(out_.states.size() - 1);
  }

  template <class Key>
  StateId lazy(std::map<Key, StateId>& index, const Key& key, const std::string& name,
               std::function<void(StateId, const Key&)> body) {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    StateId id = add_state(name);
    index.emplace(key, id);
    work_.emplace(id, [body, key](StateId s) { body(s, key); });
    return id;
  }

  struct Out {
    StateId to;
    Symbol write;
    Move move;
  };

  // Rules for a state whose input and certificate heads rest on blanks.
  void emit_sim(StateId from, const std::function<std::optional<Out>(Symbol)>& f) {
    emit_layout_state(from, {kBlank}, {kBlank}, all_cells(), [&](Symbol, Symbol, Symbol cell) -> std::optional<Step> {
      auto o = f(cell);
      if (!o) return std::nullopt;
      return Step{o->to, Move::Stay, Move::Stay, o->write, o->move};
    });
  }

  struct Step {
    StateId to;
    Move in_move, cert_move;
    Symbol write;
    Move move;
  };

  std::vector<Symbol> all_cells() const {
    std::vector<Symbol> v{kBlank};
    for (std::size_t c = 0; c < n_cells_; ++c) v.push_back(static_cast<Symbol>(base_ + c));
    return v;
  }

  void emit_layout_state(StateId from, const std::vector<Symbol>& ins, const std::vector<Symbol>& certs,
                         const std::vector<Symbol>& cells,
                         const std::function<std::optional<Step>(Symbol, Symbol, Symbol)>& f) {
    for (Symbol a : ins)
      for (Symbol b : certs)
        for (Symbol c : cells) {
          auto s = f(a, b, c);
          if (!s) continue;
          Transition tr;
          tr.from = from;
          tr.to = s->to;
          tr.read[0] = a, tr.read[1] = b, tr.read[2] = c;
          tr.write[0] = a, tr.write[1] = b, tr.write[2] = s->write;
          tr.move[0] = s->in_move, tr.move[1] = s->cert_move, tr.move[2] = s->move;
          out_.transitions.push_back(tr);
        }
  }

  // ---- layout ------------------------------------------------------------

  void emit_layout() {
    const std::size_t in = m_.tape_of_role(TapeRole::Input);
    const std::size_t cert = m_.tape_of_role(TapeRole::Certificate);
    std::vector<Symbol> every(m_.alphabet.size());
    for (std::size_t i = 0; i < every.size(); ++i) every[i] = static_cast<Symbol>(i);
    const std::uint32_t all_markers = static_cast<std::uint32_t>((std::size_t{1} << t_) - 1);

    const StateId first = add_state("layout.first");
    const StateId input = add_state("layout.input");
    const StateId back = add_state("layout.back");
    const StateId certificate = add_state("layout.cert");
    const StateId home = add_state("layout.home");
    out_.start = first;

    auto input_cell = [&](Symbol s, std::uint32_t markers) {
      Cell c;
      c.vals[in] = value_of(in, s);
      c.markers = markers;
      return encode(c);
    };
    emit_layout_state(first, every, every, {kBlank}, [&](Symbol s, Symbol, Symbol) -> std::optional<Step> {
      return Step{input, s == kBlank ? Move::Stay : Move::Right, Move::Stay, input_cell(s, all_markers), Move::Right};
    });
    emit_layout_state(input, every, every, {kBlank}, [&](Symbol s, Symbol, Symbol) -> std::optional<Step> {
      if (s == kBlank) return Step{back, Move::Stay, Move::Stay, kBlank, Move::Left};
      return Step{input, Move::Right, Move::Stay, input_cell(s, 0), Move::Right};
    });
    emit_layout_state(back, {kBlank}, every, all_cells(), [&](Symbol, Symbol, Symbol cell) -> std::optional<Step> {
      if (is_tuple(cell)) return Step{back, Move::Stay, Move::Stay, cell, Move::Left};
      return Step{certificate, Move::Stay, Move::Stay, cell, Move::Right};
    });
    emit_layout_state(certificate, {kBlank}, every, all_cells(), [&](Symbol, Symbol b, Symbol cell) -> std::optional<Step> {
      if (b == kBlank) return Step{home, Move::Stay, Move::Stay, cell, Move::Left};
      Cell c = is_tuple(cell) ? decode(cell) : Cell{};
      c.vals[cert] = value_of(cert, b);
      return Step{certificate, Move::Stay, Move::Right, encode(c), Move::Right};
    });
    emit_layout_state(home, {kBlank}, {kBlank}, all_cells(), [&](Symbol, Symbol, Symbol cell) -> std::optional<Step> {
      if (is_tuple(cell)) return Step{home, Move::Stay, Move::Stay, cell, Move::Left};
      return Step{begin_step(m_.start), Move::Stay, Move::Stay, cell,
                  m_.is_halting(m_.start) ? Move::Stay : Move::Right};
    });
  }

  // State entered on the first region cell at the start of a simulated step
  // (or the halting state itself).
  StateId begin_step(StateId q) {
    if (q == m_.accept) return out_.accept;
    if (q == m_.reject) return out_.reject;
    std::array<std::int32_t, kMaxTapes> partial;
    partial.fill(-1);
    return read_state(q, partial);
  }

  // ---- simulation phases -------------------------------------------------

  using ReadKey = std::pair<StateId, std::array<std::int32_t, kMaxTapes>>;
  using WriteKey = std::pair<std::int32_t, std::uint32_t>;          // action, pending-left
  using RightKey = std::tuple<StateId, std::uint32_t, std::uint32_t>;  // target, right-mask, pending-right

  StateId read_state(StateId q, const std::array<std::int32_t, kMaxTapes>& partial) {
    std::string name = "rd." + m_.states[q];
    for (std::size_t i = 0; i < t_; ++i)
      if (relevant_[q] >> i & 1) name += "." + (partial[i] < 0 ? std::string("*") : std::to_string(partial[i]));
    return lazy<ReadKey>(read_, {q, partial}, name, [this](StateId self, const ReadKey& k) {
      emit_sim(self, [&](Symbol cell) -> std::optional<Out> {
        const auto& [q, partial] = k;
        if (!is_tuple(cell)) {
          std::size_t v = 0;
          for (std::size_t i = 0; i < t_; ++i)
            if (relevant_[q] >> i & 1) {
              if (partial[i] < 0) return std::nullopt;  // unreachable: every marker lies inside the region
              v += static_cast<std::size_t>(partial[i]) * radix_[i];
            }
          std::int32_t a = table_[q][v];
          if (a < 0) return std::nullopt;  // the original machine is stuck
          return Out{write_state(a, 0), cell, Move::Left};
        }
        Cell c = decode(cell);
        auto next = partial;
        for (std::size_t i = 0; i < t_; ++i)
          if ((relevant_[q] >> i & 1) && (c.markers >> i & 1)) next[i] = c.vals[i];
        return Out{read_state(q, next), cell, Move::Right};
      });
    });
  }

  StateId write_state(std::int32_t action, std::uint32_t pending) {
    return lazy<WriteKey>(write_, {action, pending}, "wr." + std::to_string(action) + "." + std::to_string(pending),
                          [this](StateId self, const WriteKey& k) {
                            emit_sim(self, [&](Symbol cell) -> std::optional<Out> {
                              const auto& [ai, pending] = k;
                              const Action& a = actions_[static_cast<std::size_t>(ai)];
                              if (!is_tuple(cell)) {
                                if (pending) {
                                  Cell c;
                                  c.markers = pending;
                                  return Out{write_state(ai, 0), encode(c), Move::Left};
                                }
                                return Out{right_state(a.to, right_mask(a), 0), cell, Move::Right};
                              }
                              Cell c = decode(cell);
                              std::uint32_t next_pending = 0;
                              for (std::size_t i = 0; i < t_; ++i) {
                                if (!(c.markers >> i & 1) || (pending >> i & 1)) continue;
                                if (a.write[i] != kKeep) c.vals[i] = static_cast<std::uint16_t>(a.write[i]);
                                if (a.move[i] == Move::Left) {
                                  c.markers &= ~(1u << i);
                                  next_pending |= 1u << i;
                                }
                              }
                              c.markers |= pending;
                              return Out{write_state(ai, next_pending), encode(c), Move::Left};
                            });
                          });
  }

  std::uint32_t right_mask(const Action& a) const {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < t_; ++i)
      if (a.move[i] == Move::Right) m |= 1u << i;
    return m;
  }

  StateId right_state(StateId target, std::uint32_t mask, std::uint32_t pending) {
    return lazy<RightKey>(right_, {target, mask, pending},
                          "mv." + m_.states[target] + "." + std::to_string(mask) + "." + std::to_string(pending),
                          [this](StateId self, const RightKey& k) {
                            emit_sim(self, [&](Symbol cell) -> std::optional<Out> {
                              const auto& [target, mask, pending] = k;
                              if (!is_tuple(cell)) {
                                if (pending) {
                                  Cell c;
                                  c.markers = pending;
                                  return Out{right_state(target, mask, 0), encode(c), Move::Right};
                                }
                                if (target == m_.accept) return Out{out_.accept, cell, Move::Stay};
                                if (target == m_.reject) return Out{out_.reject, cell, Move::Stay};
                                return Out{rewind_state(target), cell, Move::Left};
                              }
                              Cell c = decode(cell);
                              std::uint32_t next_pending = 0;
                              for (std::size_t i = 0; i < t_; ++i) {
                                if (!(mask >> i & 1) || !(c.markers >> i & 1) || (pending >> i & 1)) continue;
                                c.markers &= ~(1u << i);
                                next_pending |= 1u << i;
                              }
                              c.markers |= pending;
                              return Out{right_state(target, mask, next_pending), encode(c), Move::Right};
                            });
                          });
  }

  StateId rewind_state(StateId q) {
    return lazy<StateId>(rewind_, q, "rw." + m_.states[q], [this](StateId self, const StateId& q) {
      emit_sim(self, [&](Symbol cell) -> std::optional<Out> {
        if (is_tuple(cell)) return Out{self, cell, Move::Left};
        return Out{begin_step(q), cell, Move::Right};
      });
    });
  }

  const MachineSpec& m_;
  std::size_t cap_;
  std::size_t t_;
  MachineSpec out_;
  std::vector<std::vector<Symbol>> tracks_;
  std::vector<std::size_t> radix_;
  std::size_t n_cells_ = 0;
  std::size_t base_ = 0;
  std::vector<std::array<bool, kMaxTapes>> keep_;
  std::vector<std::vector<std::int32_t>> table_;  // state -> track-value vector -> action id
  std::vector<std::uint32_t> relevant_;
  std::vector<Action> actions_;
  std::map<Action, std::int32_t> action_ids_;
  std::map<ReadKey, StateId> read_;
  std::map<WriteKey, StateId> write_;
  std::map<RightKey, StateId> right_;
  std::map<StateId, StateId> rewind_;
  std::queue<std::pair<StateId, std::function<void(StateId)>>> work_;
};

}  // namespace detail

/// Single-work-tape equivalent of `spec`.  Throws SingleTapeError when the
/// product alphabet would exceed `cap` symbols.
inline MachineSpec compile_to_single_tape(const MachineSpec& spec, std::size_t cap = kDefaultProductCap) {
  return detail::SingleTapeCompiler(spec, cap).run();
}

}  // namespace certlab

#endif  // CERTLAB_SINGLE_TAPE_HPP
