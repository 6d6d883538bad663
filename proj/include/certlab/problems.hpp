#ifndef CERTLAB_PROBLEMS_HPP
#define CERTLAB_PROBLEMS_HPP

// The case-study languages as verifier and naive-solver programs, with
// host-level oracles and instance generators.
//
//   periodic   x = p^k for some non-empty p and k >= 2; certificate |p|
//   rotation   input A#B, B = A[k:] A[:k] for some k < |A|; certificate k
//   sat3       encoded 3-CNF (see cnf.hpp); certificate is the assignment
//
// Integer certificates are big-endian and max(1, ceil(log2 n)) bits wide.

#include <variant>

#include "certlab/assembler.hpp"
#include "certlab/cnf.hpp"
#include "certlab/verifier.hpp"

namespace certlab {

inline std::size_t log_cert_width(std::size_t n) { return variable_index_width(n); }

struct Instance {
  std::string problem;
  std::variant<std::string, std::pair<std::string, std::string>, CnfFormula> payload;
  std::size_t n = 0;
  std::string tape;  // input-tape contents
};

inline Instance make_periodic_instance(std::string x) {
  Instance i{"periodic", x, x.size(), x};
  return i;
}

inline Instance make_rotation_instance(std::string a, std::string b) {
  Instance i{"rotation", std::pair{a, b}, a.size(), a + "#" + b};
  return i;
}

inline Instance make_sat3_instance(CnfFormula f) {
  validate_formula(f);
  std::string tape = encode_formula(f);
  std::size_t n = f.num_vars;
  return Instance{"sat3", std::move(f), n, std::move(tape)};
}

/// Rebuilds an instance from its problem name and input-tape text.
/// For sat3 the variable count cannot be recovered from the tape and must be
/// supplied.
inline Instance decode_instance(const std::string& problem, std::string_view tape, std::size_t num_vars = 0) {
  if (problem == "periodic") return make_periodic_instance(std::string(tape));
  if (problem == "rotation") {
    auto sep = tape.find('#');
    if (sep == std::string_view::npos || tape.find('#', sep + 1) != std::string_view::npos)
      throw std::invalid_argument("rotation instance must contain exactly one '#'");
    return make_rotation_instance(std::string(tape.substr(0, sep)), std::string(tape.substr(sep + 1)));
  }
  if (problem == "sat3") return make_sat3_instance(decode_formula(tape, num_vars));
  throw std::invalid_argument("unknown problem '" + problem + "'");
}

namespace detail {

inline std::vector<std::string> letter_symbols(std::string_view letters) {
  if (letters.empty()) throw std::invalid_argument("alphabet needs at least one letter");
  std::vector<std::string> s{"_"};
  for (char c : letters) {
    if (c == '_' || c == '#' || c == '0' || c == '1' || c == '?')
      throw std::invalid_argument(std::string("reserved symbol '") + c + "' in letters");
    s.emplace_back(1, c);
  }
  return s;
}

template <typename... T>
std::vector<std::string> concat(std::vector<std::string> a, T&&... more) {
  (a.insert(a.end(), more.begin(), more.end()), ...);
  return a;
}

inline const std::vector<std::string> kBits{"_", "0", "1"};

}  // namespace detail

// ---------------------------------------------------------------------------
// PERIODIC

/// Verifier.  The certificate is converted to a unary run on w by Horner's
/// rule, using the input head as a ruler: doubling the run walks the input
/// head back to the left end while appending, then forward again while w
/// rewinds.  The run is then overwritten with the prefix x[0..l) and cycled
/// against the whole input.  Linear in n because l < n is enforced during the
/// conversion.
inline ir::ProgramIR periodic_verifier_program(std::string_view letters = "ab") {
  using enum Move;
  auto sym = detail::letter_symbols(letters);
  ir::ProgramBuilder b("periodic-verifier");
  b.tape("in", TapeRole::Input, sym)
      .tape("cert", TapeRole::Certificate, detail::kBits)
      .tape("w", TapeRole::Work, detail::concat(sym, std::vector<std::string>{"1"}));
  b.label("bit")
      .branch("cert", {{"0", "double"}, {"1", "double"}, {"_", "converted"}})
      .label("double")
      .label("append")
      .move("in", Left)
      .branch("in", {{"_", "appended"}})
      .write("w", "1")
      .move("w", Right)
      .jump("append")
      .label("appended")
      .move("in", Right)
      .label("ruler")
      .move("w", Left)
      .branch("w", {{"_", "measured"}})
      .move("in", Right)
      .jump("ruler")
      .label("measured")
      .move("w", Right)
      .seek("w", Right, {"_"})
      .branch("cert", {{"0", "next_bit"}})
      .write("w", "1")
      .shift({{"w", Right}, {"in", Right}})
      .label("next_bit")
      .branch("in", {{"_", "reject"}})
      .move("cert", Right)
      .jump("bit")
      .label("converted")
      .move("w", Left)
      .branch("w", {{"_", "reject"}})
      .move("in", Left)
      .label("fill")
      .copy("in", "w", {{"in", Left}, {"w", Left}})
      .branch("w", {{"_", "filled"}})
      .jump("fill")
      .label("filled")
      .shift({{"in", Right}, {"w", Right}})
      .label("cycle")
      .compare("in", "w", "reject")
      .branch("in", {{"_", "end"}})
      .rewind("w")
      .jump("cycle")
      .label("end")
      .branch("w", {{"_", "accept"}})
      .reject();
  return std::move(b).build();
}

/// Naive solver: for l = 1, 2, ... while 2l <= n, a counting divisibility
/// scan of the whole input against a unary l, then (if l | n) a copy of the
/// prefix and a cyclic comparison.  Never reads the certificate tape.
inline ir::ProgramIR periodic_solver_program(std::string_view letters = "ab") {
  using enum Move;
  auto sym = detail::letter_symbols(letters);
  ir::ProgramBuilder b("periodic-naive-solver");
  b.tape("in", TapeRole::Input, sym)
      .tape("cert", TapeRole::Certificate, detail::kBits)
      .tape("l", TapeRole::Work, {"_", "1"})
      .tape("p", TapeRole::Work, sym);
  b.write("l", "1")
      .label("try")
      // 2l <= n: the l head must run off its counter twice before the input ends
      .scan("in", "l")
      .rewind("l")
      .scan("in", "l")
      .branch("l", {{"_", "bounded"}})
      .reject()
      .label("bounded")
      .rewind("l")
      .rewind("in")
      .modscan("in", "l", "next")
      .rewind("in")
      .label("prefix")
      .branch("l", {{"_", "copied"}})
      .copy("in", "p", {{"in", Right}, {"p", Right}, {"l", Right}})
      .jump("prefix")
      .label("copied")
      .rewind("l")
      .rewind("p")
      .label("cycle")
      .compare("in", "p", "next")
      .branch("in", {{"_", "accept"}})
      .rewind("p")
      .jump("cycle")
      .label("next")
      .rewind("in")
      .rewind("p")
      .seek("l", Right, {"_"})
      .write("l", "1")
      .rewind("l")
      .jump("try");
  return std::move(b).build();
}

struct OracleAnswer {
  bool member = false;
  std::optional<std::size_t> witness;  // smallest l or k
};

/// Smallest period from the KMP failure function.
inline OracleAnswer periodic_oracle(std::string_view x) {
  const std::size_t n = x.size();
  if (n < 2) return {};
  std::vector<std::size_t> fail(n + 1, 0);
  for (std::size_t i = 1, k = 0; i < n; ++i) {
    while (k > 0 && x[i] != x[k]) k = fail[k];
    if (x[i] == x[k]) ++k;
    fail[i + 1] = k;
  }
  const std::size_t p = n - fail[n];
  if (n % p == 0 && 2 * p <= n) return {true, p};
  return {};
}

/// x = p^(n/l) with |p| = l, letters drawn uniformly.  The draw is retried
/// until p itself is primitive so that l is the smallest period.
inline std::string gen_periodic(std::size_t n, std::size_t l, std::uint64_t seed, std::string_view letters = "ab") {
  if (l == 0 || n % l != 0 || 2 * l > n) throw std::invalid_argument("gen_periodic needs l | n and 1 <= l <= n/2");
  if (letters.size() < 2 && l > 1) throw std::invalid_argument("a primitive block of length > 1 needs two letters");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string p(l, letters[0]);
  do
    for (char& c : p) c = letters[pick(rng)];
  while (l > 1 && periodic_oracle(p + p).witness != l);
  std::string x;
  x.reserve(n);
  while (x.size() < n) x += p;
  return x;
}

inline std::string gen_worst_aperiodic(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gen_worst_aperiodic needs n >= 1");
  return std::string(n - 1, 'a') + "b";
}

inline std::string gen_random_string(std::size_t n, std::uint64_t seed, std::string_view letters = "ab") {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string x(n, letters[0]);
  for (char& c : x) c = letters[pick(rng)];
  return x;
}

// ---------------------------------------------------------------------------
// ROTATION

namespace detail {

// Copies A to the work tape and leaves the input head on B[0] and the copy
// head on A[0].  Rejects on a missing separator, an empty A, or |A| != |B|.
inline void rotation_prologue(ir::ProgramBuilder& b) {
  using enum Move;
  b.label("copy_a")
      .branch("in", {{"#", "copied"}, {"_", "reject"}})
      .copy("in", "a", {{"in", Right}, {"a", Right}})
      .jump("copy_a")
      .label("copied")
      .move("in", Right)
      .move("a", Left)
      .branch("a", {{"_", "reject"}})
      .seek("a", Left, {"_"})
      .move("a", Right)
      .scan("in", "a")
      .branch("in", {{"_", "b_done"}})
      .reject()
      .label("b_done")
      .branch("a", {{"_", "same_length"}})
      .reject()
      .label("same_length")
      .seek("in", Left, {"#"})
      .move("in", Right)
      .rewind("a");
}

// B against A starting at the current a head, wrapping around A once.
inline void rotation_compare(ir::ProgramBuilder& b, const std::string& on_fail) {
  b.compare("in", "a", on_fail)
      .branch("in", {{"_", "accept"}})
      .rewind("a")
      .compare("in", "a", on_fail)
      .branch("in", {{"_", "accept"}})
      .jump(on_fail);
}

}  // namespace detail

/// Verifier.  k is loaded into a binary counter parked on its low bit, and
/// the A head advances by counting k down; then B is compared against A from
/// offset k with a single wraparound.
inline ir::ProgramIR rotation_verifier_program(std::string_view letters = "ab") {
  using enum Move;
  auto sym = detail::letter_symbols(letters);
  auto with_sep = detail::concat(sym, std::vector<std::string>{"#"});
  ir::ProgramBuilder b("rotation-verifier");
  b.tape("in", TapeRole::Input, with_sep)
      .tape("cert", TapeRole::Certificate, detail::kBits)
      .tape("a", TapeRole::Work, with_sep)
      .tape("k", TapeRole::Work, detail::kBits);
  detail::rotation_prologue(b);
  b.branch("cert", {{"_", "reject"}})
      .label("load")
      .branch("cert", {{"_", "loaded"}})
      .copy("cert", "k", {{"cert", Right}, {"k", Right}})
      .jump("load")
      .label("loaded")
      .move("k", Left)
      .label("advance")
      .dec("k", "advanced")
      .move("a", Right)
      .branch("a", {{"_", "reject"}})
      .jump("advance")
      .label("advanced");
  detail::rotation_compare(b, "reject");
  return std::move(b).build();
}

/// Naive solver: k = 0, 1, ... kept in unary (the run starts at cell 1 so the
/// empty run has a blank to its left); each candidate advances the A head k
/// cells and compares, Theta(n) per k.
inline ir::ProgramIR rotation_solver_program(std::string_view letters = "ab") {
  using enum Move;
  auto sym = detail::letter_symbols(letters);
  auto with_sep = detail::concat(sym, std::vector<std::string>{"#"});
  ir::ProgramBuilder b("rotation-naive-solver");
  b.tape("in", TapeRole::Input, with_sep)
      .tape("cert", TapeRole::Certificate, detail::kBits)
      .tape("a", TapeRole::Work, with_sep)
      .tape("k", TapeRole::Work, {"_", "1"});
  detail::rotation_prologue(b);
  b.move("k", Right)
      .label("try")
      .scan("k", "a")
      .branch("a", {{"_", "reject"}})
      .label("compare");
  detail::rotation_compare(b, "next");
  b.label("next")
      .seek("in", Left, {"#"})
      .move("in", Right)
      .rewind("a")
      .write("k", "1")
      .seek("k", Left, {"_"})
      .move("k", Right)
      .jump("try");
  return std::move(b).build();
}

/// Smallest k with B = A[k:] A[:k], found as the first occurrence of B in AA.
inline OracleAnswer rotation_oracle(std::string_view a, std::string_view b) {
  if (a.size() != b.size() || a.empty()) return {};
  const std::string doubled = std::string(a) + std::string(a);
  const std::size_t k = doubled.find(b);
  if (k == std::string::npos || k >= a.size()) return {};
  return {true, k};
}

inline std::pair<std::string, std::string> gen_rotation(std::size_t n, std::size_t k, std::uint64_t seed,
                                                        std::string_view letters = "ab") {
  if (k >= n) throw std::invalid_argument("gen_rotation needs k < n");
  std::string a = gen_random_string(n, seed, letters);
  return {a, a.substr(k) + a.substr(0, k)};
}

inline std::pair<std::string, std::string> gen_worst_nonrotation(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gen_worst_nonrotation needs n >= 1");
  return {std::string(n, 'a'), std::string(n - 1, 'a') + "b"};
}

// ---------------------------------------------------------------------------
// 3-SAT

/// Verifier over the clause encoding of cnf.hpp.  The work tape f holds the
/// running conjunction in cell 0 and the current clause's disjunction in
/// cell 1.  Satisfied and unsatisfied literals take paths of equal length, so
/// the step count depends on the formula but not on the certificate.
inline ir::ProgramIR sat3_verifier_program() {
  using enum Move;
  ir::ProgramBuilder b("sat3-verifier");
  b.tape("in", TapeRole::Input, {"_", "#", "+", "-", "0", "1"})
      .tape("cert", TapeRole::Certificate, detail::kBits)
      .tape("c", TapeRole::Work, detail::kBits)
      .tape("f", TapeRole::Work, detail::kBits);
  b.write("f", "1")
      .move("f", Right)
      .label("clause")
      .branch("in", {{"_", "done"}})
      .write("f", "0");
  for (int slot = 0; slot < 3; ++slot) {
    const std::string s = "l" + std::to_string(slot);
    b.branch("in", {{"+", s + "+"}, {"-", s + "-"}}).reject();
    for (char sign : {'+', '-'}) {
      const std::string p = s + sign;
      const std::string sat = p + ".sat", unsat = p + ".unsat";
      b.label(p)
          .move("in", Right)
          .label(p + ".load")
          .branch("in", {{"0", p + ".zero"}, {"1", p + ".one"}}, p + ".loaded")
          .label(p + ".zero")
          .write("c", "0")
          .jump(p + ".shift")
          .label(p + ".one")
          .write("c", "1")
          .label(p + ".shift")
          .shift({{"in", Right}, {"c", Right}})
          .jump(p + ".load")
          .label(p + ".loaded")
          .move("c", Left)
          .label(p + ".seek")
          .dec("c", p + ".found")
          .move("cert", Right)
          .jump(p + ".seek")
          .label(p + ".found")
          .branch("cert", {{"1", sign == '+' ? sat : unsat}, {"0", sign == '+' ? unsat : sat}}, "reject")
          .label(sat)
          .write("f", "1")
          .jump(p + ".rewind")
          .label(unsat)
          .move("f", Stay)
          .label(p + ".rewind")
          .seek("cert", Left, {"_"})
          .move("cert", Right)
          .seek("c", Left, {"_"})
          .move("c", Right)
          .jump(s + ".next");
    }
    b.label(s + ".next");
  }
  b.branch("in", {{"#", "close"}})
      .reject()
      .label("close")
      .branch("f", {{"1", "kept"}})
      .move("f", Left)
      .write("f", "0")
      .move("f", Right)
      .jump("closed")
      .label("kept")
      .move("f", Left)
      .move("f", Stay)
      .move("f", Right)
      .label("closed")
      .move("in", Right)
      .jump("clause")
      .label("done")
      .move("f", Left)
      .branch("f", {{"1", "accept"}})
      .reject();
  return std::move(b).build();
}

// ---------------------------------------------------------------------------
// Specs

inline Simulator assemble_simulator(const ir::ProgramIR& p) { return Simulator(assemble(p).machine); }

inline VerifierSpec build_periodic_verifier(std::string_view letters = "ab") {
  return {"periodic", assemble_simulator(periodic_verifier_program(letters)), log_cert_width, "string"};
}

inline SolverRole build_periodic_naive_solver(std::string_view letters = "ab") {
  return {"periodic", assemble_simulator(periodic_solver_program(letters))};
}

inline VerifierSpec build_rotation_verifier(std::string_view letters = "ab") {
  return {"rotation", assemble_simulator(rotation_verifier_program(letters)), log_cert_width, "pair A#B"};
}

inline SolverRole build_rotation_naive_solver(std::string_view letters = "ab") {
  return {"rotation", assemble_simulator(rotation_solver_program(letters))};
}

inline VerifierSpec build_sat3_verifier() {
  return {"sat3", assemble_simulator(sat3_verifier_program()), [](std::size_t n) { return n; }, "cnf signed-index"};
}

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"periodic", "rotation", "sat3"};
  return names;
}

inline VerifierSpec build_verifier(const std::string& problem) {
  if (problem == "periodic") return build_periodic_verifier();
  if (problem == "rotation") return build_rotation_verifier();
  if (problem == "sat3") return build_sat3_verifier();
  throw std::invalid_argument("unknown problem '" + problem + "'");
}

inline SolverRole build_naive_solver(const std::string& problem) {
  if (problem == "periodic") return build_periodic_naive_solver();
  if (problem == "rotation") return build_rotation_naive_solver();
  throw std::invalid_argument("no naive solver for problem '" + problem + "'");
}

/// Host-level membership and smallest witness, as a certificate string.
inline std::optional<std::string> oracle_certificate(const Instance& inst) {
  if (inst.problem == "periodic") {
    auto a = periodic_oracle(std::get<std::string>(inst.payload));
    if (!a.member) return std::nullopt;
    return to_bits(*a.witness, log_cert_width(inst.n));
  }
  if (inst.problem == "rotation") {
    const auto& [x, y] = std::get<std::pair<std::string, std::string>>(inst.payload);
    auto a = rotation_oracle(x, y);
    if (!a.member) return std::nullopt;
    return to_bits(*a.witness, log_cert_width(inst.n));
  }
  const auto& f = std::get<CnfFormula>(inst.payload);
  if (f.num_vars > kOracleMaxVars) throw std::invalid_argument("formula too large for the oracle");
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f.num_vars); ++mask)
    if (satisfies(f, mask)) return assignment_certificate(mask, f.num_vars);
  return std::nullopt;
}

}  // namespace certlab

#endif  // CERTLAB_PROBLEMS_HPP
