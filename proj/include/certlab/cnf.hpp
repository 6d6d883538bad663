#ifndef CERTLAB_CNF_HPP
#define CERTLAB_CNF_HPP

// 3-CNF formulas: DIMACS text, the input-tape encoding used by the 3-SAT
// verifier, an exhaustive counting oracle and a random generator.
//
// Tape encoding: every literal is a sign ('+' or '-') followed by the
// zero-based variable index in w = max(1, ceil(log2 n)) big-endian bits;
// every clause is three literals followed by '#'.
//
//   (x1 | !x3 | x4), n = 4   ->   +00-10+11#

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace certlab {

using Clause = std::array<int, 3>;

struct CnfFormula {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;

  double ratio() const { return num_vars ? static_cast<double>(clauses.size()) / static_cast<double>(num_vars) : 0.0; }
  bool operator==(const CnfFormula&) const = default;
};

class CnfError : public std::runtime_error {
 public:
  CnfError(std::size_t line, const std::string& msg)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Throws CnfError unless every clause has three non-zero literals over
/// distinct variables in [1, num_vars].
inline void validate_formula(const CnfFormula& f) {
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    const Clause& c = f.clauses[i];
    for (int lit : c)
      if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > f.num_vars)
        throw CnfError(0, "clause " + std::to_string(i) + ": literal " + std::to_string(lit) + " out of range");
    if (std::abs(c[0]) == std::abs(c[1]) || std::abs(c[0]) == std::abs(c[2]) || std::abs(c[1]) == std::abs(c[2]))
      throw CnfError(0, "clause " + std::to_string(i) + ": variables must be distinct");
  }
}

// ---------------------------------------------------------------------------
// DIMACS

inline CnfFormula read_dimacs(std::istream& in) {
  CnfFormula f;
  bool header = false;
  std::size_t declared = 0, lineno = 0;
  std::vector<int> pending;
  std::size_t pending_line = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == 'c') continue;
    if (tok == "%") break;  // end marker used by some benchmark sets
    if (tok == "p") {
      std::string fmt;
      long long n = -1, m = -1;
      if (header || !(ls >> fmt >> n >> m) || fmt != "cnf" || n < 0 || m < 0)
        throw CnfError(lineno, "malformed problem line");
      header = true;
      f.num_vars = static_cast<std::size_t>(n);
      declared = static_cast<std::size_t>(m);
      continue;
    }
    if (!header) throw CnfError(lineno, "clause before 'p cnf' header");
    ls.clear();
    ls.seekg(0);
    long long lit;
    while (ls >> lit) {
      if (pending.empty()) pending_line = lineno;
      if (lit != 0) {
        if (static_cast<std::size_t>(std::llabs(lit)) > f.num_vars)
          throw CnfError(lineno, "literal " + std::to_string(lit) + " exceeds variable count");
        pending.push_back(static_cast<int>(lit));
        continue;
      }
      if (pending.size() != 3) throw CnfError(pending_line, "clause must have exactly 3 literals");
      f.clauses.push_back({pending[0], pending[1], pending[2]});
      pending.clear();
    }
    if (!ls.eof()) throw CnfError(lineno, "unexpected token");
  }
  if (!header) throw CnfError(lineno, "missing 'p cnf' header");
  if (!pending.empty()) throw CnfError(pending_line, "unterminated clause");
  if (f.clauses.size() != declared)
    throw CnfError(lineno, "header declares " + std::to_string(declared) + " clauses, found " +
                               std::to_string(f.clauses.size()));
  try {
    validate_formula(f);
  } catch (const CnfError& e) {
    throw CnfError(0, e.what());
  }
  return f;
}

inline CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return read_dimacs(in);
}

inline std::string format_dimacs(const CnfFormula& f) {
  std::ostringstream os;
  os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << "\n";
  for (const Clause& c : f.clauses) os << c[0] << ' ' << c[1] << ' ' << c[2] << " 0\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Tape encoding

inline std::size_t variable_index_width(std::size_t n) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) < n) ++w;
  return std::max<std::size_t>(1, w);
}

inline std::string encode_formula(const CnfFormula& f) {
  const std::size_t w = variable_index_width(f.num_vars);
  std::string out;
  out.reserve(f.clauses.size() * (3 * (w + 1) + 1));
  for (const Clause& c : f.clauses) {
    for (int lit : c) {
      out.push_back(lit > 0 ? '+' : '-');
      const std::size_t idx = static_cast<std::size_t>(std::abs(lit)) - 1;
      for (std::size_t b = w; b-- > 0;) out.push_back(idx >> b & 1 ? '1' : '0');
    }
    out.push_back('#');
  }
  return out;
}

inline CnfFormula decode_formula(std::string_view tape, std::size_t num_vars) {
  const std::size_t w = variable_index_width(num_vars);
  const std::size_t clause_len = 3 * (w + 1) + 1;
  if (tape.size() % clause_len != 0) throw CnfError(0, "tape length is not a whole number of clauses");
  CnfFormula f;
  f.num_vars = num_vars;
  for (std::size_t at = 0; at < tape.size(); at += clause_len) {
    Clause c{};
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t p = at + k * (w + 1);
      if (tape[p] != '+' && tape[p] != '-') throw CnfError(0, "expected literal sign at offset " + std::to_string(p));
      std::size_t idx = 0;
      for (std::size_t b = 1; b <= w; ++b) {
        char bit = tape[p + b];
        if (bit != '0' && bit != '1') throw CnfError(0, "expected index bit at offset " + std::to_string(p + b));
        idx = idx * 2 + static_cast<std::size_t>(bit - '0');
      }
      c[k] = static_cast<int>(idx + 1) * (tape[p] == '+' ? 1 : -1);
    }
    if (tape[at + clause_len - 1] != '#') throw CnfError(0, "expected clause separator");
    f.clauses.push_back(c);
  }
  validate_formula(f);
  return f;
}

/// Certificate string for an assignment given as a bit mask (bit i = x_{i+1}).
inline std::string assignment_certificate(std::uint64_t mask, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t i = 0; i < n; ++i)
    if (mask >> i & 1) s[i] = '1';
  return s;
}

inline bool satisfies(const CnfFormula& f, std::uint64_t mask) {
  for (const Clause& c : f.clauses) {
    bool sat = false;
    for (int lit : c) {
      bool v = mask >> (std::abs(lit) - 1) & 1;
      sat = sat || (lit > 0 ? v : !v);
    }
    if (!sat) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Oracle

struct SatCount {
  bool satisfiable = false;
  std::uint64_t count = 0;
};

inline constexpr std::size_t kOracleMaxVars = 26;

/// Exhaustive model count.  Assignments are evaluated 64 at a time: the low
/// six variables vary inside a machine word, the rest are fixed per block.
inline SatCount sat3_oracle(const CnfFormula& f) {
  if (f.num_vars > kOracleMaxVars) throw std::invalid_argument("sat3_oracle supports at most 26 variables");
  static constexpr std::uint64_t kLow[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                            0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  const std::size_t n = f.num_vars;
  const std::uint64_t blocks = n <= 6 ? 1 : std::uint64_t{1} << (n - 6);
  const std::uint64_t valid = n >= 6 ? ~0ull : (std::uint64_t{1} << (std::uint64_t{1} << n)) - 1;
  SatCount out;
  for (std::uint64_t blk = 0; blk < blocks; ++blk) {
    std::uint64_t all = valid;
    for (const Clause& c : f.clauses) {
      std::uint64_t any = 0;
      for (int lit : c) {
        const std::size_t v = static_cast<std::size_t>(std::abs(lit)) - 1;
        std::uint64_t word = v < 6 ? kLow[v] : (blk >> (v - 6) & 1 ? ~0ull : 0ull);
        any |= lit > 0 ? word : ~word;
      }
      all &= any;
      if (!all) break;
    }
    out.count += static_cast<std::uint64_t>(std::popcount(all));
  }
  out.satisfiable = out.count > 0;
  return out;
}

// ---------------------------------------------------------------------------
// Generator

/// Each clause independently draws three distinct variables uniformly and a
/// uniform sign for each.  Whole clauses may repeat.
inline CnfFormula gen_random_3sat(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("random 3-SAT needs at least 3 variables");
  if (m < 1) throw std::invalid_argument("random 3-SAT needs at least one clause");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> var(1, static_cast<int>(n));
  std::bernoulli_distribution neg;
  CnfFormula f;
  f.num_vars = n;
  f.clauses.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Clause c{};
    for (std::size_t k = 0; k < 3; ++k) {
      int v;
      do v = var(rng);
      while ((k > 0 && std::abs(c[0]) == v) || (k > 1 && std::abs(c[1]) == v));
      c[k] = neg(rng) ? -v : v;
    }
    f.clauses.push_back(c);
  }
  return f;
}

}  // namespace certlab

#endif  // CERTLAB_CNF_HPP
