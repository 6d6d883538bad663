#ifndef CERTLAB_VERIFIER_HPP
#define CERTLAB_VERIFIER_HPP

// Verifiers, solvers, and the two enumeration constructions that turn a
// clocked verifier into a solver:
//
//   decide_by_enumeration  tries every certificate of width b(n);
//   decide_by_extension    fixes a prefix and tries every delta-bit suffix.
//
// Both are driven from the host, one clocked run per candidate.  The harness
// charges (bits + 1) steps per candidate for the binary counter increment and
// dispatch, so total_steps = sum of run steps + candidates * (bits + 1).

#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "certlab/tape_machine.hpp"

namespace certlab {

using CertWidth = std::function<std::size_t(std::size_t)>;

struct VerifierSpec {
  std::string problem;
  Simulator machine;
  CertWidth cert_width;  // b(n)
  std::string encoding;  // name of the input-tape encoding
};

/// A machine used without a certificate (b(n) = 0).
struct SolverRole {
  std::string problem;
  Simulator machine;
};

struct EnumerationOutcome {
  bool accepted = false;
  std::optional<std::string> witness;  // accepting certificate, as '0'/'1'
  std::size_t bits = 0;                // number of enumerated bits
  std::uint64_t candidates_tried = 0;
  std::uint64_t machine_steps = 0;
  std::uint64_t harness_steps = 0;

  std::uint64_t total_steps() const { return machine_steps + harness_steps; }
};

struct EnumerationOptions {
  std::size_t cap_bits = 24;
  unsigned jobs = 1;
};

class EnumerationError : public std::runtime_error {
 public:
  enum class Kind { CapExceeded, WidthMismatch, NoFuel };
  EnumerationError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Big-endian binary of `value` in exactly `width` bits.
inline std::string to_bits(std::uint64_t value, std::size_t width) {
  std::string s(width, '0');
  for (std::size_t i = 0; i < width; ++i)
    if (value >> (width - 1 - i) & 1) s[i] = '1';
  return s;
}

inline std::uint64_t from_bits(std::string_view bits) {
  std::uint64_t v = 0;
  for (char c : bits) v = v * 2 + (c == '1');
  return v;
}

namespace detail {

inline EnumerationOutcome enumerate_suffixes(const Simulator& machine, std::string_view instance,
                                             std::string_view prefix, std::size_t delta, std::uint64_t fuel,
                                             const EnumerationOptions& opt) {
  if (fuel == 0) throw EnumerationError(EnumerationError::Kind::NoFuel, "enumeration needs a positive fuel budget");
  if (delta > opt.cap_bits || delta >= 63)
    throw EnumerationError(EnumerationError::Kind::CapExceeded,
                           "enumerating " + std::to_string(delta) + " bits exceeds the cap of " +
                               std::to_string(opt.cap_bits));
  const std::vector<Symbol> input = machine.encode(instance);
  const std::vector<Symbol> head = machine.encode(prefix);
  const Symbol zero = machine.encode("0")[0], one = machine.encode("1")[0];
  const std::uint64_t total = std::uint64_t{1} << delta;

  auto candidate = [&](std::uint64_t j) {
    std::vector<Symbol> cert(head);
    cert.reserve(head.size() + delta);
    for (std::size_t i = 0; i < delta; ++i) cert.push_back(j >> (delta - 1 - i) & 1 ? one : zero);
    return cert;
  };

  EnumerationOutcome out;
  out.bits = delta;
  const unsigned jobs = std::max(1u, opt.jobs);
  // Candidates are evaluated in blocks; within a block runs may happen in
  // parallel, but results are consumed in lexicographic order so the outcome
  // never depends on scheduling.
  const std::uint64_t block = jobs == 1 ? 1 : std::uint64_t{64} * jobs;
  std::vector<RunResult> results;
  for (std::uint64_t base = 0; base < total; base += block) {
    const std::uint64_t len = std::min(block, total - base);
    results.assign(len, RunResult{});
    if (jobs == 1) {
      results[0] = machine.run(input, candidate(base), fuel);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
          for (std::uint64_t k = w; k < len; k += jobs) results[k] = machine.run(input, candidate(base + k), fuel);
        });
    }
    for (std::uint64_t k = 0; k < len; ++k) {
      ++out.candidates_tried;
      out.machine_steps += results[k].steps;
      out.harness_steps += delta + 1;
      if (results[k].accepted()) {
        out.accepted = true;
        out.witness = std::string(prefix) + to_bits(base + k, delta);
        return out;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Decides membership by running the clocked verifier on every certificate
/// of width b(n), in lexicographic order; the first accepting one wins.
inline EnumerationOutcome decide_by_enumeration(const VerifierSpec& v, std::string_view instance, std::size_t n,
                                                std::uint64_t fuel, const EnumerationOptions& opt = {}) {
  return detail::enumerate_suffixes(v.machine, instance, "", v.cert_width(n), fuel, opt);
}

/// Like decide_by_enumeration, but only the last `delta` bits vary; the
/// first b(n) - delta bits are fixed to `prefix`.
inline EnumerationOutcome decide_by_extension(const VerifierSpec& v, std::string_view instance, std::size_t n,
                                              std::string_view prefix, std::size_t delta, std::uint64_t fuel,
                                              const EnumerationOptions& opt = {}) {
  const std::size_t width = v.cert_width(n);
  if (prefix.size() + delta != width)
    throw EnumerationError(EnumerationError::Kind::WidthMismatch,
                           "prefix of " + std::to_string(prefix.size()) + " bits plus " + std::to_string(delta) +
                               " free bits does not match certificate width " + std::to_string(width));
  if (prefix.find_first_not_of("01") != std::string_view::npos)
    throw EnumerationError(EnumerationError::Kind::WidthMismatch, "prefix must be a bit string");
  return detail::enumerate_suffixes(v.machine, instance, prefix, delta, fuel, opt);
}

// ---------------------------------------------------------------------------
// Solver contract

struct IndependenceDivergence {
  std::size_t instance = 0;
  std::vector<RunStatus> statuses;  // one per trial
  std::vector<std::string> certificates;
};

struct IndependenceReport {
  std::size_t instances_checked = 0;
  std::size_t trials = 0;
  std::vector<IndependenceDivergence> divergences;

  bool ok() const { return divergences.empty(); }
};

/// Runs every instance with `trials` random certificate-tape contents and
/// reports instances whose outcome depends on the certificate.
inline IndependenceReport check_solver_certificate_independence(const SolverRole& solver,
                                                                 const std::vector<std::string>& instances,
                                                                 std::size_t trials, std::uint64_t fuel,
                                                                 std::uint64_t seed = 0x5EED) {
  if (trials < 2) throw std::invalid_argument("certificate independence needs at least two trials");
  IndependenceReport rep;
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(0, 16);
  std::bernoulli_distribution bit;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    IndependenceDivergence d;
    d.instance = i;
    for (std::size_t t = 0; t < trials; ++t) {
      std::string cert(len(rng), '0');
      for (char& c : cert) c = bit(rng) ? '1' : '0';
      auto r = solver.machine.run(instances[i], cert, fuel);
      d.statuses.push_back(r.status);
      d.certificates.push_back(std::move(cert));
    }
    ++rep.instances_checked;
    if (std::adjacent_find(d.statuses.begin(), d.statuses.end(), std::not_equal_to<>()) != d.statuses.end())
      rep.divergences.push_back(std::move(d));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trade-off bounds

/// ceil(log2(f / g)) floored at zero: the certificate bits needed to explain
/// a speedup from f to g steps.
inline std::size_t required_delta(std::uint64_t f_steps, std::uint64_t g_steps) {
  if (f_steps == 0 || g_steps == 0) throw std::invalid_argument("step counts must be positive");
  std::size_t d = 0;
  unsigned __int128 scaled = g_steps;
  while (scaled < f_steps) {
    scaled <<= 1;
    ++d;
  }
  return d;
}

struct StepSample {
  std::size_t n = 0;
  std::uint64_t steps = 0;
  std::size_t cert_bits = 0;
};

struct BoundRow {
  std::size_t n = 0;
  std::uint64_t f_steps = 0;  // solver proxy
  std::uint64_t g_steps = 0;  // verifier
  double speedup = 0;
  std::size_t delta_bits = 0;
  std::size_t required_bits = 0;
  std::int64_t slack = 0;
};

struct BoundReport {
  std::vector<BoundRow> rows;  // sorted by n
  std::vector<std::size_t> unmatched_n;
  std::int64_t tolerance_bits = 2;
  bool pass = true;  // slack >= -tolerance at every row
};

/// Lower median of a non-empty list.
inline std::uint64_t median_steps(std::vector<std::uint64_t> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline BoundReport build_bound_report(const std::vector<StepSample>& solver, const std::vector<StepSample>& verifier,
                                      std::int64_t tolerance_bits = 2) {
  std::map<std::size_t, std::vector<std::uint64_t>> f, g;
  std::map<std::size_t, std::size_t> solver_bits, verifier_bits;
  for (const auto& s : solver) {
    f[s.n].push_back(s.steps);
    solver_bits[s.n] = std::max(solver_bits[s.n], s.cert_bits);
  }
  for (const auto& s : verifier) {
    g[s.n].push_back(s.steps);
    verifier_bits[s.n] = std::max(verifier_bits[s.n], s.cert_bits);
  }
  BoundReport rep;
  rep.tolerance_bits = tolerance_bits;
  for (const auto& [n, fs] : f) {
    auto it = g.find(n);
    if (it == g.end()) {
      rep.unmatched_n.push_back(n);
      continue;
    }
    BoundRow row;
    row.n = n;
    row.f_steps = median_steps(fs);
    row.g_steps = median_steps(it->second);
    if (row.f_steps == 0 || row.g_steps == 0) throw std::invalid_argument("step counts must be positive");
    row.speedup = static_cast<double>(row.f_steps) / static_cast<double>(row.g_steps);
    row.delta_bits = verifier_bits[n] > solver_bits[n] ? verifier_bits[n] - solver_bits[n] : 0;
    row.required_bits = required_delta(row.f_steps, row.g_steps);
    row.slack = static_cast<std::int64_t>(row.delta_bits) - static_cast<std::int64_t>(row.required_bits);
    rep.pass = rep.pass && row.slack >= -tolerance_bits;
    rep.rows.push_back(row);
  }
  for (const auto& [n, gs] : g)
    if (!f.count(n)) rep.unmatched_n.push_back(n);
  std::sort(rep.unmatched_n.begin(), rep.unmatched_n.end());
  return rep;
}

}  // namespace certlab

#endif  // CERTLAB_VERIFIER_HPP
