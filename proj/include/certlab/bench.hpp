#ifndef CERTLAB_BENCH_HPP
#define CERTLAB_BENCH_HPP

// Experiment harness: step-count sweeps over instance sizes, doubling ratios,
// the halving table, certificate-bound reports, the partial-certificate
// blowup on an unsatisfiable formula, and the model-count entropy fit.
//
// Every record is a pure function of (problem, role, n, seed), so sweeps can
// run on several threads and still export byte-identical files.

#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>

#include "certlab/problems.hpp"
#include "certlab/single_tape.hpp"
#include "json.hpp"

namespace certlab {

enum class Role { Verifier, NaiveSolver, EnumSolver, SingleTapeVerifier };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Verifier: return "verifier";
    case Role::NaiveSolver: return "naive-solver";
    case Role::EnumSolver: return "enum-solver";
    case Role::SingleTapeVerifier: return "single-tape-verifier";
  }
  return "?";
}

inline Role parse_role(std::string_view s) {
  for (Role r : {Role::Verifier, Role::NaiveSolver, Role::EnumSolver, Role::SingleTapeVerifier})
    if (s == to_string(r)) return r;
  throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

/// Fuel as a function of the input-tape length L.
struct FuelPolicy {
  enum class Growth { Linear, NLogN, Quadratic };
  Growth growth = Growth::NLogN;
  std::uint64_t multiplier = 64;
  std::uint64_t floor = 4096;

  std::uint64_t budget(std::size_t tape_length) const {
    const std::uint64_t L = std::max<std::uint64_t>(1, tape_length);
    std::uint64_t scale = L;
    if (growth == Growth::NLogN) scale = L * log_cert_width(L);
    else if (growth == Growth::Quadratic) scale = L * L;
    return multiplier * scale + floor;
  }

  static FuelPolicy for_role(Role r) {
    switch (r) {
      case Role::NaiveSolver: return {Growth::Quadratic, 16, 4096};
      case Role::SingleTapeVerifier: return {Growth::Quadratic, 256, 4096};
      default: return {Growth::NLogN, 64, 4096};
    }
  }
};

struct SweepPlan {
  std::string problem;
  std::vector<Role> roles;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds;  // one instance per seed
  std::optional<FuelPolicy> fuel;    // overrides the per-role defaults
  unsigned jobs = 1;
};

struct ExperimentRecord {
  std::string problem;
  std::string role;
  std::size_t n = 0;
  std::size_t cert_bits = 0;
  std::size_t instance_id = 0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::string verdict;
  std::uint64_t fuel = 0;

  bool operator==(const ExperimentRecord&) const = default;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Runs fn(0) .. fn(count - 1) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t count, unsigned jobs, F&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(jobs, count); ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_lock);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t closest_divisor(std::size_t n, double target) {
  std::size_t best = 1;
  for (std::size_t d = 1; 2 * d <= n; ++d)
    if (n % d == 0 && std::abs(static_cast<double>(d) - target) < std::abs(static_cast<double>(best) - target))
      best = d;
  return best;
}

}  // namespace detail

struct PreparedInstance {
  Instance instance;
  std::string certificate;  // witness for members, empty otherwise
};

/// A member instance with its smallest witness.  The period (or rotation
/// offset) is a fixed fraction of n chosen by the seed alone, so instance i
/// has the same shape at every n.
inline PreparedInstance member_instance(const std::string& problem, std::size_t n, std::uint64_t seed) {
  const std::uint64_t shape = detail::mix_seed(seed, 0);
  const std::uint64_t content = detail::mix_seed(seed, n);
  Instance inst;
  if (problem == "periodic") {
    if (n < 2) throw std::invalid_argument("no periodic strings of length < 2");
    const double target = static_cast<double>(n) / static_cast<double>(std::uint64_t{2} << (shape % 4));
    inst = make_periodic_instance(gen_periodic(n, detail::closest_divisor(n, target), content));
  } else if (problem == "rotation") {
    if (n < 1) throw std::invalid_argument("no rotation pairs of length 0");
    const std::size_t k = static_cast<std::size_t>(static_cast<double>(n) * static_cast<double>(shape % 1000) / 1000.0);
    auto [a, b] = gen_rotation(n, std::min(k, n - 1), content);
    inst = make_rotation_instance(a, b);
  } else if (problem == "sat3") {
    const auto m = static_cast<std::size_t>(std::lround(4.26 * static_cast<double>(n)));
    for (std::uint64_t attempt = 0;; ++attempt) {
      CnfFormula f = gen_random_3sat(n, m, detail::mix_seed(content, attempt));
      if (sat3_oracle(f).satisfiable) {
        inst = make_sat3_instance(std::move(f));
        break;
      }
    }
  } else {
    throw std::invalid_argument("unknown problem '" + problem + "'");
  }
  auto cert = oracle_certificate(inst);
  if (!cert) throw std::logic_error("generated member instance has no witness");
  return {std::move(inst), std::move(*cert)};
}

/// Instance 0 is the adversarial non-member; the others are seeded random
/// non-members.
inline PreparedInstance nonmember_instance(const std::string& problem, std::size_t n, std::size_t instance_id,
                                           std::uint64_t seed) {
  if (problem == "periodic") {
    if (instance_id == 0) return {make_periodic_instance(gen_worst_aperiodic(n)), ""};
    for (std::uint64_t attempt = 0;; ++attempt) {
      std::string x = gen_random_string(n, detail::mix_seed(detail::mix_seed(seed, n), attempt));
      if (!periodic_oracle(x).member) return {make_periodic_instance(std::move(x)), ""};
    }
  }
  if (problem == "rotation") {
    if (instance_id == 0) {
      auto [a, b] = gen_worst_nonrotation(n);
      return {make_rotation_instance(a, b), ""};
    }
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t s = detail::mix_seed(detail::mix_seed(seed, n), attempt);
      std::string a = gen_random_string(n, s), b = gen_random_string(n, detail::mix_seed(s, 1));
      if (!rotation_oracle(a, b).member) return {make_rotation_instance(std::move(a), std::move(b)), ""};
    }
  }
  throw std::invalid_argument("no non-member generator for problem '" + problem + "'");
}

inline std::string verdict_name(RunStatus s) {
  switch (s) {
    case RunStatus::Accepted: return "accepted";
    case RunStatus::Rejected: return "rejected";
    case RunStatus::FuelExhausted: return "fuel-exhausted";
    case RunStatus::Stuck: return "stuck";
  }
  return "?";
}

inline std::vector<ExperimentRecord> run_sweep(const SweepPlan& plan) {
  if (!std::is_sorted(plan.n_values.begin(), plan.n_values.end()))
    throw std::invalid_argument("sweep n-values must be sorted ascending");
  if (plan.fuel && plan.fuel->multiplier == 0) throw std::invalid_argument("fuel multiplier must be positive");

  // Machines are built once and shared read-only by the workers.
  std::map<Role, Simulator> machines;
  std::optional<VerifierSpec> verifier;
  for (Role r : plan.roles) {
    if (machines.count(r)) continue;
    switch (r) {
      case Role::Verifier:
      case Role::EnumSolver:
        if (!verifier) verifier = build_verifier(plan.problem);
        machines.emplace(r, verifier->machine);
        break;
      case Role::NaiveSolver: machines.emplace(r, build_naive_solver(plan.problem).machine); break;
      case Role::SingleTapeVerifier: {
        if (!verifier) verifier = build_verifier(plan.problem);
        machines.emplace(r, Simulator(compile_to_single_tape(verifier->machine.spec())));
        break;
      }
    }
  }

  struct Task {
    Role role;
    std::size_t n, id;
  };
  std::vector<Task> tasks;
  for (Role r : plan.roles)
    for (std::size_t n : plan.n_values)
      for (std::size_t id = 0; id < plan.seeds.size(); ++id) tasks.push_back({r, n, id});

  std::vector<ExperimentRecord> out(tasks.size());
  detail::parallel_for(tasks.size(), plan.jobs, [&](std::size_t t) {
    const auto [role, n, id] = tasks[t];
    const std::uint64_t seed = plan.seeds[id];
    const Simulator& m = machines.at(role);
    const FuelPolicy policy = plan.fuel.value_or(FuelPolicy::for_role(role));
    ExperimentRecord rec;
    rec.problem = plan.problem;
    rec.role = to_string(role);
    rec.n = n;
    rec.instance_id = id;
    rec.seed = seed;
    if (role == Role::NaiveSolver) {
      auto inst = nonmember_instance(plan.problem, n, id, seed);
      rec.fuel = policy.budget(inst.instance.tape.size());
      auto r = m.run(inst.instance.tape, "", rec.fuel);
      rec.steps = r.steps;
      rec.verdict = verdict_name(r.status);
    } else {
      auto inst = member_instance(plan.problem, n, seed);
      rec.fuel = policy.budget(inst.instance.tape.size());
      if (role == Role::EnumSolver) {
        VerifierSpec v{plan.problem, m, verifier->cert_width, verifier->encoding};
        auto e = decide_by_enumeration(v, inst.instance.tape, n, rec.fuel);
        rec.steps = e.total_steps();
        rec.verdict = e.accepted ? "accepted" : "rejected";
      } else {
        rec.cert_bits = verifier->cert_width(n);
        auto r = m.run(inst.instance.tape, inst.certificate, rec.fuel);
        rec.steps = r.steps;
        rec.verdict = verdict_name(r.status);
      }
    }
    out[t] = std::move(rec);
  });
  std::sort(out.begin(), out.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.problem, a.role, a.n, a.instance_id) < std::tie(b.problem, b.role, b.n, b.instance_id);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Doubling ratios

struct DoublingRatio {
  std::size_t n_from = 0, n_to = 0;
  std::uint64_t steps_from = 0, steps_to = 0;  // medians
  double ratio = 0;
};

struct DoublingReport {
  std::map<std::string, std::vector<DoublingRatio>> by_role;  // key "problem/role"
  std::vector<std::string> notes;
};

inline DoublingReport doubling_ratios(const std::vector<ExperimentRecord>& records) {
  std::map<std::string, std::map<std::size_t, std::vector<std::uint64_t>>> steps;
  for (const auto& r : records) steps[r.problem + "/" + r.role][r.n].push_back(r.steps);
  DoublingReport rep;
  for (const auto& [key, by_n] : steps) {
    auto& list = rep.by_role[key];
    for (auto it = by_n.begin(); it != by_n.end(); ++it) {
      auto nx = std::next(it);
      if (nx == by_n.end()) break;
      if (nx->first != 2 * it->first) {
        rep.notes.push_back(key + ": no doubling pair for n=" + std::to_string(it->first));
        continue;
      }
      DoublingRatio d{it->first, nx->first, median_steps(it->second), median_steps(nx->second), 0};
      if (d.steps_from == 0) {
        rep.notes.push_back(key + ": zero steps at n=" + std::to_string(it->first));
        continue;
      }
      d.ratio = static_cast<double>(d.steps_to) / static_cast<double>(d.steps_from);
      list.push_back(d);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Halving table

struct Fig1Row {
  std::size_t delta = 0;
  std::uint64_t g = 0;
};

/// g = f0 / 2^delta (integer division) for delta = 0 .. max_delta.
inline std::vector<Fig1Row> fig1_table(std::uint64_t f0, std::size_t max_delta) {
  if (f0 < 1) throw std::invalid_argument("f0 must be at least 1");
  if (max_delta > 63) throw std::invalid_argument("max delta must be at most 63");
  std::vector<Fig1Row> rows;
  for (std::size_t d = 0; d <= max_delta; ++d) rows.push_back({d, f0 >> d});
  return rows;
}

// ---------------------------------------------------------------------------
// Certificate bound

struct ConsistencyReport {
  BoundReport bound;
  std::vector<std::string> notes;
};

inline ConsistencyReport tradeoff_consistency(const std::vector<ExperimentRecord>& solver,
                                              const std::vector<ExperimentRecord>& verifier,
                                              std::int64_t tolerance_bits = 2) {
  ConsistencyReport rep;
  auto samples = [&](const std::vector<ExperimentRecord>& rs) {
    std::vector<StepSample> out;
    for (const auto& r : rs) {
      if (r.verdict != "accepted" && r.verdict != "rejected") {
        rep.notes.push_back("skipped " + r.role + " n=" + std::to_string(r.n) + " instance " +
                            std::to_string(r.instance_id) + ": " + r.verdict);
        continue;
      }
      out.push_back({r.n, r.steps, r.cert_bits});
    }
    return out;
  };
  rep.bound = build_bound_report(samples(solver), samples(verifier), tolerance_bits);
  for (std::size_t n : rep.bound.unmatched_n) rep.notes.push_back("unmatched n=" + std::to_string(n));
  return rep;
}

// ---------------------------------------------------------------------------
// Partial-certificate blowup

struct BlowupRow {
  std::size_t missing = 0;
  std::uint64_t candidates = 0;
  std::uint64_t machine_steps = 0;
  std::uint64_t harness_steps = 0;
  std::uint64_t total_steps = 0;
  double candidate_ratio = 0;  // versus the previous row, 0 on the first
  double step_ratio = 0;
};

/// First seed at or after `seed` whose random (n, m) formula is
/// unsatisfiable.
inline CnfFormula find_unsat_formula(std::size_t n, std::size_t m, std::uint64_t seed = 1,
                                     std::uint64_t max_tries = 100000) {
  for (std::uint64_t s = seed; s < seed + max_tries; ++s) {
    CnfFormula f = gen_random_3sat(n, m, s);
    if (!sat3_oracle(f).satisfiable) return f;
  }
  throw std::runtime_error("no unsatisfiable formula found");
}

inline std::vector<BlowupRow> partial_cert_blowup(const CnfFormula& f, std::size_t lo, std::size_t hi,
                                                  std::optional<std::uint64_t> fuel = std::nullopt,
                                                  const EnumerationOptions& opt = {}) {
  if (lo > hi || hi > f.num_vars) throw std::invalid_argument("missing-bit range must satisfy lo <= hi <= n");
  if (sat3_oracle(f).satisfiable)
    throw std::invalid_argument(
        "formula is satisfiable; the blowup experiment needs an unsatisfiable formula so that every candidate "
        "suffix is tried (see find_unsat_formula)");
  const VerifierSpec v = build_sat3_verifier();
  const Instance inst = make_sat3_instance(f);
  const std::uint64_t budget = fuel.value_or(FuelPolicy::for_role(Role::Verifier).budget(inst.tape.size()));
  std::vector<BlowupRow> rows;
  for (std::size_t m = lo; m <= hi; ++m) {
    const std::string prefix(f.num_vars - m, '0');
    auto e = decide_by_extension(v, inst.tape, f.num_vars, prefix, m, budget, opt);
    BlowupRow row{m, e.candidates_tried, e.machine_steps, e.harness_steps, e.total_steps(), 0, 0};
    if (!rows.empty()) {
      row.candidate_ratio = static_cast<double>(row.candidates) / static_cast<double>(rows.back().candidates);
      row.step_ratio = static_cast<double>(row.machine_steps) / static_cast<double>(rows.back().machine_steps);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Entropy

struct EntropyRecord {
  std::size_t n = 0, m = 0, samples = 0;
  std::vector<std::uint64_t> counts;
  double mean = 0;
  double log2_mean = 0;
  double expected = 0;  // 2^n (7/8)^m
};

struct EntropyResult {
  std::vector<EntropyRecord> records;
  double slope = 0, intercept = 0;
  std::vector<std::string> warnings;
};

inline double expected_model_count(std::size_t n, std::size_t m) {
  return std::ldexp(std::pow(7.0 / 8.0, static_cast<double>(m)), static_cast<int>(n));
}

inline EntropyResult entropy_experiment(const std::vector<std::size_t>& n_values, std::size_t samples,
                                        std::uint64_t seed, unsigned jobs = 1) {
  if (samples == 0) throw std::invalid_argument("entropy experiment needs at least one sample");
  for (std::size_t n : n_values)
    if (n < 3 || n > kOracleMaxVars) throw std::invalid_argument("entropy experiment needs 3 <= n <= 26");
  EntropyResult res;
  for (std::size_t n : n_values) {
    EntropyRecord rec;
    rec.n = n;
    rec.m = static_cast<std::size_t>(std::lround(4.26 * static_cast<double>(n)));
    rec.samples = samples;
    rec.counts.resize(samples);
    detail::parallel_for(samples, jobs, [&](std::size_t i) {
      rec.counts[i] = sat3_oracle(gen_random_3sat(n, rec.m, detail::mix_seed(detail::mix_seed(seed, n), i))).count;
    });
    long double sum = 0;
    for (auto c : rec.counts) sum += c;
    rec.mean = static_cast<double>(sum / samples);
    rec.log2_mean = rec.mean > 0 ? std::log2(rec.mean) : -std::numeric_limits<double>::infinity();
    rec.expected = expected_model_count(n, rec.m);
    res.records.push_back(std::move(rec));
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : res.records) {
    if (r.mean > 0) pts.emplace_back(static_cast<double>(r.n), r.log2_mean);
    else res.warnings.push_back("all counts zero at n=" + std::to_string(r.n) + "; excluded from the fit");
  }
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) mx += x, my += y;
    mx /= static_cast<double>(pts.size()), my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
    res.slope = sxy / sxx;
    res.intercept = my - res.slope * mx;
  } else {
    res.warnings.push_back("fewer than two usable sizes; slope undefined");
    res.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Export

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{"problem", "role",  "n",       "cert_bits", "instance_id",
                                             "seed",    "steps", "verdict", "fuel"};
  return cols;
}

inline std::string format_csv(const std::vector<ExperimentRecord>& rs) {
  std::ostringstream os;
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : rs)
    os << r.problem << ',' << r.role << ',' << r.n << ',' << r.cert_bits << ',' << r.instance_id << ',' << r.seed
       << ',' << r.steps << ',' << r.verdict << ',' << r.fuel << "\n";
  return os.str();
}

inline std::vector<ExperimentRecord> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<ExperimentRecord> out;
  std::size_t lineno = 0;
  auto num = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != record_columns().size())
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(record_columns().size()) + " columns");
    if (lineno == 1 && f == record_columns()) continue;
    ExperimentRecord r;
    r.problem = f[0];
    r.role = f[1];
    r.n = num(f[2]);
    r.cert_bits = num(f[3]);
    r.instance_id = num(f[4]);
    r.seed = num(f[5]);
    r.steps = num(f[6]);
    r.verdict = f[7];
    r.fuel = num(f[8]);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ExperimentRecord& r) {
  return {{"problem", r.problem}, {"role", r.role},   {"n", r.n},
          {"cert_bits", r.cert_bits}, {"instance_id", r.instance_id}, {"seed", r.seed},
          {"steps", r.steps},     {"verdict", r.verdict}, {"fuel", r.fuel}};
}

inline std::string format_json(const std::vector<ExperimentRecord>& rs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rs) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

inline std::vector<ExperimentRecord> parse_json(std::string_view text) {
  auto arr = nlohmann::json::parse(text);
  std::vector<ExperimentRecord> out;
  for (const auto& o : arr) {
    ExperimentRecord r;
    r.problem = o.at("problem").get<std::string>();
    r.role = o.at("role").get<std::string>();
    r.n = o.at("n").get<std::size_t>();
    r.cert_bits = o.at("cert_bits").get<std::size_t>();
    r.instance_id = o.at("instance_id").get<std::size_t>();
    r.seed = o.at("seed").get<std::uint64_t>();
    r.steps = o.at("steps").get<std::uint64_t>();
    r.verdict = o.at("verdict").get<std::string>();
    r.fuel = o.at("fuel").get<std::uint64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

enum class ExportFormat { Csv, Json };

inline void export_records(const std::vector<ExperimentRecord>& rs, const std::string& path, ExportFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (fmt == ExportFormat::Csv ? format_csv(rs) : format_json(rs));
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::vector<ExperimentRecord> import_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') return parse_json(text);
  return parse_csv(text);
}

}  // namespace certlab

#endif  // CERTLAB_BENCH_HPP
