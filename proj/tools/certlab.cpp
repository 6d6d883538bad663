// certlab: command-line front end.
//
// Exit codes: 0 success or passing check, 1 failed check, 2 usage, input or
// encoding error.

#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "certlab/bench.hpp"
#include "certlab/range.hpp"

namespace {

using namespace certlab;

constexpr int kCheckFailed = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MachineSpec load_any_machine(const std::string& path) {
  const std::string text = slurp(path);
  if (std::filesystem::path(path).extension() == ".tmir") return assemble(ir::parse_program(text)).machine;
  return parse_machine(text);
}

std::vector<std::size_t> sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto v : parse_range(text)) out.push_back(static_cast<std::size_t>(v));
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
}

std::string show_tape(const MachineSpec& spec, const TapeSnapshot& t) {
  std::string s;
  const std::int64_t lo = std::min(t.first_cell, t.head);
  const std::int64_t hi = std::max(t.first_cell + static_cast<std::int64_t>(t.cells.size()) - 1, t.head);
  for (std::int64_t i = lo; i <= hi; ++i) {
    const std::string& sym = spec.alphabet[t.at(i)];
    s += i == t.head ? "[" + sym + "]" : sym;
  }
  return s;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string machine, input, cert;
  std::uint64_t fuel = 0;
  std::size_t trace = 0;
};

int cmd_run(const RunArgs& a) {
  Simulator sim(load_any_machine(a.machine));
  if (a.trace) {
    for (const auto& c : sim.trace(a.input, a.cert, a.fuel, a.trace)) {
      std::cout << c.steps << '\t' << sim.spec().states[c.state];
      for (const auto& t : c.tapes) std::cout << '\t' << show_tape(sim.spec(), t);
      std::cout << '\n';
    }
  }
  const RunResult r = sim.run(a.input, a.cert, a.fuel);
  std::cout << verdict_name(r.status) << "\nsteps: " << r.steps << "\nfinal state: " << sim.spec().states[r.final_state]
            << '\n';
  return 0;
}

struct SolveArgs {
  std::string problem, n = "8", role = "enum", input, cnf;
  std::uint64_t seed = 1;
  std::uint64_t fuel = 0;
  unsigned jobs = 1;
};

// Input letters plus a and b, so the string machines accept any user text.
std::string letters_of(const Instance& inst) {
  std::set<char> seen{'a', 'b'};
  for (char c : inst.tape)
    if (c != '#') seen.insert(c);
  return {seen.begin(), seen.end()};
}

VerifierSpec verifier_for(const Instance& inst) {
  if (inst.problem == "periodic") return build_periodic_verifier(letters_of(inst));
  if (inst.problem == "rotation") return build_rotation_verifier(letters_of(inst));
  return build_verifier(inst.problem);
}

SolverRole solver_for(const Instance& inst) {
  if (inst.problem == "periodic") return build_periodic_naive_solver(letters_of(inst));
  if (inst.problem == "rotation") return build_rotation_naive_solver(letters_of(inst));
  return build_naive_solver(inst.problem);
}

int cmd_solve(const SolveArgs& a) {
  if (a.role != "enum" && a.role != "naive") throw UsageError("--role must be naive or enum");
  std::vector<PreparedInstance> todo;
  if (!a.cnf.empty()) {
    std::istringstream in(slurp(a.cnf));
    todo.push_back({make_sat3_instance(read_dimacs(in)), ""});
  } else if (!a.input.empty()) {
    todo.push_back({decode_instance(a.problem, a.input), ""});
  } else {
    for (std::size_t n : sizes(a.n))
      todo.push_back(a.role == "enum" ? member_instance(a.problem, n, a.seed) : nonmember_instance(a.problem, n, 0, a.seed));
  }
  std::cout << "# problem " << a.problem << ", role " << a.role << ", seed " << a.seed << '\n';
  std::cout << "n\tverdict\tsteps\tcandidates\twitness\n";
  for (const auto& p : todo) {
    const Instance& inst = p.instance;
    if (a.role == "naive") {
      const SolverRole s = solver_for(inst);
      const std::uint64_t fuel = a.fuel ? a.fuel : FuelPolicy::for_role(Role::NaiveSolver).budget(inst.tape.size());
      const RunResult r = s.machine.run(inst.tape, "", fuel);
      std::cout << inst.n << '\t' << verdict_name(r.status) << '\t' << r.steps << "\t-\t-\n";
    } else {
      const VerifierSpec v = verifier_for(inst);
      const std::uint64_t fuel = a.fuel ? a.fuel : FuelPolicy::for_role(Role::Verifier).budget(inst.tape.size());
      const EnumerationOutcome e = decide_by_enumeration(v, inst.tape, inst.n, fuel, {24, a.jobs});
      std::cout << inst.n << '\t' << (e.accepted ? "accepted" : "rejected") << '\t' << e.total_steps() << '\t'
                << e.candidates_tried << '\t' << e.witness.value_or("-") << '\n';
    }
  }
  return 0;
}

struct BenchArgs {
  std::string problem, n, roles = "verifier,naive-solver", seeds = "1..5", csv, json, growth;
  std::uint64_t multiplier = 0;
  unsigned jobs = 1;
};

int cmd_bench(const BenchArgs& a) {
  SweepPlan plan;
  plan.problem = a.problem;
  plan.n_values = sizes(a.n);
  for (auto s : parse_range(a.seeds)) plan.seeds.push_back(s);
  std::stringstream rs(a.roles);
  for (std::string r; std::getline(rs, r, ',');) plan.roles.push_back(parse_role(r));
  plan.jobs = a.jobs;
  if (!a.growth.empty() || a.multiplier) {
    FuelPolicy f;
    if (a.growth == "linear") f.growth = FuelPolicy::Growth::Linear;
    else if (a.growth == "quadratic") f.growth = FuelPolicy::Growth::Quadratic;
    else if (a.growth.empty() || a.growth == "nlogn") f.growth = FuelPolicy::Growth::NLogN;
    else throw UsageError("--fuel-growth must be linear, nlogn or quadratic");
    if (a.multiplier) f.multiplier = a.multiplier;
    plan.fuel = f;
  }
  const auto records = run_sweep(plan);
  if (!a.csv.empty()) export_records(records, a.csv, ExportFormat::Csv);
  if (!a.json.empty()) export_records(records, a.json, ExportFormat::Json);

  std::cout << "# problem " << a.problem << ", seeds " << a.seeds << ", " << records.size() << " records\n";
  std::size_t flagged = 0;
  for (const auto& r : records) flagged += r.verdict == "fuel-exhausted" || r.verdict == "stuck";
  if (flagged) std::cout << "# " << flagged << " records did not halt within fuel\n";
  const auto dr = doubling_ratios(records);
  std::cout << "series\tn\t2n\tmedian(n)\tmedian(2n)\tratio\n";
  for (const auto& [key, list] : dr.by_role)
    for (const auto& d : list)
      std::cout << key << '\t' << d.n_from << '\t' << d.n_to << '\t' << d.steps_from << '\t' << d.steps_to << '\t'
                << fmt(d.ratio) << '\n';
  for (const auto& note : dr.notes) std::cout << "# " << note << '\n';
  return 0;
}

struct BoundArgs {
  std::string solver_csv, verifier_csv;
  std::int64_t tolerance = 2;
};

int cmd_check_bound(const BoundArgs& a) {
  std::map<std::string, std::pair<std::vector<ExperimentRecord>, std::vector<ExperimentRecord>>> by_problem;
  for (auto& r : import_records(a.solver_csv))
    if (r.role == "naive-solver" || r.role == "enum-solver") by_problem[r.problem].first.push_back(r);
  for (auto& r : import_records(a.verifier_csv))
    if (r.role == "verifier") by_problem[r.problem].second.push_back(r);
  bool pass = !by_problem.empty();
  std::cout << "problem\tn\tsolver\tverifier\tspeedup\tb(n)\trequired\tslack\n";
  for (const auto& [problem, rs] : by_problem) {
    const auto rep = tradeoff_consistency(rs.first, rs.second, a.tolerance);
    for (const auto& row : rep.bound.rows)
      std::cout << problem << '\t' << row.n << '\t' << row.f_steps << '\t' << row.g_steps << '\t' << fmt(row.speedup, 2)
                << '\t' << row.delta_bits << '\t' << row.required_bits << '\t' << row.slack << '\n';
    for (const auto& note : rep.notes) std::cout << "# " << problem << ": " << note << '\n';
    pass = pass && rep.bound.pass && !rep.bound.rows.empty();
  }
  std::cout << "slack >= -" << a.tolerance << ": " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : kCheckFailed;
}

int cmd_fig1(std::uint64_t f0, std::size_t max_delta, const std::string& csv) {
  std::ostringstream os;
  os << "delta,g\n";
  for (const auto& row : fig1_table(f0, max_delta)) os << row.delta << ',' << row.g << '\n';
  std::cout << os.str();
  if (!csv.empty()) write_file(csv, os.str());
  return 0;
}

struct BlowupArgs {
  std::string cnf, missing = "0..10", csv;
  std::size_t n = 16, m = 68;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

int cmd_blowup(const BlowupArgs& a) {
  CnfFormula f;
  if (!a.cnf.empty()) {
    std::istringstream in(slurp(a.cnf));
    f = read_dimacs(in);
  } else {
    f = find_unsat_formula(a.n, a.m, a.seed);
  }
  const auto range = parse_range(a.missing);
  const auto rows = partial_cert_blowup(f, range.front(), range.back(), std::nullopt, {24, a.jobs});
  std::ostringstream os;
  os << "missing,candidates,machine_steps,harness_steps,total_steps,candidate_ratio,step_ratio\n";
  for (const auto& r : rows)
    os << r.missing << ',' << r.candidates << ',' << r.machine_steps << ',' << r.harness_steps << ',' << r.total_steps
       << ',' << fmt(r.candidate_ratio) << ',' << fmt(r.step_ratio) << '\n';
  std::cout << "# formula n=" << f.num_vars << " m=" << f.clauses.size() << ", prefix all zeros\n" << os.str();
  if (!a.csv.empty()) write_file(a.csv, os.str());
  return 0;
}

struct EntropyArgs {
  std::string n = "12..20:2", csv;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

int cmd_entropy(const EntropyArgs& a) {
  const auto res = entropy_experiment(sizes(a.n), a.samples, a.seed, a.jobs);
  std::ostringstream os;
  os << "n,m,samples,mean_count,log2_mean,expected_mean\n";
  for (const auto& r : res.records)
    os << r.n << ',' << r.m << ',' << r.samples << ',' << fmt(r.mean, 6) << ',' << fmt(r.log2_mean, 6) << ','
       << fmt(r.expected, 6) << '\n';
  std::cout << "# seed " << a.seed << "\n" << os.str() << "slope: " << fmt(res.slope) << '\n';
  for (const auto& w : res.warnings) std::cout << "# " << w << '\n';
  if (!a.csv.empty()) write_file(a.csv, os.str());
  return 0;
}

int cmd_compile(const std::string& machine, const std::string& out, std::size_t cap) {
  const MachineSpec single = compile_to_single_tape(load_any_machine(machine), cap);
  write_file(out, format_machine(single));
  std::cout << "states: " << single.states.size() << "\nrules: " << single.transitions.size()
            << "\nalphabet: " << single.alphabet.size() << '\n';
  return 0;
}

int cmd_export(const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<ir::ProgramIR> programs{periodic_verifier_program(), periodic_solver_program(),
                                            rotation_verifier_program(), rotation_solver_program(),
                                            sat3_verifier_program()};
  for (const auto& p : programs) {
    const auto base = std::filesystem::path(dir) / p.name;
    write_file(base.string() + ".tmir", ir::format_program(p));
    write_file(base.string() + ".tm", format_machine(assemble(p).machine));
    std::cout << base.string() << ".{tmir,tm}\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certlab: certificate/verification-time trade-off laboratory"};
  app.require_subcommand(1);

  RunArgs run;
  auto* s_run = app.add_subcommand("run", "Run a .tm or .tmir machine on one input");
  s_run->add_option("--machine", run.machine, "Machine file")->required();
  s_run->add_option("--input", run.input, "Input tape text");
  s_run->add_option("--cert", run.cert, "Certificate tape text");
  s_run->add_option("--fuel", run.fuel, "Step budget")->required();
  s_run->add_option("--trace", run.trace, "Print up to this many configurations");

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "Decide generated or given instances without a certificate");
  s_solve->add_option("--problem", solve.problem, "periodic, rotation or sat3")->required();
  s_solve->add_option("--n", solve.n, "Size range, e.g. 4..12:2");
  s_solve->add_option("--role", solve.role, "naive or enum");
  s_solve->add_option("--input", solve.input, "Explicit instance (A#B for rotation)");
  s_solve->add_option("--cnf", solve.cnf, "DIMACS file (sat3)");
  s_solve->add_option("--seed", solve.seed, "Generator seed");
  s_solve->add_option("--fuel", solve.fuel, "Per-run fuel (default: role policy)");
  s_solve->add_option("--jobs", solve.jobs, "Worker threads");

  BenchArgs bench;
  auto* s_bench = app.add_subcommand("bench", "Step-count sweep over n");
  s_bench->add_option("--problem", bench.problem, "periodic, rotation or sat3")->required();
  s_bench->add_option("--n", bench.n, "Size range, e.g. 256..4096:x2")->required();
  s_bench->add_option("--roles", bench.roles, "Comma-separated roles");
  s_bench->add_option("--seeds", bench.seeds, "Seed range, one instance per seed");
  s_bench->add_option("--csv", bench.csv, "CSV output path");
  s_bench->add_option("--json", bench.json, "JSON output path");
  s_bench->add_option("--fuel-growth", bench.growth, "linear, nlogn or quadratic");
  s_bench->add_option("--fuel-multiplier", bench.multiplier, "Fuel multiplier");
  s_bench->add_option("--jobs", bench.jobs, "Worker threads");

  BoundArgs bound;
  auto* s_bound = app.add_subcommand("check-bound", "Certificate-bit bound from solver and verifier sweeps");
  s_bound->add_option("--solver-csv", bound.solver_csv, "Sweep with naive-solver records")->required();
  s_bound->add_option("--verifier-csv", bound.verifier_csv, "Sweep with verifier records")->required();
  s_bound->add_option("--tolerance-bits", bound.tolerance, "Allowed negative slack");

  std::uint64_t f0 = 1024;
  std::size_t max_delta = 10;
  std::string fig1_csv;
  auto* s_fig1 = app.add_subcommand("fig1", "Halving table g = f0 / 2^delta");
  s_fig1->add_option("--f0", f0, "Solver steps");
  s_fig1->add_option("--max-delta", max_delta, "Largest delta");
  s_fig1->add_option("--csv", fig1_csv, "CSV output path");

  BlowupArgs blowup;
  auto* s_blowup = app.add_subcommand("blowup", "Work growth as certificate bits are withheld");
  s_blowup->add_option("--cnf", blowup.cnf, "Unsatisfiable DIMACS formula");
  s_blowup->add_option("--n", blowup.n, "Variables when generating a formula");
  s_blowup->add_option("--m", blowup.m, "Clauses when generating a formula");
  s_blowup->add_option("--seed", blowup.seed, "First generator seed to try");
  s_blowup->add_option("--missing", blowup.missing, "Range of withheld bits");
  s_blowup->add_option("--csv", blowup.csv, "CSV output path");
  s_blowup->add_option("--jobs", blowup.jobs, "Worker threads");

  EntropyArgs entropy;
  auto* s_entropy = app.add_subcommand("entropy", "Mean model count of random 3-SAT at m = 4.26 n");
  s_entropy->add_option("--n", entropy.n, "Size range");
  s_entropy->add_option("--samples", entropy.samples, "Formulas per n");
  s_entropy->add_option("--seed", entropy.seed, "Seed");
  s_entropy->add_option("--csv", entropy.csv, "CSV output path");
  s_entropy->add_option("--jobs", entropy.jobs, "Worker threads");

  std::string c_machine, c_out;
  std::size_t cap = kDefaultProductCap;
  auto* s_compile = app.add_subcommand("compile-1tape", "Compile to a single work tape");
  s_compile->add_option("--machine", c_machine, "Machine file")->required();
  s_compile->add_option("--out", c_out, "Output .tm path")->required();
  s_compile->add_option("--cap", cap, "Product alphabet cap");

  std::string export_dir = "machines";
  auto* s_export = app.add_subcommand("export-machines", "Write the shipped programs as .tmir and .tm");
  s_export->add_option("--dir", export_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*s_run) return cmd_run(run);
    if (*s_solve) return cmd_solve(solve);
    if (*s_bench) return cmd_bench(bench);
    if (*s_bound) return cmd_check_bound(bound);
    if (*s_fig1) return cmd_fig1(f0, max_delta, fig1_csv);
    if (*s_blowup) return cmd_blowup(blowup);
    if (*s_entropy) return cmd_entropy(entropy);
    if (*s_compile) return cmd_compile(c_machine, c_out, cap);
    if (*s_export) return cmd_export(export_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
