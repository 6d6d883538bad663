#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "certlab/bench.hpp"
#include "certlab/range.hpp"

using namespace certlab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepPlan golden_plan(const std::string& problem, unsigned jobs) {
  return {problem, {Role::Verifier, Role::NaiveSolver, Role::EnumSolver}, {8, 16, 32}, {1, 2, 3}, std::nullopt, jobs};
}

ExperimentRecord rec(std::string role, std::size_t n, std::uint64_t steps, std::string verdict = "accepted") {
  ExperimentRecord r;
  r.problem = "periodic";
  r.role = std::move(role);
  r.n = n;
  r.steps = steps;
  r.verdict = std::move(verdict);
  return r;
}

}  // namespace

TEST(Range, Forms) {
  EXPECT_EQ(parse_range("16"), (std::vector<std::uint64_t>{16}));
  EXPECT_EQ(parse_range("0..3"), (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(parse_range("12..20:2"), (std::vector<std::uint64_t>{12, 14, 16, 18, 20}));
  EXPECT_EQ(parse_range("12..19:2"), (std::vector<std::uint64_t>{12, 14, 16, 18}));
  EXPECT_EQ(parse_range("256..4096:x2"), (std::vector<std::uint64_t>{256, 512, 1024, 2048, 4096}));
  EXPECT_EQ(parse_range("5..5"), (std::vector<std::uint64_t>{5}));
}

TEST(Range, Errors) {
  for (const char* bad : {"", "x", "9..3", "1..", "..4", "1..4:", "1..4:0", "1..4:x1", "0..4:x2", "1..4:y2", "-1..3",
                          "1...3", "1..3 "})
    EXPECT_THROW(parse_range(bad), RangeError) << bad;
}

TEST(Roles, NamesRoundTrip) {
  for (Role r : {Role::Verifier, Role::NaiveSolver, Role::EnumSolver, Role::SingleTapeVerifier})
    EXPECT_EQ(parse_role(to_string(r)), r);
  EXPECT_THROW(parse_role("oracle"), std::invalid_argument);
}

TEST(Fuel, BudgetsGrowWithTapeLength) {
  EXPECT_EQ(FuelPolicy::for_role(Role::Verifier).budget(16), 64u * 16 * 4 + 4096);
  EXPECT_EQ(FuelPolicy::for_role(Role::NaiveSolver).budget(100), 16u * 100 * 100 + 4096);
  EXPECT_EQ(FuelPolicy::for_role(Role::SingleTapeVerifier).budget(10), 256u * 100 + 4096);
  EXPECT_EQ((FuelPolicy{FuelPolicy::Growth::Linear, 3, 1}).budget(10), 31u);
  EXPECT_EQ(FuelPolicy{}.budget(0), FuelPolicy{}.budget(1));
}

TEST(Instances, MembersCarryAcceptedWitnesses) {
  for (const std::string problem : {"periodic", "rotation"}) {
    const auto v = build_verifier(problem);
    for (std::size_t n : {2, 7, 16, 50, 128})
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto p = member_instance(problem, n, seed);
        EXPECT_EQ(p.instance.n, n);
        EXPECT_EQ(p.certificate.size(), v.cert_width(n));
        EXPECT_TRUE(v.machine.run(p.instance.tape, p.certificate, 1'000'000).accepted()) << problem << n;
      }
  }
  auto s = member_instance("sat3", 10, 4);
  EXPECT_TRUE(sat3_oracle(std::get<CnfFormula>(s.instance.payload)).satisfiable);
  EXPECT_EQ(std::get<CnfFormula>(s.instance.payload).clauses.size(), 43u);
  EXPECT_THROW(member_instance("periodic", 1, 1), std::invalid_argument);
}

TEST(Instances, MemberShapeIsFixedPerSeed) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto l = [&](std::size_t n) { return *periodic_oracle(member_instance("periodic", n, seed).instance.tape).witness; };
    EXPECT_EQ(2 * l(64), l(128)) << seed;
    EXPECT_EQ(2 * l(128), l(256)) << seed;
  }
}

TEST(Instances, NonMembers) {
  EXPECT_EQ(nonmember_instance("periodic", 6, 0, 9).instance.tape, "aaaaab");
  EXPECT_EQ(nonmember_instance("rotation", 3, 0, 9).instance.tape, "aaa#aab");
  for (std::size_t id = 1; id < 6; ++id) {
    auto p = nonmember_instance("periodic", 24, id, id);
    EXPECT_FALSE(oracle_certificate(p.instance));
    EXPECT_EQ(p.instance.tape, nonmember_instance("periodic", 24, id, id).instance.tape);
    EXPECT_FALSE(oracle_certificate(nonmember_instance("rotation", 24, id, id).instance));
  }
  EXPECT_THROW(nonmember_instance("sat3", 8, 0, 1), std::invalid_argument);
}

TEST(Sweep, RecordsAreSortedAndComplete) {
  auto rs = run_sweep(golden_plan("periodic", 1));
  ASSERT_EQ(rs.size(), 27u);
  EXPECT_TRUE(std::is_sorted(rs.begin(), rs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.problem, a.role, a.n, a.instance_id) < std::tie(b.problem, b.role, b.n, b.instance_id);
  }));
  for (const auto& r : rs) {
    EXPECT_EQ(r.verdict, r.role == "naive-solver" ? "rejected" : "accepted") << r.role;
    EXPECT_EQ(r.cert_bits, r.role == "verifier" ? log_cert_width(r.n) : 0u);
    EXPECT_LE(r.steps, r.fuel);
    EXPECT_EQ(r.seed, r.instance_id + 1);
  }
}

TEST(Sweep, GoldenFilesAreReproducedByteForByte) {
  for (const std::string problem : {"periodic", "rotation"}) {
    const std::string golden = read_file(std::string(CERTLAB_TEST_DATA) + "/golden_" + problem + ".csv");
    ASSERT_FALSE(golden.empty());
    EXPECT_EQ(format_csv(run_sweep(golden_plan(problem, 1))), golden) << problem;
    EXPECT_EQ(format_csv(run_sweep(golden_plan(problem, 3))), golden) << problem;
  }
}

TEST(Sweep, RejectsBadPlans) {
  auto plan = golden_plan("periodic", 1);
  plan.n_values = {16, 8};
  EXPECT_THROW(run_sweep(plan), std::invalid_argument);
  plan = golden_plan("periodic", 1);
  plan.fuel = FuelPolicy{FuelPolicy::Growth::Linear, 0, 10};
  EXPECT_THROW(run_sweep(plan), std::invalid_argument);
  plan = golden_plan("sat3", 2);  // no naive solver
  EXPECT_THROW(run_sweep(plan), std::invalid_argument);
}

TEST(Sweep, TinyFuelIsReportedNotHidden) {
  auto plan = golden_plan("periodic", 1);
  plan.roles = {Role::Verifier};
  plan.fuel = FuelPolicy{FuelPolicy::Growth::Linear, 1, 0};
  for (const auto& r : run_sweep(plan)) EXPECT_EQ(r.verdict, "fuel-exhausted");
}

TEST(Doubling, RatiosOfMedians) {
  std::vector<ExperimentRecord> rs{rec("verifier", 8, 10), rec("verifier", 8, 30), rec("verifier", 8, 20),
                                   rec("verifier", 16, 40), rec("verifier", 64, 100), rec("naive-solver", 8, 5),
                                   rec("naive-solver", 16, 20)};
  auto rep = doubling_ratios(rs);
  ASSERT_EQ(rep.by_role.at("periodic/verifier").size(), 1u);
  EXPECT_DOUBLE_EQ(rep.by_role.at("periodic/verifier")[0].ratio, 2.0);
  EXPECT_DOUBLE_EQ(rep.by_role.at("periodic/naive-solver")[0].ratio, 4.0);
  ASSERT_EQ(rep.notes.size(), 1u);
  EXPECT_NE(rep.notes[0].find("n=16"), std::string::npos);
}

TEST(Fig1, HalvingTable) {
  auto rows = fig1_table(1024, 10);
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t d = 0; d <= 10; ++d) {
    EXPECT_EQ(rows[d].delta, d);
    EXPECT_EQ(rows[d].g, 1024u >> d);
  }
  EXPECT_EQ(fig1_table(1000, 3).back().g, 125u);
  EXPECT_EQ(fig1_table(5, 4).back().g, 0u);
  EXPECT_THROW(fig1_table(0, 3), std::invalid_argument);
  EXPECT_THROW(fig1_table(1, 64), std::invalid_argument);
}

TEST(Consistency, SkipsUnfinishedRuns) {
  std::vector<ExperimentRecord> f{rec("naive-solver", 16, 1600, "rejected"), rec("naive-solver", 16, 99, "fuel-exhausted")};
  auto g = rec("verifier", 16, 100);
  g.cert_bits = 4;
  auto rep = tradeoff_consistency(f, {g});
  ASSERT_EQ(rep.bound.rows.size(), 1u);
  EXPECT_EQ(rep.bound.rows[0].f_steps, 1600u);
  EXPECT_EQ(rep.bound.rows[0].slack, 0);
  ASSERT_EQ(rep.notes.size(), 1u);
  EXPECT_NE(rep.notes[0].find("fuel-exhausted"), std::string::npos);
}

TEST(Blowup, CandidatesAndStepsDouble) {
  const auto f = find_unsat_formula(10, 60);
  EXPECT_FALSE(sat3_oracle(f).satisfiable);
  auto rows = partial_cert_blowup(f, 0, 6);
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t m = 0; m < rows.size(); ++m) {
    EXPECT_EQ(rows[m].missing, m);
    EXPECT_EQ(rows[m].candidates, std::uint64_t{1} << m);
    EXPECT_EQ(rows[m].harness_steps, (m + 1) << m);
    EXPECT_EQ(rows[m].total_steps, rows[m].machine_steps + rows[m].harness_steps);
    if (m) {
      EXPECT_DOUBLE_EQ(rows[m].candidate_ratio, 2.0);
      EXPECT_DOUBLE_EQ(rows[m].step_ratio, 2.0);
    }
  }
  auto par = partial_cert_blowup(f, 0, 6, std::nullopt, {.cap_bits = 24, .jobs = 3});
  for (std::size_t m = 0; m < rows.size(); ++m) EXPECT_EQ(par[m].total_steps, rows[m].total_steps);
}

TEST(Blowup, Preconditions) {
  CnfFormula sat{3, {{1, 2, 3}}};
  EXPECT_THROW(partial_cert_blowup(sat, 0, 2), std::invalid_argument);
  const auto f = find_unsat_formula(8, 60);
  EXPECT_THROW(partial_cert_blowup(f, 3, 2), std::invalid_argument);
  EXPECT_THROW(partial_cert_blowup(f, 0, 9), std::invalid_argument);
  EXPECT_THROW(find_unsat_formula(20, 1, 1, 5), std::runtime_error);
}

TEST(Entropy, FitAndDeterminism) {
  EXPECT_DOUBLE_EQ(expected_model_count(8, 0), 256.0);
  EXPECT_DOUBLE_EQ(expected_model_count(3, 1), 7.0);
  auto a = entropy_experiment({6, 8, 10}, 40, 3);
  auto b = entropy_experiment({6, 8, 10}, 40, 3, 4);
  ASSERT_EQ(a.records.size(), 3u);
  EXPECT_EQ(a.records[1].m, 34u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.records[i].counts, b.records[i].counts);
  EXPECT_DOUBLE_EQ(a.slope, b.slope);
  EXPECT_TRUE(std::isfinite(a.slope));

  // Least squares on three exact points.
  double mx = 8, my = 0;
  for (const auto& r : a.records) my += r.log2_mean / 3;
  double sxy = 0, sxx = 0;
  for (const auto& r : a.records) sxy += (r.n - mx) * (r.log2_mean - my), sxx += (r.n - mx) * (r.n - mx);
  EXPECT_NEAR(a.slope, sxy / sxx, 1e-12);
  EXPECT_NEAR(a.intercept, my - a.slope * mx, 1e-12);

  EXPECT_THROW(entropy_experiment({2}, 5, 1), std::invalid_argument);
  EXPECT_THROW(entropy_experiment({8}, 0, 1), std::invalid_argument);
  EXPECT_FALSE(entropy_experiment({8}, 5, 1).warnings.empty());
}

TEST(Export, CsvAndJsonRoundTrip) {
  auto rs = run_sweep(golden_plan("rotation", 1));
  EXPECT_EQ(parse_csv(format_csv(rs)), rs);
  EXPECT_EQ(parse_json(format_json(rs)), rs);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv = (dir / "certlab_rt.csv").string(), json = (dir / "certlab_rt.json").string();
  export_records(rs, csv, ExportFormat::Csv);
  export_records(rs, json, ExportFormat::Json);
  EXPECT_EQ(import_records(csv), rs);
  EXPECT_EQ(import_records(json), rs);
  std::filesystem::remove(csv);
  std::filesystem::remove(json);
}

TEST(Export, CsvErrors) {
  EXPECT_THROW(parse_csv("periodic,verifier,8\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("periodic,verifier,x,0,0,1,5,accepted,10\n"), std::runtime_error);
  EXPECT_EQ(parse_csv("problem,role,n,cert_bits,instance_id,seed,steps,verdict,fuel\r\n").size(), 0u);
  EXPECT_THROW(import_records("/nonexistent/records.csv"), std::runtime_error);
}
