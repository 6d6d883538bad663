#include <gtest/gtest.h>

#include "certlab/machine_text.hpp"
#include "certlab/problems.hpp"

using namespace certlab;

namespace {

const VerifierSpec& periodic() {
  static const VerifierSpec v = build_periodic_verifier();
  return v;
}

void expect_same(const EnumerationOutcome& a, const EnumerationOutcome& b) {
  EXPECT_EQ(a.accepted, b.accepted);
  EXPECT_EQ(a.witness, b.witness);
  EXPECT_EQ(a.bits, b.bits);
  EXPECT_EQ(a.candidates_tried, b.candidates_tried);
  EXPECT_EQ(a.machine_steps, b.machine_steps);
  EXPECT_EQ(a.harness_steps, b.harness_steps);
}

}  // namespace

TEST(Bits, BigEndianFixedWidth) {
  EXPECT_EQ(to_bits(2, 3), "010");
  EXPECT_EQ(to_bits(0, 0), "");
  EXPECT_EQ(to_bits(5, 2), "01");  // truncated to the low bits
  EXPECT_EQ(from_bits("110"), 6u);
  for (std::uint64_t v = 0; v < 64; ++v) EXPECT_EQ(from_bits(to_bits(v, 6)), v);
}

TEST(Enumeration, FindsTheFirstWitness) {
  auto out = decide_by_enumeration(periodic(), "abab", 4, 100000);
  EXPECT_TRUE(out.accepted);
  EXPECT_EQ(out.witness, "10");
  EXPECT_EQ(out.bits, 2u);
  EXPECT_EQ(out.candidates_tried, 3u);
  EXPECT_EQ(out.harness_steps, 3u * 3u);
  std::uint64_t sum = 0;
  for (const char* c : {"00", "01", "10"}) sum += periodic().machine.run("abab", c, 100000).steps;
  EXPECT_EQ(out.machine_steps, sum);
  EXPECT_EQ(out.total_steps(), sum + 9);
}

TEST(Enumeration, RejectsAfterEveryCandidate) {
  auto out = decide_by_enumeration(periodic(), "abaab", 5, 100000);
  EXPECT_FALSE(out.accepted);
  EXPECT_FALSE(out.witness);
  EXPECT_EQ(out.candidates_tried, 8u);
  EXPECT_EQ(out.harness_steps, 8u * 4u);
}

TEST(Enumeration, JobsDoNotChangeTheOutcome) {
  for (const char* x : {"abab", "abaab", "abababababababab", "aababaababaababaabab"}) {
    const std::size_t n = std::string_view(x).size();
    auto one = decide_by_enumeration(periodic(), x, n, 100000);
    auto four = decide_by_enumeration(periodic(), x, n, 100000, {.cap_bits = 24, .jobs = 4});
    expect_same(one, four);
  }
}

TEST(Enumeration, ExtensionFixesThePrefix) {
  auto out = decide_by_extension(periodic(), "abab", 4, "1", 1, 100000);
  EXPECT_TRUE(out.accepted);
  EXPECT_EQ(out.witness, "10");
  EXPECT_EQ(out.candidates_tried, 1u);
  EXPECT_EQ(out.harness_steps, 2u);
  EXPECT_FALSE(decide_by_extension(periodic(), "abab", 4, "0", 1, 100000).accepted);
  auto full = decide_by_extension(periodic(), "abab", 4, "10", 0, 100000);
  EXPECT_EQ(full.candidates_tried, 1u);
  EXPECT_EQ(full.harness_steps, 1u);
}

TEST(Enumeration, Errors) {
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const EnumerationError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return EnumerationError::Kind::NoFuel;
  };
  using K = EnumerationError::Kind;
  EXPECT_EQ(kind([] { decide_by_extension(periodic(), "abab", 4, "1", 2, 100); }), K::WidthMismatch);
  EXPECT_EQ(kind([] { decide_by_extension(periodic(), "abab", 4, "x", 1, 100); }), K::WidthMismatch);
  EXPECT_EQ(kind([] { decide_by_enumeration(periodic(), "abab", 4, 0); }), K::NoFuel);
  EXPECT_EQ(kind([] { decide_by_enumeration(periodic(), "abab", 4, 100, {.cap_bits = 1}); }), K::CapExceeded);
}

TEST(Solver, NaiveSolversIgnoreTheCertificate) {
  std::vector<std::string> inputs;
  for (std::size_t n = 1; n <= 24; ++n) {
    inputs.push_back(gen_random_string(n, n));
    inputs.push_back(gen_worst_aperiodic(n));
  }
  auto rep = check_solver_certificate_independence(build_periodic_naive_solver(), inputs, 4, 1'000'000);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.instances_checked, inputs.size());

  std::vector<std::string> pairs;
  for (std::size_t n = 1; n <= 12; ++n) {
    auto [a, b] = gen_rotation(n, n / 3, n);
    pairs.push_back(a + "#" + b);
  }
  EXPECT_TRUE(check_solver_certificate_independence(build_rotation_naive_solver(), pairs, 4, 1'000'000).ok());
}

TEST(Solver, CertificateReadersAreCaught) {
  // Accepts exactly when the certificate starts with 1.
  const SolverRole cheat{"periodic", Simulator(parse_machine(R"(name: cheat
tapes: input:ro certificate:ro
alphabet: _ a b 0 1
start: s
accept: yes
reject: no
s a,1 -> yes a,1 S,S
s a,0 -> no a,0 S,S
s a,_ -> no a,_ S,S
)"))};
  auto rep = check_solver_certificate_independence(cheat, {"ab", "ba"}, 16, 100);
  EXPECT_FALSE(rep.ok());
  ASSERT_EQ(rep.divergences.size(), 1u);
  EXPECT_EQ(rep.divergences[0].instance, 0u);
  EXPECT_EQ(rep.divergences[0].statuses.size(), 16u);
  EXPECT_THROW(check_solver_certificate_independence(cheat, {"ab"}, 1, 100), std::invalid_argument);
}

TEST(Bound, RequiredDelta) {
  EXPECT_EQ(required_delta(8, 1), 3u);
  EXPECT_EQ(required_delta(9, 1), 4u);
  EXPECT_EQ(required_delta(5, 5), 0u);
  EXPECT_EQ(required_delta(1, 8), 0u);
  EXPECT_EQ(required_delta(std::uint64_t{1} << 63, 1), 63u);
  EXPECT_EQ(required_delta(~std::uint64_t{0}, 1), 64u);
  EXPECT_THROW(required_delta(0, 1), std::invalid_argument);
}

TEST(Bound, LowerMedian) {
  EXPECT_EQ(median_steps({4, 1, 3, 2}), 2u);
  EXPECT_EQ(median_steps({7}), 7u);
  EXPECT_EQ(median_steps({5, 1, 9}), 5u);
  EXPECT_THROW(median_steps({}), std::invalid_argument);
}

TEST(Bound, ReportRows) {
  std::vector<StepSample> f{{16, 1000, 0}, {16, 1200, 0}, {16, 900, 0}, {32, 4000, 0}, {64, 9, 0}};
  std::vector<StepSample> g{{16, 100, 4}, {32, 125, 5}, {8, 10, 3}};
  auto rep = build_bound_report(f, g);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].f_steps, 1000u);
  EXPECT_EQ(rep.rows[0].required_bits, 4u);  // 1000/100 -> 10x
  EXPECT_EQ(rep.rows[0].delta_bits, 4u);
  EXPECT_EQ(rep.rows[0].slack, 0);
  EXPECT_EQ(rep.rows[1].required_bits, 5u);  // 32x
  EXPECT_DOUBLE_EQ(rep.rows[1].speedup, 32.0);
  EXPECT_EQ(rep.unmatched_n, (std::vector<std::size_t>{8, 64}));
  EXPECT_TRUE(rep.pass);

  g[1].cert_bits = 2;
  EXPECT_EQ(build_bound_report(f, g).rows[1].slack, -3);
  EXPECT_FALSE(build_bound_report(f, g).pass);
  EXPECT_TRUE(build_bound_report(f, g, 3).pass);
}
