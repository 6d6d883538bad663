#include <gtest/gtest.h>

#include <random>

#include "certlab/problems.hpp"
#include "ir_samples.hpp"

using namespace certlab;

namespace {

constexpr std::uint64_t kFuel = 50'000'000;

ir::IrVerdict as_verdict(const RunResult& r) {
  switch (r.status) {
    case RunStatus::Accepted: return ir::IrVerdict::Accepted;
    case RunStatus::Rejected: return ir::IrVerdict::Rejected;
    default: return ir::IrVerdict::Diverged;
  }
}

AssemblyError::Kind error_kind(std::string_view text) {
  try {
    assemble(ir::parse_program(text));
  } catch (const AssemblyError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "assembled without error:\n" << text;
  return AssemblyError::Kind::GotoCycle;
}

std::uint64_t steps_of(std::string_view body, std::string_view input, std::string_view cert = "") {
  std::string text = "tape in input _ a b\ntape cert certificate _ 0 1\ntape w work _ 0 1 a b\n";
  text += body;
  return Simulator(assemble(ir::parse_program(text)).machine).run(input, cert, kFuel).steps;
}

std::string random_word(std::mt19937_64& rng, std::size_t n) { return gen_random_string(n, rng()); }

// Periodic with a random proper period when n has one, otherwise random.
std::string random_periodic(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> periods;
  for (std::size_t l = 1; 2 * l <= n; ++l)
    if (n % l == 0) periods.push_back(l);
  if (periods.empty()) return random_word(rng, n);
  return gen_periodic(n, periods[rng() % periods.size()], rng());
}

std::string random_bits(std::mt19937_64& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += rng() & 1 ? '1' : '0';
  return s;
}

void expect_agreement(const ir::ProgramIR& p, const std::vector<std::pair<std::string, std::string>>& cases) {
  const Simulator m(assemble(p).machine);
  std::size_t shown = 0;
  for (const auto& [x, c] : cases) {
    const auto want = ir::interpret(p, x, c);
    ASSERT_NE(want, ir::IrVerdict::Diverged) << p.name << " on " << x << " / " << c;
    const auto got = as_verdict(m.run(x, c, kFuel));
    if (got != want && shown++ < 5) ADD_FAILURE() << p.name << " disagrees on '" << x << "' / '" << c << "'";
  }
  EXPECT_EQ(shown, 0u) << p.name;
}

}  // namespace

TEST(Assembler, GadgetStepCounts) {
  // Halting is a jump into the accept state and costs nothing.
  EXPECT_EQ(steps_of("  accept\n", "ab"), 0u);
  EXPECT_EQ(steps_of("  move in R 3\n  accept\n", "ab"), 3u);
  EXPECT_EQ(steps_of("  seek in R _\n  accept\n", "abab"), 5u);
  EXPECT_EQ(steps_of("  write w 1\n  shift in:R w:L\n  accept\n", "ab"), 2u);
  EXPECT_EQ(steps_of("  copy in w in:R w:R\n  copy in w in:R w:R\n  move w L 2\n  cmp in w reject\n  accept\n", "abab"),
            2u + 2u + 3u);
  EXPECT_EQ(steps_of("  goto x\nx:\n  goto y\ny:\n  move in R\n  accept\n", "ab"), 1u);
}

TEST(Assembler, ImmediateRejectTakesNoSteps) {
  auto art = assemble(ir::parse_program("tape in input _ a\ntape c certificate _ 1\n  reject\n"));
  auto r = Simulator(art.machine).run("a", "", 10);
  EXPECT_EQ(r.status, RunStatus::Rejected);
  EXPECT_EQ(r.steps, 0u);
}

TEST(Assembler, SourceMapCoversEveryState) {
  const auto p = periodic_verifier_program();
  const auto art = assemble(p);
  ASSERT_EQ(art.source_map.size(), art.machine.states.size());
  for (StateId s = 0; s < art.machine.states.size(); ++s) {
    if (art.machine.is_halting(s)) EXPECT_EQ(art.source_map[s], std::size_t(-1));
    else EXPECT_LT(art.source_map[s], p.code.size());
  }
}

TEST(Assembler, ReportsErrorsByKind) {
  const std::string head = "tape in input _ a b\ntape cert certificate _ 0 1\ntape w work _ 0 1 a\n";
  using K = AssemblyError::Kind;
  EXPECT_EQ(error_kind("tape in input _ a\ntape w work _ a\n  accept\n"), K::TapeLayout);
  EXPECT_EQ(error_kind(head + "  cmp in in reject\n"), K::TapeLayout);
  EXPECT_EQ(error_kind(head + "  move v R\n"), K::UnknownTape);
  EXPECT_EQ(error_kind(head + "  goto nowhere\n"), K::UnresolvedLabel);
  EXPECT_EQ(error_kind(head + "x:\nx:\n  accept\n"), K::DuplicateLabel);
  EXPECT_EQ(error_kind(head + "accept:\n  accept\n"), K::DuplicateLabel);
  EXPECT_EQ(error_kind(head + "  write in a\n"), K::ReadOnlyWrite);
  EXPECT_EQ(error_kind(head + "  write w b\n"), K::AlphabetOverflow);
  EXPECT_EQ(error_kind(head + "  copy in w\n"), K::AlphabetOverflow);  // 'b' has nowhere to go
  EXPECT_EQ(error_kind("tape in input a b\ntape cert certificate _ 0 1\n  accept\n"), K::AlphabetOverflow);
  EXPECT_EQ(error_kind("tape in input _ a b\ntape cert certificate _ 0 1\ntape k work _ a\n  inc k\n"), K::BadCounter);
  EXPECT_EQ(error_kind(head + "x:\n  goto y\ny:\n  goto x\n"), K::GotoCycle);

  std::string wide = "tape in input _";
  for (int i = 0; i < 300; ++i) wide += " s" + std::to_string(i);
  wide += "\ntape cert certificate _ 0 1\ntape w work _";
  for (int i = 0; i < 300; ++i) wide += " s" + std::to_string(i);
  EXPECT_EQ(error_kind(wide + "\n  accept\n"), K::AlphabetOverflow);
}

TEST(Assembler, ErrorsCarryTheSourceLine) {
  try {
    assemble(ir::parse_program("tape in input _ a\ntape c certificate _ 1\n\n  goto nowhere\n"));
    FAIL();
  } catch (const AssemblyError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Assembler, SamplesAgreeWithInterpreter) {
  std::mt19937_64 rng(11);
  std::vector<std::pair<std::string, std::string>> words, pairs, mods, spells;
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = rng() % 12;
    words.push_back({random_word(rng, n), ""});
    const std::string u = random_word(rng, rng() % 5);
    pairs.push_back({u + "#" + (rng() % 2 ? u : random_word(rng, rng() % 5)), ""});
    mods.push_back({std::string(rng() % 16, 'a'), std::string(rng() % 5, '1')});
    spells.push_back({random_word(rng, n), random_bits(rng, n + (rng() % 3 == 0))});
  }
  expect_agreement(ir::parse_program(samples::kCounter), words);
  expect_agreement(ir::parse_program(samples::kEqual), pairs);
  expect_agreement(ir::parse_program(samples::kMod), mods);
  expect_agreement(ir::parse_program(samples::kSpell), spells);
}

TEST(Assembler, ShippedStringProgramsAgreeWithInterpreter) {
  std::mt19937_64 rng(12);
  std::vector<std::pair<std::string, std::string>> periodic, rotation;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 16;
    const std::size_t width = rng() % 4 == 0 ? rng() % 6 : log_cert_width(n);
    std::string x = rng() % 2 ? random_word(rng, n) : random_periodic(rng, n);
    periodic.push_back({x, random_bits(rng, width)});
    const std::size_t m = rng() % 5 == 0 ? rng() % 17 : n;
    std::string b = rng() % 2 ? random_word(rng, m) : x.substr(n / 2) + x.substr(0, n / 2);
    rotation.push_back({x + "#" + b, random_bits(rng, width)});
  }
  rotation.push_back({"#", ""});
  rotation.push_back({"#", "0"});
  expect_agreement(periodic_verifier_program(), periodic);
  expect_agreement(periodic_solver_program(), periodic);
  expect_agreement(rotation_verifier_program(), rotation);
  expect_agreement(rotation_solver_program(), rotation);
}

TEST(Assembler, Sat3ProgramAgreesWithInterpreter) {
  std::mt19937_64 rng(13);
  std::vector<std::pair<std::string, std::string>> cases;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 3 + rng() % 6;
    const auto f = gen_random_3sat(n, 1 + rng() % 12, rng());
    cases.push_back({encode_formula(f), random_bits(rng, rng() % 8 == 0 ? rng() % 10 : n)});
  }
  expect_agreement(sat3_verifier_program(), cases);
}
