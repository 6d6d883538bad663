#include <gtest/gtest.h>

#include <random>

#include "certlab/machine_text.hpp"
#include "certlab/problems.hpp"

using namespace certlab;

namespace {

// Copies the input onto the work tape, then walks back left past cell 0.
constexpr const char* kCopier = R"(name: copier
tapes: input:ro certificate:ro work
alphabet: _ a b
start: copy
accept: yes
reject: no
copy a,_,_ -> copy a,_,a R,S,R
copy b,_,_ -> copy b,_,b R,S,R
copy _,_,_ -> back _,_,_ S,S,L
back _,_,a -> back _,_,a S,S,L
back _,_,b -> back _,_,b S,S,L
back _,_,_ -> left _,_,_ S,S,L
left _,_,_ -> yes _,_,b S,S,S
)";

MachineSpec copier() { return parse_machine(kCopier); }

}  // namespace

TEST(Validate, ShippedVerifierIsWellFormed) {
  EXPECT_TRUE(validate_machine(build_periodic_verifier().machine.spec()).empty());
}

TEST(Validate, DuplicateKeyIsNondeterministic) {
  MachineSpec m = copier();
  m.transitions.push_back(m.transitions[0]);
  m.transitions.back().to = m.reject;
  auto v = validate_machine(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::Nondeterministic);
  EXPECT_EQ(v[0].rule.value(), m.transitions.size() - 1);
  EXPECT_EQ(v[0].message.rfind("Nondeterministic(copy, [a,_,_])", 0), 0u) << v[0].message;
}

TEST(Validate, CertificateOverwriteIsFlaggedExactlyOnce) {
  MachineSpec m = build_periodic_verifier().machine.spec();
  const Symbol zero = *m.find_symbol("0"), one = *m.find_symbol("1");
  const std::size_t cert = m.tape_of_role(TapeRole::Certificate);
  auto it = std::find_if(m.transitions.begin(), m.transitions.end(),
                         [&](const Transition& t) { return t.read[cert] == zero; });
  ASSERT_NE(it, m.transitions.end());
  it->write[cert] = one;
  auto v = validate_machine(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::ReadOnlyWrite);
  EXPECT_EQ(v[0].rule.value(), static_cast<std::size_t>(it - m.transitions.begin()));
}

TEST(Validate, OtherViolations) {
  MachineSpec m = copier();
  m.transitions.push_back(m.transitions[0]);
  m.transitions.back().from = m.accept;
  EXPECT_EQ(validate_machine(m).at(0).kind, ViolationKind::HaltingStateHasRule);

  m = copier();
  m.transitions[0].write[2] = 17;
  EXPECT_EQ(validate_machine(m).at(0).kind, ViolationKind::SymbolNotInAlphabet);

  m = copier();
  m.tapes = {TapeRole::Input, TapeRole::Input, TapeRole::Work};
  EXPECT_EQ(validate_machine(m).at(0).kind, ViolationKind::TapeLayout);

  m = copier();
  m.transitions[0].to = 99;
  EXPECT_EQ(validate_machine(m).at(0).kind, ViolationKind::UnknownState);

  m = copier();
  m.alphabet.clear();
  m.transitions.clear();
  EXPECT_EQ(validate_machine(m).at(0).kind, ViolationKind::EmptyAlphabet);
}

TEST(Simulator, RefusesInvalidMachines) {
  MachineSpec m = copier();
  m.transitions.push_back(m.transitions[0]);
  EXPECT_THROW(Simulator{m}, InvalidMachine);
}

TEST(Run, PeriodicVerifierAcceptsAbabWithPeriodTwo) {
  auto r = build_periodic_verifier().machine.run("abab", "10", 100000);
  EXPECT_EQ(r.status, RunStatus::Accepted);
  EXPECT_GT(r.steps, 0u);
}

TEST(Run, RotationVerifierAcceptsTheWorkedPair) {
  auto v = build_rotation_verifier("abcde");
  EXPECT_EQ(v.cert_width(5), 3u);
  EXPECT_TRUE(v.machine.run("abcde#cdeab", "010", 100000).accepted());
  EXPECT_FALSE(v.machine.run("abcde#cdeab", "001", 100000).accepted());
}

TEST(Run, ZeroFuel) {
  auto r = Simulator(copier()).run("ab", "", 0);
  EXPECT_EQ(r.status, RunStatus::FuelExhausted);
  EXPECT_EQ(r.steps, 0u);
}

TEST(Run, EncodingErrorBeforeAnyStep) {
  Simulator s(copier());
  EXPECT_THROW(s.run("abc", "", 100), EncodingError);
  EXPECT_THROW(s.run("ab", "0", 100), EncodingError);
}

TEST(Run, StuckIsDistinctFromRejection) {
  MachineSpec m = copier();
  m.transitions.pop_back();
  auto r = Simulator(m).run("ab", "", 100);
  EXPECT_EQ(r.status, RunStatus::Stuck);
  EXPECT_EQ(m.states[r.final_state], "left");
}

TEST(Run, StepsAndExcursions) {
  auto r = Simulator(copier()).run("abba", "", 100);
  ASSERT_EQ(r.status, RunStatus::Accepted);
  // 4 copies, 1 turn, 4 walks back, 1 step past cell 0, 1 final write.
  EXPECT_EQ(r.steps, 11u);
  EXPECT_EQ(r.excursions[2].min_cell, -2);
  EXPECT_EQ(r.excursions[2].max_cell, 4);
  EXPECT_EQ(r.excursions[0].max_cell, 4);
}

TEST(Trace, LimitOneIsTheStartConfiguration) {
  Simulator s(copier());
  auto t = s.trace("ab", "", 100, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].state, s.spec().start);
  EXPECT_EQ(t[0].steps, 0u);
  EXPECT_EQ(t[0].tapes[0].head, 0);
}

TEST(Trace, LengthIsStepsPlusOne) {
  const auto v = build_periodic_verifier();
  auto r = v.machine.run("aa", "1", 100000);
  auto t = v.machine.trace("aa", "1", 100000, 1'000'000);
  ASSERT_EQ(r.status, RunStatus::Accepted);
  EXPECT_EQ(t.size(), r.steps + 1);
  EXPECT_EQ(t.back().state, r.final_state);
}

TEST(Trace, NegativeCellsAreRecorded) {
  auto t = Simulator(copier()).trace("ab", "", 100, 100);
  const TapeSnapshot& work = t.back().tapes[2];
  EXPECT_EQ(work.head, -2);
  EXPECT_EQ(work.at(-2), 2);  // 'b'
  EXPECT_EQ(work.at(-1), kBlank);
  EXPECT_EQ(work.at(0), 1);  // 'a'
}

// ---------------------------------------------------------------------------
// Properties over random PERIODIC and ROTATION runs

namespace {

struct Case {
  std::string input, cert;
};

std::vector<Case> random_cases(std::uint64_t seed, std::size_t count, bool rotation) {
  std::mt19937_64 rng(seed);
  std::vector<Case> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 1 + rng() % 24;
    std::string x = gen_random_string(n, rng());
    if (rotation) x += "#" + gen_random_string(n, rng());
    out.push_back({x, to_bits(rng() % n, log_cert_width(n))});
  }
  return out;
}

}  // namespace

TEST(Properties, Determinism) {
  const auto v = build_periodic_verifier();
  for (const auto& c : random_cases(1, 100, false)) {
    auto a = v.machine.run(c.input, c.cert, 100000), b = v.machine.run(c.input, c.cert, 100000);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_EQ(a.final_state, b.final_state);
  }
}

TEST(Properties, MonotoneFuelAndNoFalseAccepts) {
  const auto v = build_rotation_verifier();
  for (const auto& c : random_cases(2, 100, true)) {
    auto full = v.machine.run(c.input, c.cert, 1'000'000);
    ASSERT_TRUE(full.status == RunStatus::Accepted || full.status == RunStatus::Rejected);
    for (std::uint64_t f : {full.steps, full.steps + 1, full.steps * 2}) {
      auto r = v.machine.run(c.input, c.cert, f);
      EXPECT_EQ(r.status, full.status);
      EXPECT_EQ(r.steps, full.steps);
    }
    if (full.steps > 0) {
      auto r = v.machine.run(c.input, c.cert, full.steps - 1);
      EXPECT_EQ(r.status, RunStatus::FuelExhausted);
      EXPECT_EQ(r.steps, full.steps - 1);
    }
  }
}

TEST(Properties, ReadOnlyTapesNeverChange) {
  const auto v = build_periodic_verifier();
  const auto& spec = v.machine.spec();
  for (const auto& c : random_cases(3, 40, false)) {
    auto in = v.machine.encode(c.input), cert = v.machine.encode(c.cert);
    for (const auto& conf : v.machine.trace(in, cert, 100000, 100000)) {
      for (std::size_t k = 0; k < spec.tape_count(); ++k) {
        if (!is_read_only(spec.tapes[k])) continue;
        const auto& orig = spec.tapes[k] == TapeRole::Input ? in : cert;
        const TapeSnapshot& t = conf.tapes[k];
        for (std::int64_t i = t.first_cell; i < t.first_cell + static_cast<std::int64_t>(t.cells.size()); ++i) {
          Symbol expect = i >= 0 && i < static_cast<std::int64_t>(orig.size()) ? orig[static_cast<std::size_t>(i)] : kBlank;
          ASSERT_EQ(t.at(i), expect);
        }
      }
    }
  }
}

TEST(Properties, StepCountEqualsTraceLengthMinusOne) {
  const auto v = build_rotation_verifier();
  for (const auto& c : random_cases(4, 60, true)) {
    auto r = v.machine.run(c.input, c.cert, 100000);
    EXPECT_EQ(v.machine.trace(c.input, c.cert, 100000, 1'000'000).size(), r.steps + 1);
  }
}
