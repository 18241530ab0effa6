#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spindec/pulseq.hpp"
#include "support/testsys.hpp"

using namespace spindec;
using spindec::testing::tce_system;
using spindec::testing::two_spin_system;
using std::numbers::pi;

TEST_CASE("pulse line parses into an rf event") {
  const Sequence seq = parse("pulse x pi/2 on 1,2\n", tce_system());
  REQUIRE(seq.events.size() == 1);
  const auto& rf = std::get<RfEvent>(seq.events[0]);
  CHECK(rf.angle == doctest::Approx(pi / 2));
  CHECK(rf.phase == Phase::X);
  CHECK(rf.targets == std::vector<int>{1, 2});
  CHECK_FALSE(rf.acquisition);
}

TEST_CASE("delay expression keeps its tree and evaluates to 1/(4 J12)") {
  const SpinSystem sys = tce_system();
  const Sequence seq = parse("delay 1/(4*J[1,2])", sys);
  const auto& delay = std::get<DelayEvent>(seq.events.at(0));
  CHECK_FALSE(delay.seconds.has_value());
  const Sequence evaluated = evaluate_durations(seq, sys);
  const double v = std::get<DelayEvent>(evaluated.events[0]).seconds.value();
  CHECK(v == doctest::Approx(1.0 / (4.0 * 103.1)).epsilon(1e-14));
  CHECK(v == doctest::Approx(2.4248e-3).epsilon(1e-4));
}

TEST_CASE("grammar coverage in one script") {
  const char* script =
      "# comment line\n"
      "pulse -y -5*pi/6 on all ; grad z\n"
      "decouple off 3\n"
      "refocus 3.5e-3\n"
      "decouple on 3\n"
      "readout x pi/2 on 2\n";
  const Sequence seq = parse(script, tce_system());
  REQUIRE(seq.events.size() == 6);
  const auto& rf = std::get<RfEvent>(seq.events[0]);
  CHECK(rf.phase == Phase::MinusY);
  CHECK(rf.angle == doctest::Approx(-5.0 * pi / 6.0));
  CHECK(rf.targets == std::vector<int>{1, 2, 3});
  CHECK(std::get_if<GradientEvent>(&seq.events[1]) != nullptr);
  CHECK_FALSE(std::get<DecoupleEvent>(seq.events[2]).on);
  const auto& refocus = std::get<RefocusEvent>(seq.events[3]);
  CHECK(refocus.duration.evaluate(tce_system()) == doctest::Approx(3.5e-3));
  CHECK(std::get<RfEvent>(seq.events[5]).acquisition);
}

TEST_CASE("spans point at the offending token") {
  const SpinSystem sys = tce_system();
  SUBCASE("bad axis") {
    try {
      parse("pulse q pi on 1\n", sys);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(e.col() == 7);
      CHECK(std::string(e.what()).find("axis") != std::string::npos);
    }
  }
  SUBCASE("unknown spin on a later line") {
    try {
      parse("grad z\npulse x pi on 9\n", sys);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.col() == 15);
      CHECK(std::string(e.message()).find("spin") != std::string::npos);
    }
  }
  SUBCASE("nonpositive delay") {
    CHECK_THROWS_AS(parse("delay 0\n", sys), ParseError);
    CHECK_THROWS_AS(parse("delay 1e-3 - 2e-3\n", sys), ParseError);
  }
  SUBCASE("division by a zero coupling") {
    SpinSystem no13 = sys;
    no13.j_hz(0, 2) = no13.j_hz(2, 0) = 0.0;
    CHECK_THROWS_AS(parse("delay 1/(4*J[1,3])\n", no13), ParseError);
  }
  SUBCASE("malformed expression") {
    CHECK_THROWS_AS(parse("delay (1+\n", sys), ParseError);
    CHECK_THROWS_AS(parse("pulse x pi 2 on 1\n", sys), ParseError);
  }
  SUBCASE("decouple nesting rejects repeated transitions") {
    CHECK_THROWS_AS(parse("decouple on 3\ndecouple on 3\n", sys), ParseError);
    CHECK_THROWS_AS(parse("decouple off 3\ndecouple off 3\n", sys),
                    ParseError);
    // a leading `off` is legal: the environment starts decoupled
    CHECK_NOTHROW(parse("decouple off 3\ndecouple on 3\n", sys));
  }
  SUBCASE("empty script") { CHECK_THROWS_AS(parse("", sys), ParseError); }
}

TEST_CASE("builtin preparation block") {
  SpinSystem sys = tce_system();
  SUBCASE("eight events, identity opening pulse at ratio 1") {
    const Sequence seq = compile_builtin("prep", sys);
    REQUIRE(seq.events.size() == 8);
    const auto& first = std::get<RfEvent>(seq.events[0]);
    CHECK(first.angle == 0.0);
    CHECK(first.phase == Phase::X);
    CHECK(first.targets == std::vector<int>{2});
    CHECK(std::get_if<GradientEvent>(&seq.events[7]) != nullptr);
    const auto& last_pulse = std::get<RfEvent>(seq.events[6]);
    CHECK(last_pulse.angle == doctest::Approx(-5.0 * pi / 6.0));
  }
  SUBCASE("ratio 0.5 opens with a pi/3 pulse") {
    sys.gamma_ratio = 0.5;
    const Sequence seq = compile_builtin("prep", sys);
    CHECK(std::get<RfEvent>(seq.events[0]).angle == doctest::Approx(pi / 3));
  }
  SUBCASE("missing J12 is rejected") {
    sys.j_hz.setZero();
    CHECK_THROWS_AS(compile_builtin("prep", sys), std::invalid_argument);
  }
}

TEST_CASE("builtin entangling block has five events") {
  const Sequence seq = compile_builtin("entangle", tce_system());
  REQUIRE(seq.events.size() == 5);
  const auto& last = std::get<RfEvent>(seq.events[4]);
  CHECK(last.targets == std::vector<int>{2});
  CHECK(last.angle == doctest::Approx(pi / 2));
  CHECK(last.phase == Phase::MinusY);
  CHECK_THROWS_AS(compile_builtin("nonsense", tce_system()),
                  std::invalid_argument);
}

TEST_CASE("duplicate spins in a target list collapse") {
  const Sequence seq = parse("pulse x pi on 2,1,2\n", tce_system());
  CHECK(std::get<RfEvent>(seq.events[0]).targets == std::vector<int>{1, 2});
}

TEST_CASE("evaluate_durations literal and error paths") {
  const SpinSystem sys = tce_system();
  const Sequence seq = evaluate_durations(parse("delay 3.5e-3\n", sys), sys);
  CHECK(std::get<DelayEvent>(seq.events[0]).seconds.value() ==
        doctest::Approx(3.5e-3));

  // parse against a system where J13 is live, evaluate against one where
  // it is zero: the deferred evaluation must reject the division
  SpinSystem no13 = sys;
  no13.j_hz(0, 2) = no13.j_hz(2, 0) = 0.0;
  const Sequence deferred = parse("delay 1/(4*J[1,3])\n", sys);
  CHECK_THROWS_AS(evaluate_durations(deferred, no13), std::runtime_error);
}

TEST_CASE("pretty-print round trip over a corpus") {
  const SpinSystem sys = tce_system();
  const std::vector<std::string> corpus = {
      "pulse x pi/2 on 1,2\n",
      "pulse -x 0.75 on 1\ndelay 1/(4*J[1,2])\ngrad z\n",
      "pulse y -5*pi/6 on 1,2 ; delay 2e-3 ; readout x pi/2 on 2\n",
      "decouple off 3\nrefocus 1e-3 + 1/(2*J[2,3])\ndecouple on 3\n",
      "delay (1+2)/(4*J[1,2]) - 1e-4\n",
  };
  for (const auto& script : corpus) {
    const Sequence first = parse(script, sys);
    const Sequence second = parse(pretty_print(first), sys);
    CHECK(ast_equal(first, second));
  }
  for (const char* name : {"prep", "entangle"}) {
    const Sequence built = compile_builtin(name, sys);
    CHECK(ast_equal(built, parse(pretty_print(built), sys)));
  }
}

TEST_CASE("round trip of randomly generated valid scripts") {
  const SpinSystem sys = tce_system();
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> event_pick(0, 5);
  std::uniform_int_distribution<int> spin_pick(1, 3);
  std::uniform_real_distribution<double> angle(-2.0 * pi, 2.0 * pi);
  std::uniform_real_distribution<double> dur(1e-5, 5e-3);
  for (int trial = 0; trial < 200; ++trial) {
    std::string script;
    const int n_events = 1 + (trial % 6);
    for (int e = 0; e < n_events; ++e) {
      switch (event_pick(rng)) {
        case 0:
          script += "pulse x " + std::to_string(angle(rng)) + " on " +
                    std::to_string(spin_pick(rng)) + "\n";
          break;
        case 1:
          script += "delay " + std::to_string(dur(rng)) + "\n";
          break;
        case 2:
          script += "grad z\n";
          break;
        case 3:
          script += "refocus 1/(4*J[1,2])\n";
          break;
        case 4:
          script += "decouple off 3 ; decouple on 3\n";
          break;
        default:
          script += "readout -y pi/4 on 2\n";
          break;
      }
    }
    const Sequence first = parse(script, sys);
    CHECK(ast_equal(first, parse(pretty_print(first), sys)));
  }
}

TEST_CASE("fuzzing yields diagnostics, never crashes") {
  const SpinSystem sys = two_spin_system();
  const std::vector<std::string> alphabet = {
      "pulse", "readout", "delay",  "grad", "decouple", "refocus", "on",
      "off",   "all",     "x",      "y",    "z",        "-x",      "-y",
      "pi",    "J",       "[",      "]",    "(",        ")",       "+",
      "-",     "*",       "/",      ";",    ",",        "\n",      "1",
      "2",     "9",       "0.5",    "1e-3", "3.5e-3",   "foo",     "@",
      "#",     "1e999",   "..",     "J[1,2]"};
  std::mt19937 rng(99);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_int_distribution<int> glue(0, 4);
  int parsed = 0, rejected = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::string script;
    const int tokens = len(rng);
    for (int i = 0; i < tokens; ++i) {
      script += alphabet[pick(rng)];
      if (glue(rng)) script += " ";
    }
    int lines = 1;
    for (char c : script) lines += c == '\n';
    try {
      parse(script, sys);
      ++parsed;
    } catch (const ParseError& e) {
      CHECK(e.line() >= 1);
      CHECK(e.line() <= lines + 1);
      CHECK(e.col() >= 1);
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 10000);
  CHECK(rejected > 0);
}
