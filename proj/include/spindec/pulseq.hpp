/* Copyright 2026 The Spindec Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SPINDEC_PULSEQ_HPP
#define SPINDEC_PULSEQ_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spindec/spinsys.hpp"
#include "spindec/types.hpp"

namespace spindec {

// Pulse sequence scripts, one event per line (or semicolon separated),
// applied left to right in time order:
//
//   pulse x pi/2 on 1,2
//   delay 1/(4*J[1,2])
//   grad z
//   decouple off 3
//   refocus 3.5e-3
//   readout x pi/2 on 2
//
// Angles are signed radians; pi and the coupling symbols J[i,j] (Hz) are
// available inside expressions. Comments run from '#' to end of line.

/// Arithmetic expression over rational literals, pi and J[i,j] symbols.
/// Evaluates to seconds (durations) or radians (angles).
struct DurationExpr {
  enum class Kind { Number, Pi, Coupling, Negate, Add, Sub, Mul, Div };
  Kind kind = Kind::Number;
  double number = 0.0;  // Kind::Number
  int i = 0, j = 0;     // Kind::Coupling
  std::shared_ptr<const DurationExpr> lhs, rhs;  // Negate uses lhs only

  /// Throws std::runtime_error on division by zero (e.g. a zero coupling).
  double evaluate(const SpinSystem& sys) const;
  std::string to_string() const;
  bool equals(const DurationExpr& other) const;
};

struct RfEvent {
  double angle = 0.0;  // signed radians, evaluated at parse time
  Phase phase = Phase::X;
  std::vector<int> targets;  // sorted, 1-based
  bool acquisition = false;  // true for `readout`
};

struct DelayEvent {
  DurationExpr duration;
  std::optional<double> seconds;  // filled by evaluate_durations
};

struct GradientEvent {};  // z axis crusher

struct DecoupleEvent {
  bool on = true;
  std::vector<int> targets;
};

struct RefocusEvent {
  DurationExpr duration;
  std::optional<double> seconds;
};

using PulseEvent =
    std::variant<RfEvent, DelayEvent, GradientEvent, DecoupleEvent,
                 RefocusEvent>;

struct SourceSpan {
  int line = 0;  // 1-based
  int col = 0;
};

struct Sequence {
  std::vector<PulseEvent> events;
  std::vector<SourceSpan> spans;  // one per event
  std::string source;
};

/// Parse failure with a 1-based source position. what() is preformatted as
/// "line:col: message".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& message);
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& message() const { return message_; }

 private:
  int line_, col_;
  std::string message_;
};

/// Parse a script against a spin system. Spin references and duration
/// expressions are validated eagerly; duration evaluation itself is
/// deferred to evaluate_durations. Throws ParseError only.
Sequence parse(std::string_view script, const SpinSystem& sys);

/// The built-in experiment blocks, "prep" and "entangle".
Sequence compile_builtin(const std::string& name, const SpinSystem& sys);

/// Copy of seq with every delay/refocus duration evaluated to seconds.
/// Throws std::runtime_error on nonpositive durations or zero couplings.
Sequence evaluate_durations(Sequence seq, const SpinSystem& sys);

std::string pretty_print(const Sequence& seq);

/// Structural equality of event lists (spans and source text ignored).
bool ast_equal(const Sequence& a, const Sequence& b);

std::string to_string(Phase phase);

}  // namespace spindec

#endif  // SPINDEC_PULSEQ_HPP
