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

#include "spindec/pulseq.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>

namespace spindec {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using ExprPtr = std::shared_ptr<const DurationExpr>;

ExprPtr make_number(double v) {
  auto e = std::make_shared<DurationExpr>();
  e->kind = DurationExpr::Kind::Number;
  e->number = v;
  return e;
}

ExprPtr make_pi() {
  auto e = std::make_shared<DurationExpr>();
  e->kind = DurationExpr::Kind::Pi;
  return e;
}

ExprPtr make_coupling(int i, int j) {
  auto e = std::make_shared<DurationExpr>();
  e->kind = DurationExpr::Kind::Coupling;
  e->i = i;
  e->j = j;
  return e;
}

ExprPtr make_unary(DurationExpr::Kind kind, ExprPtr child) {
  auto e = std::make_shared<DurationExpr>();
  e->kind = kind;
  e->lhs = std::move(child);
  return e;
}

ExprPtr make_binary(DurationExpr::Kind kind, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<DurationExpr>();
  e->kind = kind;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

int precedence(DurationExpr::Kind kind) {
  switch (kind) {
    case DurationExpr::Kind::Add:
    case DurationExpr::Kind::Sub:
      return 1;
    case DurationExpr::Kind::Mul:
    case DurationExpr::Kind::Div:
      return 2;
    case DurationExpr::Kind::Negate:
      return 3;
    default:
      return 4;
  }
}

}  // namespace

double DurationExpr::evaluate(const SpinSystem& sys) const {
  switch (kind) {
    case Kind::Number:
      return number;
    case Kind::Pi:
      return std::numbers::pi;
    case Kind::Coupling:
      return sys.j_hz(i - 1, j - 1);
    case Kind::Negate:
      return -lhs->evaluate(sys);
    case Kind::Add:
      return lhs->evaluate(sys) + rhs->evaluate(sys);
    case Kind::Sub:
      return lhs->evaluate(sys) - rhs->evaluate(sys);
    case Kind::Mul:
      return lhs->evaluate(sys) * rhs->evaluate(sys);
    case Kind::Div: {
      const double den = rhs->evaluate(sys);
      if (den == 0.0) {
        if (rhs->kind == Kind::Coupling)
          throw std::runtime_error("division by zero coupling J[" +
                                   std::to_string(rhs->i) + "," +
                                   std::to_string(rhs->j) + "]");
        throw std::runtime_error("division by zero in expression");
      }
      return lhs->evaluate(sys) / den;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::string DurationExpr::to_string() const {
  auto wrap = [](const DurationExpr& e, int parent_prec) {
    const std::string s = e.to_string();
    return precedence(e.kind) < parent_prec ? "(" + s + ")" : s;
  };
  switch (kind) {
    case Kind::Number:
      return format_double(number);
    case Kind::Pi:
      return "pi";
    case Kind::Coupling:
      return "J[" + std::to_string(i) + "," + std::to_string(j) + "]";
    case Kind::Negate:
      return "-" + wrap(*lhs, precedence(Kind::Negate));
    case Kind::Add:
      return wrap(*lhs, 1) + "+" + wrap(*rhs, 2);
    case Kind::Sub:
      return wrap(*lhs, 1) + "-" + wrap(*rhs, 2);
    case Kind::Mul:
      return wrap(*lhs, 2) + "*" + wrap(*rhs, 3);
    case Kind::Div:
      return wrap(*lhs, 2) + "/" + wrap(*rhs, 3);
  }
  throw std::logic_error("unreachable expression kind");
}

bool DurationExpr::equals(const DurationExpr& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Number:
      return number == other.number;
    case Kind::Pi:
      return true;
    case Kind::Coupling:
      return i == other.i && j == other.j;
    case Kind::Negate:
      return lhs->equals(*other.lhs);
    default:
      return lhs->equals(*other.lhs) && rhs->equals(*other.rhs);
  }
}

ParseError::ParseError(int line, int col, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) +
                         ": " + message),
      line_(line),
      col_(col),
      message_(message) {}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::X:
      return "x";
    case Phase::Y:
      return "y";
    case Phase::MinusX:
      return "-x";
    case Phase::MinusY:
      return "-y";
  }
  throw std::logic_error("unreachable phase");
}

namespace {

enum class TokKind { Ident, Number, Symbol, Newline, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  double number = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        out.push_back({TokKind::Newline, "\n", 0.0, line_, col_});
        advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back(lex_number());
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(lex_ident());
        continue;
      }
      static const std::string symbols = "+-*/()[],;";
      if (symbols.find(c) != std::string::npos) {
        out.push_back({TokKind::Symbol, std::string(1, c), 0.0, line_, col_});
        advance();
        continue;
      }
      throw ParseError(line_, col_,
                       std::string("unexpected character '") + c + "'");
    }
    out.push_back({TokKind::End, "", 0.0, line_, col_});
    return out;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token lex_number() {
    const int line = line_, col = col_;
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '.'))
      advance();
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-'))
        ++look;
      if (look < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (pos_ < look) advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(value))
      throw ParseError(line, col, "malformed number '" + text + "'");
    return {TokKind::Number, text, value, line, col};
  }

  Token lex_ident() {
    const int line = line_, col = col_;
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      advance();
    return {TokKind::Ident, std::string(src_.substr(start, pos_ - start)), 0.0,
            line, col};
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, const SpinSystem& sys)
      : sys_(sys), tokens_(Lexer(src).run()) {
    source_ = std::string(src);
  }

  Sequence run() {
    Sequence seq;
    seq.source = source_;
    while (!at(TokKind::End)) {
      if (at(TokKind::Newline)) {
        next();
        continue;
      }
      parse_event(seq);
      while (at_symbol(";")) {
        next();
        parse_event(seq);
      }
      if (!at(TokKind::Newline) && !at(TokKind::End))
        fail("expected ';' or end of line");
    }
    check_decouple_nesting(seq);
    return seq;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(t.line, t.col, msg + here());
  }

  std::string here() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::End:
        return " (at end of input)";
      case TokKind::Newline:
        return " (at end of line)";
      default:
        return " (found '" + t.text + "')";
    }
  }

  const Token& peek() const { return tokens_[index_]; }
  const Token& next() { return tokens_[index_++]; }
  bool at(TokKind k) const { return peek().kind == k; }
  bool at_symbol(std::string_view s) const {
    return peek().kind == TokKind::Symbol && peek().text == s;
  }
  bool at_ident(std::string_view s) const {
    return peek().kind == TokKind::Ident && peek().text == s;
  }

  void expect_ident(std::string_view s, const std::string& what) {
    if (!at_ident(s)) fail("expected " + what);
    next();
  }

  void parse_event(Sequence& seq) {
    const Token& head = peek();
    const SourceSpan span{head.line, head.col};
    if (at_ident("pulse") || at_ident("readout")) {
      const bool acquisition = head.text == "readout";
      next();
      RfEvent ev;
      ev.acquisition = acquisition;
      ev.phase = parse_axis();
      const Token& angle_tok = peek();
      ev.angle = evaluate_angle(parse_expr(), angle_tok);
      expect_ident("on", "'on' before the spin list");
      ev.targets = parse_spinlist();
      seq.events.emplace_back(std::move(ev));
    } else if (at_ident("delay")) {
      next();
      DelayEvent ev;
      const Token& tok = peek();
      ev.duration = *parse_expr();
      check_duration(ev.duration, tok);
      seq.events.emplace_back(std::move(ev));
    } else if (at_ident("refocus")) {
      next();
      RefocusEvent ev;
      const Token& tok = peek();
      ev.duration = *parse_expr();
      check_duration(ev.duration, tok);
      seq.events.emplace_back(std::move(ev));
    } else if (at_ident("grad")) {
      next();
      expect_ident("z", "'z' after 'grad'");
      seq.events.emplace_back(GradientEvent{});
    } else if (at_ident("decouple")) {
      next();
      DecoupleEvent ev;
      if (at_ident("on"))
        ev.on = true;
      else if (at_ident("off"))
        ev.on = false;
      else
        fail("expected 'on' or 'off' after 'decouple'");
      next();
      ev.targets = parse_spinlist();
      seq.events.emplace_back(std::move(ev));
    } else {
      fail("expected an event keyword (pulse, readout, delay, grad, "
           "decouple, refocus)");
    }
    seq.spans.push_back(span);
  }

  Phase parse_axis() {
    bool negated = false;
    if (at_symbol("-")) {
      negated = true;
      next();
    }
    if (at_ident("x")) {
      next();
      return negated ? Phase::MinusX : Phase::X;
    }
    if (at_ident("y")) {
      next();
      return negated ? Phase::MinusY : Phase::Y;
    }
    fail("expected pulse axis x, y, -x or -y");
  }

  std::vector<int> parse_spinlist() {
    std::set<int> out;
    if (at_ident("all")) {
      next();
      for (int k = 1; k <= sys_.n; ++k) out.insert(k);
      return {out.begin(), out.end()};
    }
    while (true) {
      if (!at(TokKind::Number)) fail("expected a spin index");
      const Token& tok = peek();
      const double v = tok.number;
      if (!(v >= 1.0 && v <= sys_.n) || v != std::floor(v))
        throw ParseError(tok.line, tok.col,
                         "unknown spin index '" + tok.text + "' (system has " +
                             std::to_string(sys_.n) + " spins)");
      const int k = static_cast<int>(v);
      next();
      out.insert(k);
      if (!at_symbol(",")) break;
      next();
    }
    return {out.begin(), out.end()};
  }

  double evaluate_angle(const ExprPtr& expr, const Token& tok) {
    double v;
    try {
      v = expr->evaluate(sys_);
    } catch (const std::runtime_error& e) {
      throw ParseError(tok.line, tok.col, e.what());
    }
    if (!std::isfinite(v))
      throw ParseError(tok.line, tok.col, "angle does not evaluate finitely");
    return v;
  }

  void check_duration(const DurationExpr& expr, const Token& tok) {
    double v;
    try {
      v = expr.evaluate(sys_);
    } catch (const std::runtime_error& e) {
      throw ParseError(tok.line, tok.col, e.what());
    }
    if (!std::isfinite(v) || v <= 0.0)
      throw ParseError(tok.line, tok.col,
                       "duration evaluates to a nonpositive value (" +
                           format_double(v) + " s)");
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (at_symbol("+") || at_symbol("-")) {
      const bool add = peek().text == "+";
      next();
      lhs = make_binary(
          add ? DurationExpr::Kind::Add : DurationExpr::Kind::Sub,
          std::move(lhs), parse_term());
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (at_symbol("*") || at_symbol("/")) {
      const bool mul = peek().text == "*";
      next();
      lhs = make_binary(
          mul ? DurationExpr::Kind::Mul : DurationExpr::Kind::Div,
          std::move(lhs), parse_factor());
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    if (at_symbol("-")) {
      next();
      return make_unary(DurationExpr::Kind::Negate, parse_factor());
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    if (at(TokKind::Number)) {
      const double v = peek().number;
      next();
      return make_number(v);
    }
    if (at_ident("pi")) {
      next();
      return make_pi();
    }
    if (at_ident("J")) {
      next();
      if (!at_symbol("[")) fail("expected '[' after J");
      next();
      const int i = parse_coupling_index();
      if (!at_symbol(",")) fail("expected ',' inside J[i,j]");
      next();
      const int j = parse_coupling_index();
      if (!at_symbol("]")) fail("expected ']' to close J[i,j]");
      next();
      return make_coupling(i, j);
    }
    if (at_symbol("(")) {
      next();
      ExprPtr inner = parse_expr();
      if (!at_symbol(")")) fail("expected ')'");
      next();
      return inner;
    }
    fail("expected a number, pi, J[i,j] or '('");
  }

  int parse_coupling_index() {
    if (!at(TokKind::Number)) fail("expected a spin index inside J[i,j]");
    const Token& tok = peek();
    const double v = tok.number;
    if (!(v >= 1.0 && v <= sys_.n) || v != std::floor(v))
      throw ParseError(tok.line, tok.col,
                       "unknown spin index '" + tok.text + "' in J[i,j]");
    next();
    return static_cast<int>(v);
  }

  // The initial decoupled set is runtime state (environment spins start
  // decoupled), so the static check only rejects repeated transitions in
  // the same direction.
  void check_decouple_nesting(const Sequence& seq) const {
    std::map<int, bool> last;  // spin -> decoupling currently on?
    for (size_t idx = 0; idx < seq.events.size(); ++idx) {
      const auto* ev = std::get_if<DecoupleEvent>(&seq.events[idx]);
      if (!ev) continue;
      for (int k : ev->targets) {
        const auto it = last.find(k);
        if (it != last.end() && it->second == ev->on)
          throw ParseError(seq.spans[idx].line, seq.spans[idx].col,
                           "decouple " + std::string(ev->on ? "on" : "off") +
                               " repeated for spin " + std::to_string(k));
        last[k] = ev->on;
      }
    }
  }

  const SpinSystem& sys_;
  std::vector<Token> tokens_;
  size_t index_ = 0;
  std::string source_;
};

ExprPtr quarter_j12_expr() {
  return make_binary(DurationExpr::Kind::Div, make_number(1.0),
                     make_binary(DurationExpr::Kind::Mul, make_number(4.0),
                                 make_coupling(1, 2)));
}

}  // namespace

Sequence parse(std::string_view script, const SpinSystem& sys) {
  sys.validate();
  if (script.empty()) throw ParseError(1, 1, "empty script");
  return Parser(script, sys).run();
}

Sequence compile_builtin(const std::string& name, const SpinSystem& sys) {
  sys.validate();
  if (sys.system_spins != std::set<int>{1, 2})
    throw std::invalid_argument(
        "builtin sequences require system spins {1, 2}");
  if (sys.j_hz(0, 1) == 0.0)
    throw std::invalid_argument("builtin '" + name +
                                "' requires a nonzero J[1,2] coupling");
  const double pi = std::numbers::pi;
  Sequence seq;
  auto rf = [&seq](double angle, Phase phase, std::vector<int> targets) {
    seq.events.emplace_back(RfEvent{angle, phase, std::move(targets), false});
  };
  auto delay = [&seq]() {
    seq.events.emplace_back(DelayEvent{*quarter_j12_expr(), std::nullopt});
  };
  if (name == "prep") {
    rf(preparation_angle(sys), Phase::X, {2});
    seq.events.emplace_back(GradientEvent{});
    rf(pi / 4, Phase::X, {1, 2});
    delay();
    rf(pi, Phase::Y, {1, 2});
    delay();
    rf(-5.0 * pi / 6.0, Phase::Y, {1, 2});
    seq.events.emplace_back(GradientEvent{});
  } else if (name == "entangle") {
    rf(pi / 2, Phase::X, {1, 2});
    delay();
    rf(pi, Phase::X, {1, 2});
    delay();
    // The closing rotation is phased on -y; with the simulator's fixed
    // conventions (e^{+i angle G} pulses, e^{-iHt} evolution) this is the
    // phase that lands on the corner-coherence Bell state.
    rf(pi / 2, Phase::MinusY, {2});
  } else {
    throw std::invalid_argument("unknown builtin sequence '" + name + "'");
  }
  seq.spans.assign(seq.events.size(), SourceSpan{0, 0});
  seq.source = pretty_print(seq);
  return seq;
}

Sequence evaluate_durations(Sequence seq, const SpinSystem& sys) {
  auto evaluate = [&sys](const DurationExpr& expr,
                         const char* what) -> double {
    const double v = expr.evaluate(sys);  // may throw on zero coupling
    if (!std::isfinite(v) || v <= 0.0)
      throw std::runtime_error(std::string(what) + " '" + expr.to_string() +
                               "' evaluates to a nonpositive value");
    return v;
  };
  for (auto& event : seq.events) {
    if (auto* d = std::get_if<DelayEvent>(&event))
      d->seconds = evaluate(d->duration, "delay");
    else if (auto* r = std::get_if<RefocusEvent>(&event))
      r->seconds = evaluate(r->duration, "refocus");
  }
  return seq;
}

namespace {

std::string join_targets(const std::vector<int>& targets) {
  std::string out;
  for (size_t i = 0; i < targets.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(targets[i]);
  }
  return out;
}

}  // namespace

std::string pretty_print(const Sequence& seq) {
  std::string out;
  for (const auto& event : seq.events) {
    if (const auto* rf = std::get_if<RfEvent>(&event)) {
      out += rf->acquisition ? "readout " : "pulse ";
      out += to_string(rf->phase) + " " + format_double(rf->angle) + " on " +
             join_targets(rf->targets);
    } else if (const auto* d = std::get_if<DelayEvent>(&event)) {
      out += "delay " + d->duration.to_string();
    } else if (std::get_if<GradientEvent>(&event)) {
      out += "grad z";
    } else if (const auto* dc = std::get_if<DecoupleEvent>(&event)) {
      out += std::string("decouple ") + (dc->on ? "on " : "off ") +
             join_targets(dc->targets);
    } else if (const auto* r = std::get_if<RefocusEvent>(&event)) {
      out += "refocus " + r->duration.to_string();
    }
    out += "\n";
  }
  return out;
}

namespace {

bool events_equal(const PulseEvent& a, const PulseEvent& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ra = std::get_if<RfEvent>(&a)) {
    const auto& rb = std::get<RfEvent>(b);
    return ra->angle == rb.angle && ra->phase == rb.phase &&
           ra->targets == rb.targets && ra->acquisition == rb.acquisition;
  }
  if (const auto* da = std::get_if<DelayEvent>(&a)) {
    const auto& db = std::get<DelayEvent>(b);
    return da->duration.equals(db.duration) && da->seconds == db.seconds;
  }
  if (std::get_if<GradientEvent>(&a)) return true;
  if (const auto* ca = std::get_if<DecoupleEvent>(&a)) {
    const auto& cb = std::get<DecoupleEvent>(b);
    return ca->on == cb.on && ca->targets == cb.targets;
  }
  const auto& fa = std::get<RefocusEvent>(a);
  const auto& fb = std::get<RefocusEvent>(b);
  return fa.duration.equals(fb.duration) && fa.seconds == fb.seconds;
}

}  // namespace

bool ast_equal(const Sequence& a, const Sequence& b) {
  if (a.events.size() != b.events.size()) return false;
  for (size_t i = 0; i < a.events.size(); ++i)
    if (!events_equal(a.events[i], b.events[i])) return false;
  return true;
}

}  // namespace spindec
