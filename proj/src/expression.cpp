#include "robinlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace robinlab {

namespace {

// Flat postfix program; cheap enough to evaluate per quadrature point.
struct Op {
  enum Kind { NUM, VARX, VARY, ADD, SUB, MUL, DIV, NEG, SIN, COS, EXP } kind;
  double value = 0.0;
};

struct Parser {
  const std::string& s;
  size_t pos = 0;
  std::vector<Op>& prog;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression: " + what + " at position " + std::to_string(pos) +
                                " in \"" + s + "\"");
  }
  void skip() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expr() {
    term();
    for (;;) {
      skip();
      if (eat('+')) {
        term();
        prog.push_back({Op::ADD});
      } else if (eat('-')) {
        term();
        prog.push_back({Op::SUB});
      } else {
        return;
      }
    }
  }
  void term() {
    factor();
    for (;;) {
      skip();
      if (eat('*')) {
        factor();
        prog.push_back({Op::MUL});
      } else if (eat('/')) {
        factor();
        prog.push_back({Op::DIV});
      } else {
        return;
      }
    }
  }
  void factor() {
    skip();
    if (eat('-')) {
      factor();
      prog.push_back({Op::NEG});
      return;
    }
    if (eat('+')) {
      factor();
      return;
    }
    primary();
  }
  void primary() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (std::isdigit((unsigned char)c) || c == '.') {
      size_t used = 0;
      double v;
      try {
        v = std::stod(s.substr(pos), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += used;
      prog.push_back({Op::NUM, v});
      return;
    }
    if (std::isalpha((unsigned char)c)) {
      size_t start = pos;
      while (pos < s.size() && std::isalpha((unsigned char)s[pos])) ++pos;
      std::string name = s.substr(start, pos - start);
      if (name == "x") {
        prog.push_back({Op::VARX});
      } else if (name == "y") {
        prog.push_back({Op::VARY});
      } else if (name == "pi") {
        prog.push_back({Op::NUM, M_PI});
      } else if (name == "sin" || name == "cos" || name == "exp") {
        if (!eat('(')) fail("expected '(' after " + name);
        expr();
        if (!eat(')')) fail("expected ')'");
        prog.push_back({name == "sin" ? Op::SIN : name == "cos" ? Op::COS : Op::EXP});
      } else {
        pos = start;
        fail("unknown identifier '" + name + "'");
      }
      return;
    }
    if (eat('(')) {
      expr();
      if (!eat(')')) fail("expected ')'");
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

ScalarField parse_expression(const std::string& text) {
  auto prog = std::make_shared<std::vector<Op>>();
  Parser parser{text, 0, *prog};
  parser.expr();
  parser.skip();
  if (parser.pos != text.size()) parser.fail("trailing input");

  return [prog](double x, double y) {
    double stack[64];
    int top = 0;
    for (const Op& op : *prog) {
      switch (op.kind) {
        case Op::NUM: stack[top++] = op.value; break;
        case Op::VARX: stack[top++] = x; break;
        case Op::VARY: stack[top++] = y; break;
        case Op::ADD: --top; stack[top - 1] += stack[top]; break;
        case Op::SUB: --top; stack[top - 1] -= stack[top]; break;
        case Op::MUL: --top; stack[top - 1] *= stack[top]; break;
        case Op::DIV: --top; stack[top - 1] /= stack[top]; break;
        case Op::NEG: stack[top - 1] = -stack[top - 1]; break;
        case Op::SIN: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Op::COS: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Op::EXP: stack[top - 1] = std::exp(stack[top - 1]); break;
      }
      if (top >= 63) throw std::runtime_error("expression: evaluation stack overflow");
    }
    return stack[0];
  };
}

}  // namespace robinlab
