#pragma once

#include <functional>
#include <string>

namespace robinlab {

using ScalarField = std::function<double(double, double)>;

// Compiles a small arithmetic expression in the variables x, y into a field.
// Supported: numeric literals, x, y, pi, + - * /, unary minus, parentheses,
// sin(...), cos(...), exp(...). Throws std::invalid_argument with the
// offending position on malformed input.
ScalarField parse_expression(const std::string& text);

}  // namespace robinlab
