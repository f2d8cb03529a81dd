#ifndef TMBUMPS_EXPR_HPP
#define TMBUMPS_EXPR_HPP

#include <functional>
#include <string>

namespace tmbumps::expr {

/// Compile a scalar expression in the variables x and y into a callable.
/// Grammar: numbers, x, y, pi, e, + - * / ^, unary minus, parentheses and
/// the functions exp, log, sin, cos, sqrt, tanh, abs.
/// Throws tmbumps::Error on malformed input.
std::function<double(double, double)> compile(const std::string& source);

}  // namespace tmbumps::expr

#endif
