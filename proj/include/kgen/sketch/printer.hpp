#pragma once

#include <string>

#include "kgen/sketch/ast.hpp"

namespace kgen::sketch {

/// Canonical source form. parse_sketch(print_sketch(s)) is structurally
/// equal to s for any valid sketch. Throws std::invalid_argument on an
/// empty body (invalid sketches have no printed form).
std::string print_sketch(const Sketch& s);

std::string print_expr(const Expr& e);

/// Deep copy with every hint set cleared; evaluation of the result must
/// match evaluation of the original (hints are performance-only).
Sketch strip_hints(const Sketch& s);

}  // namespace kgen::sketch
