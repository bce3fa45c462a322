#pragma once

#include <set>
#include <string>
#include <vector>

#include "kgen/sketch/ast.hpp"
#include "kgen/sketch/diagnostics.hpp"

namespace kgen::sketch {

/// Checks every structural invariant of a sketch, however it was built:
/// declaration consistency, scoping, hint vocabulary, slice/buffer ranks,
/// alloc-before-use and write-before-store discipline, and compute function
/// names against `known_fns` (defaults to the core library floor; pass the
/// active compute library's names when extensions are registered).
/// Returns an empty list iff the sketch is valid.
std::vector<Diagnostic> validate_sketch(const Sketch& s,
                                        const std::set<std::string>& known_fns = core_compute_names());

}  // namespace kgen::sketch
