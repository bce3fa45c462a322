#pragma once

#include <string_view>

#include "kgen/sketch/ast.hpp"
#include "kgen/sketch/diagnostics.hpp"

namespace kgen::sketch {

/// Parses sketch source text. Grammar, by example:
///
///   sketch rms_norm {
///     symbols: B, F;
///     tensors: X[B, F]: f32; Y[B, F]: f32;
///     constexpr: eps, TILE = 4;
///
///     @llm_hint("parallel")
///     for b in range(B):
///       row = alloc([F], llm_hint=["fast", "input_cache"])
///       load(X[b, 0:F] -> row)
///       mul(row, row, row)
///       store(row -> Y[b, 0:F])
///   }
///
/// `#` starts a line comment; bodies are indentation-significant; header
/// sections are semicolon-separated; `ceil(a, b)` is integer ceiling
/// division. Identifier references are resolved while parsing: an unbound
/// name raises ParseError with kind UndeclaredSymbol, an out-of-vocabulary
/// hint raises kind UnknownHint.
Sketch parse_sketch(std::string_view text);

}  // namespace kgen::sketch
