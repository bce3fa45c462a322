#pragma once

#include <optional>
#include <string_view>

#include "kgen/agents/provider.hpp"
#include "kgen/verify/report.hpp"

namespace kgen::conductor {

enum class ErrorClass { Syntax, ApiMisuse, Runtime, Algorithm, MemoryPattern };

std::string_view error_class_name(ErrorClass c);

/// Rule-based classification of a failed verification:
///   CompileFail with unresolved-symbol / unknown-call text -> ApiMisuse,
///   other CompileFail -> Syntax,
///   RuntimeFail/Timeout with sanitizer out-of-bounds text -> MemoryPattern,
///   other RuntimeFail/Timeout -> Runtime,
///   NumericFail -> Algorithm.
/// A provider, when given, may override only among {Runtime, Algorithm,
/// MemoryPattern}; Syntax and ApiMisuse are never second-guessed.
ErrorClass classify_error(const verify::VerifyReport& report,
                          agents::ChatProvider* provider = nullptr);

}  // namespace kgen::conductor
