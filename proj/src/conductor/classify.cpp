#include "kgen/conductor/classify.hpp"

#include <stdexcept>

#include "kgen/util/text.hpp"

namespace kgen::conductor {

std::string_view error_class_name(ErrorClass c) {
    switch (c) {
        case ErrorClass::Syntax: return "syntax";
        case ErrorClass::ApiMisuse: return "api_misuse";
        case ErrorClass::Runtime: return "runtime";
        case ErrorClass::Algorithm: return "algorithm";
        case ErrorClass::MemoryPattern: return "memory_pattern";
    }
    return "runtime";
}

namespace {

bool has_any(const std::string& log, std::initializer_list<const char*> needles) {
    for (const char* n : needles) {
        if (util::contains_ci(log, n)) return true;
    }
    return false;
}

ErrorClass rule_based(const verify::VerifyReport& report) {
    switch (report.status) {
        case core::VerifyStatus::Pass:
            throw std::invalid_argument("classify_error: report passed verification");
        case core::VerifyStatus::CompileFail:
            if (has_any(report.diagnostics,
                        {"implicit declaration", "undeclared", "undefined reference",
                         "unknown function", "unknown compute function", "not declared",
                         "no member named", "unknown hint"})) {
                return ErrorClass::ApiMisuse;
            }
            return ErrorClass::Syntax;
        case core::VerifyStatus::RuntimeFail:
        case core::VerifyStatus::Timeout:
            if (has_any(report.diagnostics,
                        {"addresssanitizer", "heap-buffer-overflow", "stack-buffer-overflow",
                         "global-buffer-overflow", "out of bounds", "out-of-bounds",
                         "slice region exceeds"})) {
                return ErrorClass::MemoryPattern;
            }
            return ErrorClass::Runtime;
        case core::VerifyStatus::NumericFail:
            return ErrorClass::Algorithm;
    }
    return ErrorClass::Runtime;
}

}  // namespace

ErrorClass classify_error(const verify::VerifyReport& report, agents::ChatProvider* provider) {
    const ErrorClass rules = rule_based(report);
    if (!provider ||
        (rules != ErrorClass::Runtime && rules != ErrorClass::Algorithm &&
         rules != ErrorClass::MemoryPattern)) {
        return rules;
    }

    agents::ChatRequest req;
    req.messages = {
        {"system",
         "You classify kernel verification failures. Answer with one word: runtime, algorithm "
         "or memory_pattern."},
        {"user", "Status: " + std::string(core::status_name(report.status)) +
                     "\nViolation fraction: " + std::to_string(report.violation_fraction) +
                     "\nDiagnostics:\n" + report.diagnostics}};
    try {
        const std::string reply = util::to_lower(provider->complete(req).content);
        if (reply.find("memory_pattern") != std::string::npos ||
            reply.find("memory pattern") != std::string::npos) {
            return ErrorClass::MemoryPattern;
        }
        if (reply.find("algorithm") != std::string::npos) return ErrorClass::Algorithm;
        if (reply.find("runtime") != std::string::npos) return ErrorClass::Runtime;
    } catch (const agents::ProviderError&) {
        // classification must always succeed; keep the rule-based result
    }
    return rules;
}

}  // namespace kgen::conductor
