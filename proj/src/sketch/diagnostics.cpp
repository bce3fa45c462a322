#include "kgen/sketch/diagnostics.hpp"

#include <sstream>

namespace kgen::sketch {

std::string_view diag_code_name(DiagCode c) {
    switch (c) {
        case DiagCode::BadIdentifier: return "BadIdentifier";
        case DiagCode::DuplicateDeclaration: return "DuplicateDeclaration";
        case DiagCode::EmptyBody: return "EmptyBody";
        case DiagCode::EmptyDims: return "EmptyDims";
        case DiagCode::BadDimension: return "BadDimension";
        case DiagCode::UndeclaredSymbol: return "UndeclaredSymbol";
        case DiagCode::ShadowedIndex: return "ShadowedIndex";
        case DiagCode::UnknownHint: return "UnknownHint";
        case DiagCode::UnknownFunction: return "UnknownFunction";
        case DiagCode::UseBeforeAlloc: return "UseBeforeAlloc";
        case DiagCode::StoreBeforeWrite: return "StoreBeforeWrite";
        case DiagCode::RankMismatch: return "RankMismatch";
        case DiagCode::BadComputeDest: return "BadComputeDest";
    }
    return "Unknown";
}

std::string Diagnostic::to_string() const {
    std::ostringstream ss;
    ss << diag_code_name(code);
    if (line > 0) ss << " (line " << line << ")";
    ss << ": " << message;
    return ss.str();
}

std::string render_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream ss;
    for (const auto& d : diags) ss << d.to_string() << "\n";
    return ss.str();
}

ParseError::ParseError(Kind k, int line_, int col_, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + message),
      kind(k),
      line(line_),
      col(col_) {}

}  // namespace kgen::sketch
