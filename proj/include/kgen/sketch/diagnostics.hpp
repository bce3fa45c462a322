#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgen::sketch {

enum class DiagCode {
    BadIdentifier,
    DuplicateDeclaration,
    EmptyBody,
    EmptyDims,
    BadDimension,
    UndeclaredSymbol,
    ShadowedIndex,
    UnknownHint,
    UnknownFunction,
    UseBeforeAlloc,
    StoreBeforeWrite,
    RankMismatch,
    BadComputeDest,
};

std::string_view diag_code_name(DiagCode c);

struct Diagnostic {
    DiagCode code;
    std::string message;
    int line = 0;

    std::string to_string() const;
};

std::string render_diagnostics(const std::vector<Diagnostic>& diags);

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, UnknownHint, UndeclaredSymbol };

    ParseError(Kind k, int line, int col, const std::string& message);

    Kind kind;
    int line;
    int col;
};

}  // namespace kgen::sketch
