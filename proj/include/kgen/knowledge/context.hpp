#pragma once

#include <string>
#include <vector>

#include "kgen/knowledge/docset.hpp"

namespace kgen::knowledge {

enum class Stage { Designer, Coder, Conductor };

struct PromptSection {
    std::string label;
    std::string body;
};

struct ContextInputs {
    std::string task_text;
    std::string sketch_text;                      // empty for the designer's first call
    const DocSet* docs = nullptr;
    std::vector<Document> api_docs;               // pre-compressed; coder stage only
    std::vector<std::string> retrieved_examples;  // rendered database records
    std::string feedback;                         // prior-iteration feedback / suggestion
};

/// Deterministic context assembly. Section order: task, hardware/basic
/// documentation, API documentation (coder only), expert suggestions,
/// retrieved examples, previous feedback. Empty sections are omitted; the
/// same inputs always produce byte-identical output.
std::vector<PromptSection> assemble_context(const ContextInputs& in, Stage stage);

std::string render_sections(const std::vector<PromptSection>& sections);

}  // namespace kgen::knowledge
