#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgen/agents/provider.hpp"
#include "kgen/knowledge/context.hpp"
#include "kgen/sketch/ast.hpp"

namespace kgen::agents {

class AgentError : public std::runtime_error {
public:
    enum class Kind { MalformedOutput, Provider };

    AgentError(Kind k, const std::string& message, std::string transcript_)
        : std::runtime_error(message), kind(k), transcript(std::move(transcript_)) {}

    Kind kind;
    std::string transcript;
};

struct DesignRequest {
    std::string task_text;
    const knowledge::DocSet* docs = nullptr;
    std::vector<std::string> retrieved_examples;
    std::string feedback;     // prior failure diagnostics / conductor suggestion
    std::string inspiration;  // evolve: analysis plan + elite sketch
    double temperature = 0.0;
    std::string model;
};

struct DesignResult {
    sketch::Sketch sk;
    std::string sketch_text;  // the fenced block as emitted
    std::string rationale;    // reply text outside the code block
    std::vector<ChatMessage> transcript;
};

/// One Designer call: assembles context, requests a unified sketch inside a
/// ```usk fenced block, parses and validates it. On a malformed or invalid
/// reply one repair round re-prompts with the diagnostics verbatim; a second
/// failure raises AgentError with the full transcript retained.
DesignResult design(const DesignRequest& req, ChatProvider& provider,
                    const std::set<std::string>& known_fns = sketch::core_compute_names());

}  // namespace kgen::agents
