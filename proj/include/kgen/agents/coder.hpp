#pragma once

#include <map>
#include <string>
#include <vector>

#include "kgen/agents/designer.hpp"
#include "kgen/knowledge/context.hpp"

namespace kgen::agents {

struct CodeRequest {
    std::string sketch_text;  // validated unified sketch
    std::string target_dsl;   // "c" or "sketch"
    std::vector<knowledge::PromptSection> context;  // assembled by the caller
    std::string error_log;        // previous verification failure, verbatim
    std::string fix_suggestion;   // conductor guidance
    std::vector<std::string> expected_artifacts;  // fence tags; default from target_dsl
    double temperature = 0.0;
    std::string model;
};

struct CodeResult {
    std::string kernel_source;  // first expected artifact
    std::string host_wrapper;   // "host"-tagged artifact when requested
    std::map<std::string, std::string> artifacts;
    std::vector<ChatMessage> transcript;
};

/// One Coder call: translates the sketch into the target DSL. The reply must
/// contain exactly one fenced code block per expected artifact tag; one
/// repair round re-prompts on malformed output. When the request carries a
/// previous error log it is included verbatim under a labeled section.
CodeResult code(const CodeRequest& req, ChatProvider& provider);

}  // namespace kgen::agents
