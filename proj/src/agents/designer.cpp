#include "kgen/agents/designer.hpp"

#include <sstream>

#include "kgen/sketch/parser.hpp"
#include "kgen/sketch/validate.hpp"
#include "kgen/util/text.hpp"

namespace kgen::agents {

namespace {

constexpr const char* kDesignerSystem =
    "You are the Designer of a kernel generation system. You produce a Unified Sketch: a "
    "hardware-agnostic plan that captures parallelization strategy, data movement, tiling and "
    "memory reuse without committing to a target language.";

constexpr const char* kDesignerInstructions = R"(Reason about:
1. the inherent parallelism of the computation,
2. memory bandwidth constraints and opportunities for data reuse,
3. hardware features worth exploiting.

Then emit exactly one unified sketch inside a ```usk fenced code block. The sketch declares
symbols, tensors and constexpr values, uses for/range loops with explicit tiling, moves data
with load/store, computes with standard library calls (destination last), and annotates
performance intent with @llm_hint decorators and alloc hint lists. Hints never change
semantics.)";

std::string find_usk_block(const std::string& reply) {
    for (const auto& block : util::extract_fenced_blocks(reply)) {
        if (block.tag == "usk") return block.body;
    }
    return {};
}

std::string rationale_of(const std::string& reply) {
    const auto pos = reply.find("```usk");
    if (pos == std::string::npos) return reply;
    std::string out = util::trim(reply.substr(0, pos));
    const auto close = reply.find("```", pos + 6);
    if (close != std::string::npos) {
        out += util::trim(reply.substr(close + 3));
    }
    return out;
}

}  // namespace

DesignResult design(const DesignRequest& req, ChatProvider& provider,
                    const std::set<std::string>& known_fns) {
    if (req.task_text.empty()) throw std::invalid_argument("design: empty task specification");

    knowledge::ContextInputs ctx;
    ctx.task_text = req.task_text;
    ctx.docs = req.docs;
    ctx.retrieved_examples = req.retrieved_examples;
    ctx.feedback = req.feedback;
    std::string body = knowledge::render_sections(
        knowledge::assemble_context(ctx, knowledge::Stage::Designer));
    if (!req.inspiration.empty()) {
        body += "## Inspiration from previous rounds\n" + req.inspiration + "\n\n";
    }
    body += kDesignerInstructions;

    ChatRequest chat;
    chat.model = req.model;
    chat.temperature = req.temperature;
    chat.messages = {{"system", kDesignerSystem}, {"user", body}};

    std::string failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatReply reply = provider.complete(chat);
        chat.messages.push_back({"assistant", reply.content});

        const std::string sketch_text = find_usk_block(reply.content);
        if (sketch_text.empty()) {
            failure = "no ```usk code block found in the reply";
        } else {
            try {
                sketch::Sketch sk = sketch::parse_sketch(sketch_text);
                auto diags = sketch::validate_sketch(sk, known_fns);
                if (diags.empty()) {
                    DesignResult result;
                    result.sk = std::move(sk);
                    result.sketch_text = sketch_text;
                    result.rationale = rationale_of(reply.content);
                    result.transcript = chat.messages;
                    return result;
                }
                failure = sketch::render_diagnostics(diags);
            } catch (const sketch::ParseError& e) {
                failure = e.what();
            }
        }
        // One repair round: feed the diagnostics back verbatim.
        chat.messages.push_back(
            {"user", "The sketch was rejected:\n" + failure +
                         "\nEmit a corrected sketch in a single ```usk block."});
    }
    throw AgentError(AgentError::Kind::MalformedOutput,
                     "designer produced no valid sketch after one repair round: " + failure,
                     render_transcript(chat.messages));
}

}  // namespace kgen::agents
