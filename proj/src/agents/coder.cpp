#include "kgen/agents/coder.hpp"

#include <sstream>

#include "kgen/util/text.hpp"

namespace kgen::agents {

namespace {

constexpr const char* kCoderSystem =
    "You are the Coder of a kernel generation system. You translate a Unified Sketch into "
    "executable code for one target DSL, consulting the API reference and retrieved examples "
    "for idiomatic usage.";

std::string artifact_instructions(const CodeRequest& req) {
    std::ostringstream os;
    os << "Translate the sketch above into the '" << req.target_dsl << "' DSL.\n";
    if (req.target_dsl == "c") {
        os << "The kernel must be plain C11 defining\n"
              "    int kernel_main(int argc, char** argv);\n"
              "argv[1..] carries input tensor file paths, then output tensor file paths, then "
              "name=value scalar bindings. Read and write tensors with the ten_io.h helpers "
              "(#include \"ten_io.h\"). Return 0 on success.\n";
    } else if (req.target_dsl == "sketch") {
        os << "The target is the sketch interpreter itself: emit a complete unified sketch.\n";
    }
    os << "Emit exactly one fenced code block per artifact, tagged:";
    for (const auto& tag : req.expected_artifacts) os << " ```" << tag;
    os << "\n";
    return os.str();
}

}  // namespace

CodeResult code(const CodeRequest& req, ChatProvider& provider) {
    if (req.sketch_text.empty()) throw std::invalid_argument("code: empty sketch");
    if (req.target_dsl.empty()) throw std::invalid_argument("code: no target dsl");

    CodeRequest request = req;
    if (request.expected_artifacts.empty()) {
        request.expected_artifacts = {request.target_dsl == "sketch" ? "usk" : request.target_dsl};
    }

    std::ostringstream body;
    body << "## Unified sketch\n```usk\n" << request.sketch_text;
    if (request.sketch_text.back() != '\n') body << "\n";
    body << "```\n\n";
    body << knowledge::render_sections(request.context);
    if (!request.error_log.empty()) {
        body << "## Previous failure\n" << request.error_log << "\n\n";
    }
    if (!request.fix_suggestion.empty()) {
        body << "## Fix suggestion\n" << request.fix_suggestion << "\n\n";
    }
    body << artifact_instructions(request);

    ChatRequest chat;
    chat.model = request.model;
    chat.temperature = request.temperature;
    chat.messages = {{"system", kCoderSystem}, {"user", body.str()}};

    std::string failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatReply reply = provider.complete(chat);
        chat.messages.push_back({"assistant", reply.content});

        auto blocks = util::extract_fenced_blocks(reply.content);
        std::map<std::string, std::string> artifacts;
        bool ok = true;
        std::ostringstream problems;
        for (const auto& tag : request.expected_artifacts) {
            int found = 0;
            for (const auto& b : blocks) {
                if (b.tag == tag) {
                    artifacts[tag] = b.body;
                    ++found;
                }
            }
            if (found != 1) {
                ok = false;
                problems << "expected exactly one ```" << tag << " block, found " << found << "\n";
            }
        }
        if (ok) {
            CodeResult result;
            result.artifacts = std::move(artifacts);
            result.kernel_source = result.artifacts.at(request.expected_artifacts.front());
            if (auto it = result.artifacts.find("host"); it != result.artifacts.end()) {
                result.host_wrapper = it->second;
            }
            result.transcript = chat.messages;
            return result;
        }
        failure = problems.str();
        chat.messages.push_back(
            {"user", "The reply was malformed:\n" + failure + "Re-emit the artifacts."});
    }
    throw AgentError(AgentError::Kind::MalformedOutput,
                     "coder produced malformed output after one repair round: " + failure,
                     render_transcript(chat.messages));
}

}  // namespace kgen::agents
