#include "kgen/knowledge/context.hpp"

#include <sstream>

namespace kgen::knowledge {

namespace {

std::string render_documents(const std::vector<Document>& docs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i) os << "\n";
        os << "### " << docs[i].title << "\n" << docs[i].body << "\n";
    }
    return os.str();
}

}  // namespace

std::vector<PromptSection> assemble_context(const ContextInputs& in, Stage stage) {
    std::vector<PromptSection> sections;
    auto add = [&](const char* label, std::string body) {
        if (!body.empty()) sections.push_back({label, std::move(body)});
    };

    add("## Task", in.task_text);
    if (in.docs) add("## Hardware and language notes", render_documents(in.docs->basic));
    if (stage == Stage::Coder) add("## API reference", render_documents(in.api_docs));
    if (in.docs) add("## Expert suggestions", render_documents(in.docs->expert_suggestions));

    if (!in.retrieved_examples.empty()) {
        std::ostringstream os;
        for (std::size_t i = 0; i < in.retrieved_examples.size(); ++i) {
            if (i) os << "\n";
            os << "### Example " << (i + 1) << "\n" << in.retrieved_examples[i] << "\n";
        }
        sections.push_back({"## Retrieved examples", os.str()});
    }
    add("## Previous feedback", in.feedback);
    return sections;
}

std::string render_sections(const std::vector<PromptSection>& sections) {
    std::ostringstream os;
    for (const auto& s : sections) {
        os << s.label << "\n" << s.body << "\n\n";
    }
    return os.str();
}

}  // namespace kgen::knowledge
