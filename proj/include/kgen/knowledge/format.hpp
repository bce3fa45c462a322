#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgen/agents/provider.hpp"

namespace kgen::knowledge {

/// Wraps raw text files into the docset layout
/// `<out_root>/<dsl>/<backend>/<category>/<stem>.md` with a front-matter
/// block. Tags come from the provider (comma-separated reply) when one is
/// given, else from the most frequent informative words of the text.
struct FormatRequest {
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path out_root;
    std::string dsl;
    std::string backend;
    std::string category;  // one of the four docset categories
    agents::ChatProvider* provider = nullptr;
    std::size_t max_tags = 5;
};

std::vector<std::filesystem::path> format_docs(const FormatRequest& req);

/// Frequency-ranked informative words (stop words and bare numbers removed).
std::vector<std::string> suggest_tags(const std::string& text, std::size_t max_tags);

}  // namespace kgen::knowledge
