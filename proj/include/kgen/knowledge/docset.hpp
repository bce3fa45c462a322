#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgen/agents/provider.hpp"
#include "kgen/sketch/ast.hpp"

namespace kgen::knowledge {

struct Document {
    std::string id;     // file name within its category
    std::string title;
    std::string body;
    std::set<std::string> tags;
};

/// The four documentation categories a target integration provides. All four
/// directories must exist under `docspec/<dsl>/<backend>/`; any may be empty.
struct DocSet {
    std::string dsl_id;
    std::string backend_id;
    std::vector<Document> basic;
    std::vector<Document> api;
    std::vector<Document> expert_suggestions;
    std::vector<Document> examples;
    std::vector<std::string> warnings;  // unknown files, malformed front matter
};

class DocError : public std::runtime_error {
public:
    DocError(const std::string& message, std::vector<std::string> missing_)
        : std::runtime_error(message), missing(std::move(missing_)) {}
    std::vector<std::string> missing;
};

inline const std::vector<std::string>& docset_categories() {
    static const std::vector<std::string> cats = {"basic", "api", "expert_suggestions", "examples"};
    return cats;
}

/// Loads a docset rooted at `<...>/<dsl>/<backend>`. Documents are Markdown
/// files with an optional front-matter block:
///
///   ---
///   title: Reduction primitives
///   tags: reduce, api
///   ---
///
/// Missing categories raise DocError naming every absent directory; unknown
/// (non-.md) files become warnings.
DocSet load_docset(const std::filesystem::path& root);

/// Shrinks the API document list to at most `budget` total characters. With
/// a provider, the selection is LLM-chosen (document ids, one per line, from
/// the provider's reply). Without one, documents are ranked by tag overlap
/// with the sketch's compute function names and greedily kept while they
/// fit. Output documents are always a subset of the input by identity.
std::vector<Document> compress_api_docs(const std::vector<Document>& api,
                                        const std::string& task_summary,
                                        const sketch::Sketch* sk,
                                        agents::ChatProvider* provider,
                                        std::size_t budget);

std::size_t total_size(const std::vector<Document>& docs);

}  // namespace kgen::knowledge
