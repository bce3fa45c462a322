#include "kgen/knowledge/format.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "kgen/knowledge/docset.hpp"
#include "kgen/util/text.hpp"

namespace kgen::knowledge {

std::vector<std::string> suggest_tags(const std::string& text, std::size_t max_tags) {
    static const std::set<std::string> stop = {
        "the", "a",  "an", "and", "or",  "of",  "to", "in", "on", "for", "with", "is",
        "are", "be", "by", "as",  "it",  "its", "at", "if", "this", "that", "from",
        "can", "use", "used", "using", "when", "which", "each", "all", "any",
    };
    std::map<std::string, int> freq;
    for (const auto& w : util::tokenize_words(text)) {
        if (w.size() < 3 || stop.count(w)) continue;
        if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            continue;
        ++freq[w];
    }
    std::vector<std::pair<int, std::string>> ranked;
    for (const auto& [w, n] : freq) ranked.emplace_back(n, w);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> tags;
    for (const auto& [n, w] : ranked) {
        if (tags.size() >= max_tags) break;
        tags.push_back(w);
    }
    return tags;
}

std::vector<std::filesystem::path> format_docs(const FormatRequest& req) {
    const auto& cats = docset_categories();
    if (std::find(cats.begin(), cats.end(), req.category) == cats.end()) {
        throw std::invalid_argument("unknown docset category '" + req.category + "'");
    }
    const auto target_dir = req.out_root / req.dsl / req.backend / req.category;
    std::filesystem::create_directories(target_dir);
    // The other categories must exist too for the docset to load.
    for (const auto& cat : cats) {
        std::filesystem::create_directories(req.out_root / req.dsl / req.backend / cat);
    }

    std::vector<std::filesystem::path> written;
    for (const auto& input : req.inputs) {
        const std::string text = util::read_file(input);
        std::vector<std::string> tags;
        if (req.provider) {
            agents::ChatRequest creq;
            creq.messages = {
                {"system", "You tag kernel development documentation."},
                {"user", "Suggest up to " + std::to_string(req.max_tags) +
                             " short lowercase tags for this document, as one comma-separated "
                             "line.\n\n" +
                             text}};
            std::istringstream ss(req.provider->complete(creq).content);
            std::string tag;
            while (std::getline(ss, tag, ',') && tags.size() < req.max_tags) {
                tag = util::to_lower(util::trim(tag));
                if (!tag.empty()) tags.push_back(tag);
            }
        }
        if (tags.empty()) tags = suggest_tags(text, req.max_tags);

        std::ostringstream out;
        out << "---\n";
        out << "title: " << input.stem().string() << "\n";
        out << "tags: ";
        for (std::size_t i = 0; i < tags.size(); ++i) out << (i ? ", " : "") << tags[i];
        out << "\n---\n" << text;
        if (!text.empty() && text.back() != '\n') out << "\n";

        const auto dest = target_dir / (input.stem().string() + ".md");
        util::write_file(dest, out.str());
        written.push_back(dest);
    }
    return written;
}

}  // namespace kgen::knowledge
