#include "kgen/knowledge/docset.hpp"

#include <algorithm>
#include <sstream>

#include "kgen/util/text.hpp"

namespace kgen::knowledge {

namespace {

Document parse_document(const std::filesystem::path& path, std::vector<std::string>& warnings) {
    Document doc;
    doc.id = path.filename().string();
    doc.title = path.stem().string();
    std::string text = util::read_file(path);
    auto lines = util::split_lines(text);

    std::size_t body_start = 0;
    if (!lines.empty() && util::trim(lines[0]) == "---") {
        std::size_t end = 0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (util::trim(lines[i]) == "---") {
                end = i;
                break;
            }
        }
        if (end == 0) {
            warnings.push_back(path.string() + ": unterminated front matter");
        } else {
            for (std::size_t i = 1; i < end; ++i) {
                const std::string line = util::trim(lines[i]);
                if (line.rfind("title:", 0) == 0) {
                    doc.title = util::trim(line.substr(6));
                } else if (line.rfind("tags:", 0) == 0) {
                    std::istringstream ss(line.substr(5));
                    std::string tag;
                    while (std::getline(ss, tag, ',')) {
                        tag = util::trim(tag);
                        if (!tag.empty()) doc.tags.insert(util::to_lower(tag));
                    }
                } else if (!line.empty()) {
                    warnings.push_back(path.string() + ": unknown front-matter line '" + line + "'");
                }
            }
            body_start = end + 1;
        }
    }
    std::ostringstream body;
    for (std::size_t i = body_start; i < lines.size(); ++i) {
        body << lines[i];
        if (i + 1 < lines.size()) body << "\n";
    }
    doc.body = body.str();
    return doc;
}

}  // namespace

DocSet load_docset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    DocSet out;
    if (root.has_parent_path()) {
        out.backend_id = root.filename().string();
        out.dsl_id = root.parent_path().filename().string();
    }

    std::vector<std::string> missing;
    for (const auto& cat : docset_categories()) {
        if (!fs::is_directory(root / cat)) missing.push_back(cat);
    }
    if (!missing.empty()) {
        std::string msg = "docset at " + root.string() + " is missing categories:";
        for (const auto& c : missing) msg += " " + c;
        throw DocError(msg, std::move(missing));
    }

    auto load_category = [&](const std::string& cat, std::vector<Document>& into) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(root / cat)) {
            if (!entry.is_regular_file()) continue;
            if (entry.path().extension() != ".md") {
                out.warnings.push_back("unknown file: " + entry.path().string());
                continue;
            }
            files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) into.push_back(parse_document(f, out.warnings));
    };
    load_category("basic", out.basic);
    load_category("api", out.api);
    load_category("expert_suggestions", out.expert_suggestions);
    load_category("examples", out.examples);

    if (fs::is_directory(root)) {
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_regular_file()) {
                out.warnings.push_back("unknown file: " + entry.path().string());
            }
        }
    }
    return out;
}

std::size_t total_size(const std::vector<Document>& docs) {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.body.size() + d.title.size();
    return n;
}

std::vector<Document> compress_api_docs(const std::vector<Document>& api,
                                        const std::string& task_summary, const sketch::Sketch* sk,
                                        agents::ChatProvider* provider, std::size_t budget) {
    if (budget == 0) throw std::invalid_argument("compress_api_docs: budget must be positive");
    if (total_size(api) <= budget) return api;

    std::vector<const Document*> ordered;

    if (provider) {
        std::ostringstream prompt;
        prompt << "Select the API documents most relevant to this kernel task. "
               << "Reply with one document id per line, most relevant first.\n\n"
               << "Task: " << task_summary << "\n";
        if (sk) {
            prompt << "Compute functions used:";
            for (const auto& fn : sketch::compute_names_used(*sk)) prompt << " " << fn;
            prompt << "\n";
        }
        prompt << "\nDocuments:\n";
        for (const auto& d : api) {
            prompt << "- " << d.id << ": " << d.title << " [";
            bool first = true;
            for (const auto& t : d.tags) {
                prompt << (first ? "" : ", ") << t;
                first = false;
            }
            prompt << "]\n";
        }
        agents::ChatRequest req;
        req.messages = {{"system", "You pick relevant API documentation for kernel generation."},
                        {"user", prompt.str()}};
        auto reply = provider->complete(req);
        for (const auto& raw : util::split_lines(reply.content)) {
            std::string line = util::trim(raw);
            while (!line.empty() && (line.front() == '-' || line.front() == '*')) {
                line = util::trim(line.substr(1));
            }
            for (const auto& d : api) {
                if (line == d.id &&
                    std::find(ordered.begin(), ordered.end(), &d) == ordered.end()) {
                    ordered.push_back(&d);
                }
            }
        }
    } else {
        // Deterministic fallback: rank by tag overlap with the sketch's
        // compute function names, stable by input order.
        std::set<std::string> wanted;
        if (sk) wanted = sketch::compute_names_used(*sk);
        for (const auto& word : util::tokenize_words(task_summary)) wanted.insert(word);
        std::vector<std::pair<int, const Document*>> scored;
        for (const auto& d : api) {
            int score = 0;
            for (const auto& t : d.tags) {
                if (wanted.count(t)) ++score;
            }
            scored.emplace_back(score, &d);
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (const auto& [score, d] : scored) ordered.push_back(d);
    }

    std::vector<Document> out;
    std::size_t used = 0;
    for (const Document* d : ordered) {
        const std::size_t sz = d->body.size() + d->title.size();
        if (used + sz > budget) continue;
        out.push_back(*d);
        used += sz;
    }
    return out;
}

}  // namespace kgen::knowledge
