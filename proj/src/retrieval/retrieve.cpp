#include "kgen/retrieval/retrieve.hpp"

#include <algorithm>
#include <sstream>

#include "kgen/sketch/parser.hpp"

namespace kgen::retrieval {

std::string extract_features(const core::OperatorSpec& task, agents::ChatProvider* provider) {
    if (task.name.empty()) throw std::invalid_argument("extract_features: empty task");

    if (provider) {
        agents::ChatRequest req;
        std::ostringstream prompt;
        prompt << "Summarize the computational features of this kernel task in one line: "
               << "operator type, computation logic, dtype, tensor rank.\n\n"
               << core::task_to_json(task);
        req.messages = {{"system", "You extract kernel task features for retrieval."},
                        {"user", prompt.str()}};
        return provider->complete(req).content;
    }

    std::ostringstream out;
    out << "op_type=" << core::category_name(task.category);
    out << " name=" << task.name;
    out << " dtype=" << sketch::dtype_name(task.dtype);
    std::size_t rank = 0;
    std::ostringstream symbols, computes;
    if (!task.reference_sketch.empty()) {
        try {
            auto sk = sketch::parse_sketch(task.reference_sketch);
            if (!sk.decls.tensors.empty()) rank = sk.decls.tensors.front().dims.size();
            bool first = true;
            for (const auto& s : sk.decls.symbols) {
                symbols << (first ? "" : ",") << s;
                first = false;
            }
            first = true;
            for (const auto& fn : sketch::compute_names_used(sk)) {
                computes << (first ? "" : ",") << fn;
                first = false;
            }
        } catch (const sketch::ParseError&) {
            // fall through with what the manifest alone provides
        }
    }
    if (rank == 0) rank = task.static_shapes.size();
    out << " rank=" << rank;
    if (!symbols.str().empty()) out << " symbols=" << symbols.str();
    if (!computes.str().empty()) out << " compute=" << computes.str();
    return out.str();
}

std::string shape_feature_text(const core::OperatorSpec& task) {
    std::vector<std::int64_t> dims;
    std::string dtype(sketch::dtype_name(task.dtype));
    if (!task.reference_sketch.empty()) {
        try {
            auto sk = sketch::parse_sketch(task.reference_sketch);
            if (!sk.decls.tensors.empty()) {
                const auto& t = sk.decls.tensors.front();
                dtype = sketch::dtype_name(t.dtype);
                std::map<std::string, double> env = task.constants;
                for (const auto& [k, v] : task.static_shapes) env[k] = static_cast<double>(v);
                for (const auto& d : t.dims) {
                    std::function<double(const sketch::Expr&)> ev =
                        [&](const sketch::Expr& e) -> double {
                        switch (e.kind) {
                            case sketch::Expr::Kind::IntLit:
                                return static_cast<double>(e.int_value);
                            case sketch::Expr::Kind::FloatLit:
                                return e.float_value;
                            case sketch::Expr::Kind::Ref: {
                                auto it = env.find(e.name);
                                return it == env.end() ? 0.0 : it->second;
                            }
                            case sketch::Expr::Kind::Add:
                                return ev(e.args[0]) + ev(e.args[1]);
                            case sketch::Expr::Kind::Sub:
                                return ev(e.args[0]) - ev(e.args[1]);
                            case sketch::Expr::Kind::Mul:
                                return ev(e.args[0]) * ev(e.args[1]);
                            case sketch::Expr::Kind::CeilDiv: {
                                const auto a = static_cast<std::int64_t>(ev(e.args[0]));
                                const auto b = static_cast<std::int64_t>(ev(e.args[1]));
                                return b > 0 ? static_cast<double>((a + b - 1) / b) : 0.0;
                            }
                        }
                        return 0.0;
                    };
                    dims.push_back(static_cast<std::int64_t>(ev(d)));
                }
            }
        } catch (const sketch::ParseError&) {
        }
    }
    if (dims.empty()) {
        for (const auto& [name, extent] : task.static_shapes) dims.push_back(extent);
    }
    std::ostringstream os;
    os << "rank=" << dims.size() << " dims=[";
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << "] dtype=" << dtype << " layout=row_major";
    return os.str();
}

RetrievalTrace retrieve_with_trace(const core::OperatorSpec& task, const KernelDatabase& db,
                                   std::string_view backend, std::string_view dsl, std::size_t k,
                                   const EmbeddingProvider& embedder,
                                   agents::ChatProvider* provider, double tau_sim) {
    if (k < 1) throw std::invalid_argument("retrieve: k must be at least 1");
    RetrievalTrace trace;
    trace.features = extract_features(task, provider);
    const auto query_logic = embedder.embed(trace.features);
    const auto query_shape = embedder.embed(shape_feature_text(task));

    // Stage 1: computation-logic semantic search.
    std::vector<ScoredRecord> stage1;
    for (auto& record : db.scan()) {
        const double score = cosine(query_logic, record.logic_embedding);
        if (score > tau_sim) {
            trace.stage1_ids.push_back(record.id);
            stage1.push_back({std::move(record), score, 0.0});
        }
    }

    // Stage 2: hard filtering on structural attributes.
    std::vector<ScoredRecord> stage2;
    for (auto& sr : stage1) {
        if (sr.record.dsl == dsl && sr.record.backend == backend) {
            trace.stage2_ids.push_back(sr.record.id);
            stage2.push_back(std::move(sr));
        }
    }

    // Stage 3: shape-compatibility ranking.
    for (auto& sr : stage2) {
        sr.shape_score = cosine(query_shape, sr.record.shape_embedding);
    }
    std::sort(stage2.begin(), stage2.end(), [](const ScoredRecord& a, const ScoredRecord& b) {
        if (a.shape_score != b.shape_score) return a.shape_score > b.shape_score;
        return a.record.id < b.record.id;
    });
    if (stage2.size() > k) stage2.resize(k);
    trace.ranked = std::move(stage2);
    return trace;
}

std::vector<ScoredRecord> retrieve(const core::OperatorSpec& task, const KernelDatabase& db,
                                   std::string_view backend, std::string_view dsl, std::size_t k,
                                   const EmbeddingProvider& embedder,
                                   agents::ChatProvider* provider, double tau_sim) {
    return retrieve_with_trace(task, db, backend, dsl, k, embedder, provider, tau_sim).ranked;
}

std::string render_record(const DbRecord& r) {
    std::ostringstream os;
    os << "id: " << r.id << "\nfeatures: " << r.features << "\nshape: " << r.shape_info << "\n";
    if (!r.sketch.empty()) os << "sketch:\n" << r.sketch << "\n";
    if (!r.code.empty()) os << "code:\n" << r.code << "\n";
    if (r.perf_latency_us) os << "latency_us: " << *r.perf_latency_us << "\n";
    return os.str();
}

}  // namespace kgen::retrieval
