#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kgen/agents/provider.hpp"
#include "kgen/core/task.hpp"
#include "kgen/retrieval/database.hpp"
#include "kgen/retrieval/embedding.hpp"

namespace kgen::retrieval {

/// Structured task feature summary used for the logic embedding. With a
/// provider, the reply text is used verbatim; the deterministic fallback is
/// built from the task manifest (category, name, dtype, rank, symbols and
/// the compute functions of the reference sketch).
std::string extract_features(const core::OperatorSpec& task, agents::ChatProvider* provider);

/// Canonical shape feature text: "rank=R dims=[...] dtype=T layout=row_major"
/// from the first declared tensor at the task's static shapes.
std::string shape_feature_text(const core::OperatorSpec& task);

struct ScoredRecord {
    DbRecord record;
    double logic_score = 0.0;
    double shape_score = 0.0;
};

struct RetrievalTrace {
    std::string features;
    std::vector<std::string> stage1_ids;  // cosine(logic) > tau_sim
    std::vector<std::string> stage2_ids;  // + dsl/backend hard filter
    std::vector<ScoredRecord> ranked;     // top-k by shape cosine, ties by id
};

/// Three-stage retrieval: semantic search on computation-logic embeddings
/// (strict cosine threshold), hard filtering on dsl and backend, and shape
/// ranking. The result never contains a record whose dsl or backend differs
/// from the query, and enlarging k preserves the relative order of earlier
/// results.
RetrievalTrace retrieve_with_trace(const core::OperatorSpec& task, const KernelDatabase& db,
                                   std::string_view backend, std::string_view dsl, std::size_t k,
                                   const EmbeddingProvider& embedder,
                                   agents::ChatProvider* provider = nullptr,
                                   double tau_sim = 0.3);

std::vector<ScoredRecord> retrieve(const core::OperatorSpec& task, const KernelDatabase& db,
                                   std::string_view backend, std::string_view dsl, std::size_t k,
                                   const EmbeddingProvider& embedder,
                                   agents::ChatProvider* provider = nullptr,
                                   double tau_sim = 0.3);

/// Rendering used when retrieved records are put into prompt context.
std::string render_record(const DbRecord& r);

}  // namespace kgen::retrieval
