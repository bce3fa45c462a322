#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgen/agents/coder.hpp"
#include "kgen/agents/designer.hpp"
#include "kgen/conductor/classify.hpp"
#include "kgen/core/candidate.hpp"
#include "kgen/core/task.hpp"
#include "kgen/knowledge/docset.hpp"
#include "kgen/retrieval/database.hpp"
#include "kgen/retrieval/retrieve.hpp"
#include "kgen/verify/verify.hpp"

namespace kgen::conductor {

struct HistoryEntry {
    int iteration = 0;           // verify cycle index, 1-based
    std::string agent;           // "designer" | "coder" | "verifier"
    std::string inputs_digest;
    std::string outputs_digest;
    std::optional<verify::VerifyReport> report;  // verifier entries
    std::string routing;         // "finish" | "coder" | "designer" | ""
    std::string suggestion;
};

/// Append-only history with strictly increasing iteration numbers.
class ExecutionHistory {
public:
    void append(HistoryEntry entry);
    const std::vector<HistoryEntry>& entries() const { return entries_; }
    const HistoryEntry* last_routing() const;  // most recent verifier entry

private:
    std::vector<HistoryEntry> entries_;
};

struct RouteDecision {
    enum class Next { Finish, Coder, Designer };
    Next next = Next::Finish;
    ErrorClass error_class = ErrorClass::Runtime;  // meaningful when next != Finish
    std::string suggestion;
};

std::string_view route_name(RouteDecision::Next n);

/// The routing table: Pass finishes; {Syntax, ApiMisuse, Runtime} return to
/// the Coder, {Algorithm, MemoryPattern} escalate to the Designer. The
/// suggestion is provider-authored when one is given, else a templated
/// summary of the diagnostics. A class that already bounced back to the
/// Coder in the previous iteration escalates to the Designer instead.
RouteDecision route(const verify::VerifyReport& report, const ExecutionHistory& history,
                    agents::ChatProvider* provider = nullptr);

struct PipelineConfig {
    int max_iterations = 6;  // designer + coder invocations, combined
    std::string target_dsl = "sketch";
    verify::Tolerance tol;
    verify::VerifyOptions verify_opts;
    std::filesystem::path work_dir = "work";
    std::set<std::string> known_fns;  // compute library names for validation
    std::uint64_t seed = 0;
    int seeds_per_verify = 5;
    double designer_temperature = 0.0;
    double coder_temperature = 0.0;
    std::string model;
    /// Let the provider author fix suggestions and refine error classes.
    /// With ordered scripted replies this consumes queue entries, so
    /// fixture-driven runs usually turn it off.
    bool llm_conductor = false;
    std::size_t retrieval_k = 2;
    double retrieval_tau_sim = 0.3;
    std::size_t api_budget = 8192;
};

struct PipelineDeps {
    agents::ChatProvider* provider = nullptr;
    verify::BackendAdapter* backend = nullptr;
    const knowledge::DocSet* docs = nullptr;
    retrieval::KernelDatabase* db = nullptr;                 // optional
    const retrieval::EmbeddingProvider* embedder = nullptr;  // required with db
};

struct PipelineResult {
    enum class Status { Finished, Exhausted };
    Status status = Status::Exhausted;
    core::KernelCandidate candidate;  // final (or best-so-far) candidate
    verify::VerifyReport report;      // matching report
    ExecutionHistory history;
    int iterations = 0;
    std::string final_digest;  // digest of the last history entry's outputs
};

/// The closed loop: Designer -> Coder -> Verifier with conductor routing
/// until Finish or the iteration budget is spent. Artifacts persist under
/// the work directory; a machine-readable run summary lands at
/// work/<task>/run_summary.json.
PipelineResult run_pipeline(const core::OperatorSpec& task, const PipelineConfig& cfg,
                            const PipelineDeps& deps);

void write_run_summary(const std::filesystem::path& path, const core::OperatorSpec& task,
                       const PipelineResult& result, bool timestamps);

}  // namespace kgen::conductor
