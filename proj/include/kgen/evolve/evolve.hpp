#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgen/conductor/pipeline.hpp"

namespace kgen::evolve {

struct Member {
    core::KernelCandidate candidate;
    std::string sketch_text;
    double latency_us = 0.0;       // mean post-warm-up generated latency
    double latency_base_us = 0.0;  // matching reference baseline
};

struct Island {
    int id = 0;
    std::vector<Member> population;
    std::vector<Member> elite;  // best-first, at most elite_size, subset of population
};

struct EvolveConfig {
    int rounds = 3;              // R
    int parallel = 4;            // P candidates per island per round
    int islands = 2;             // K
    int migration_interval = 1;  // M: migrate when round % M == 0
    int elite_size = 2;          // E
    double plateau_delta = 0.01; // stop after 2 consecutive rounds below this
    std::optional<double> target_speedup;
    std::uint64_t seed = 0;
    int max_concurrency = 1;  // candidate generations in flight per round
};

struct MigrationEvent {
    int round = 0;
    int from = 0;
    int to = 0;
    std::vector<std::string> member_ids;
};

struct RoundReport {
    int round = 0;
    std::vector<double> best_latency_per_island;  // +inf when empty
    std::vector<std::size_t> population_sizes;
    std::vector<MigrationEvent> migrations;
    std::vector<std::string> analysis_plans;  // per island
};

struct EvolveResult {
    enum class Status { Succeeded, Failed };
    Status status = Status::Failed;
    std::optional<Member> best;  // global argmin latency
    std::vector<RoundReport> rounds;
    std::vector<Island> islands;  // final state
    std::string stop_reason;     // "rounds" | "target" | "plateau" | "no_valid_candidate"
};

/// Up to two members from the top latency quartile and up to two from the
/// bottom quartile of the population (seeded choice inside each stratum,
/// duplicates removed). Empty population gives an empty parent set.
std::vector<Member> stratified_sample(std::span<const Member> population, std::mt19937_64& rng);

/// Contrastive optimization plan between high- and low-performing members.
/// Provider-authored when available; the deterministic fallback diffs
/// constexpr defaults and hint sets of the best fast vs worst slow sketch.
/// With an empty stratum it returns a fixed bootstrap plan.
std::string comparative_analysis(std::span<const Member> top, std::span<const Member> bottom,
                                 agents::ChatProvider* provider);

/// Island-model search: per round and island, stratified parents feed a
/// comparative-analysis plan; P single-shot Designer->Coder->Verifier
/// generations add Pass candidates to the population; elites update; every
/// migration_interval rounds island k receives copies of island (k-1 mod K)'s
/// elites. Stops on target speedup, round budget, or a plateau (relative
/// best-latency improvement below plateau_delta for two consecutive rounds).
/// All Pass candidates are inserted into the kernel database when one is
/// wired into the deps.
EvolveResult run_evolve(const core::OperatorSpec& task, const EvolveConfig& cfg,
                        const conductor::PipelineConfig& pipeline_cfg,
                        const conductor::PipelineDeps& deps);

std::string round_reports_json(const EvolveResult& result, bool timestamps);

}  // namespace kgen::evolve
