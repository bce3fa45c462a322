#include "kgen/evolve/evolve.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kgen/sketch/parser.hpp"
#include "kgen/sketch/printer.hpp"
#include "kgen/util/hash.hpp"

namespace kgen::evolve {

using nlohmann::json;

namespace {

std::vector<Member> sorted_by_latency(std::span<const Member> population) {
    std::vector<Member> sorted(population.begin(), population.end());
    std::sort(sorted.begin(), sorted.end(), [](const Member& a, const Member& b) {
        if (a.latency_us != b.latency_us) return a.latency_us < b.latency_us;
        return a.candidate.id < b.candidate.id;
    });
    return sorted;
}

void push_unique(std::vector<Member>& out, const Member& m) {
    for (const auto& existing : out) {
        if (existing.candidate.id == m.candidate.id) return;
    }
    out.push_back(m);
}

std::vector<Member> pick_up_to(std::span<const Member> stratum, std::size_t want,
                               std::mt19937_64& rng) {
    std::vector<Member> out;
    if (stratum.size() <= want) {
        out.assign(stratum.begin(), stratum.end());
        return out;
    }
    std::vector<std::size_t> idx(stratum.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t pick = 0; pick < want; ++pick) {
        std::uniform_int_distribution<std::size_t> dist(pick, idx.size() - 1);
        std::swap(idx[pick], idx[dist(rng)]);
        out.push_back(stratum[idx[pick]]);
    }
    return out;
}

}  // namespace

std::vector<Member> stratified_sample(std::span<const Member> population, std::mt19937_64& rng) {
    if (population.empty()) return {};
    const auto sorted = sorted_by_latency(population);
    const std::size_t quartile = std::max<std::size_t>(1, sorted.size() / 4);

    std::span<const Member> top(sorted.data(), quartile);
    std::span<const Member> bottom(sorted.data() + (sorted.size() - quartile), quartile);

    std::vector<Member> parents;
    for (const auto& m : pick_up_to(top, 2, rng)) push_unique(parents, m);
    for (const auto& m : pick_up_to(bottom, 2, rng)) push_unique(parents, m);
    return parents;
}

namespace {

struct SketchSummary {
    std::map<std::string, std::optional<long long>> constexpr_defaults;
    std::multiset<std::string> hints;
    int loops = 0;
};

void summarize_body(const std::vector<sketch::Stmt>& body, SketchSummary& out) {
    for (const auto& st : body) {
        for (const auto& t : st.hints.tags) out.hints.insert(t);
        if (st.kind == sketch::Stmt::Kind::ForLoop) {
            ++out.loops;
            summarize_body(st.body, out);
        }
    }
}

std::optional<SketchSummary> summarize(const std::string& sketch_text) {
    try {
        auto sk = sketch::parse_sketch(sketch_text);
        SketchSummary s;
        for (const auto& c : sk.decls.constexprs) s.constexpr_defaults[c.name] = c.default_value;
        summarize_body(sk.body, s);
        return s;
    } catch (const sketch::ParseError&) {
        return std::nullopt;
    }
}

}  // namespace

std::string comparative_analysis(std::span<const Member> top, std::span<const Member> bottom,
                                 agents::ChatProvider* provider) {
    if (top.empty() || bottom.empty()) {
        return "Bootstrap round: no performance contrast available yet. Explore distinct "
               "parallelization splits, tile sizes and memory hints across candidates.";
    }

    if (provider) {
        std::ostringstream prompt;
        prompt << "Compare these kernel design sketches and name the optimization choices that "
                  "separate the fast ones from the slow ones, then give a plan for the next "
                  "round.\n\nFast (latency_us ascending):\n";
        for (const auto& m : top) {
            prompt << "latency_us=" << m.latency_us << "\n" << m.sketch_text << "\n";
        }
        prompt << "\nSlow:\n";
        for (const auto& m : bottom) {
            prompt << "latency_us=" << m.latency_us << "\n" << m.sketch_text << "\n";
        }
        agents::ChatRequest req;
        req.messages = {{"system", "You analyze kernel performance experiments."},
                        {"user", prompt.str()}};
        return provider->complete(req).content;
    }

    // Deterministic fallback: structured diff of the best fast sketch vs the
    // worst slow sketch.
    const Member& fast = top.front();
    const Member& slow = bottom.back();
    auto fast_sum = summarize(fast.sketch_text);
    auto slow_sum = summarize(slow.sketch_text);
    std::ostringstream plan;
    plan << "Contrast of fastest (latency_us=" << fast.latency_us
         << ") vs slowest (latency_us=" << slow.latency_us << "):\n";
    if (fast_sum && slow_sum) {
        for (const auto& [name, fval] : fast_sum->constexpr_defaults) {
            auto it = slow_sum->constexpr_defaults.find(name);
            if (it != slow_sum->constexpr_defaults.end() && it->second != fval) {
                plan << "- constexpr " << name << ": fast=";
                fval ? plan << *fval : plan << "unbound";
                plan << " slow=";
                it->second ? plan << *it->second : plan << "unbound";
                plan << "\n";
            }
        }
        std::set<std::string> fast_only, slow_only;
        for (const auto& h : fast_sum->hints) {
            if (!slow_sum->hints.count(h)) fast_only.insert(h);
        }
        for (const auto& h : slow_sum->hints) {
            if (!fast_sum->hints.count(h)) slow_only.insert(h);
        }
        for (const auto& h : fast_only) plan << "- hint only in fast: " << h << "\n";
        for (const auto& h : slow_only) plan << "- hint only in slow: " << h << "\n";
        if (fast_sum->loops != slow_sum->loops) {
            plan << "- loop count: fast=" << fast_sum->loops << " slow=" << slow_sum->loops << "\n";
        }
    }
    plan << "Carry the fast configuration forward and vary it further.";
    return plan.str();
}

namespace {

struct GenerationOutcome {
    bool valid = false;
    Member member;
};

GenerationOutcome generate_candidate(const core::OperatorSpec& task,
                                     const conductor::PipelineConfig& cfg,
                                     const conductor::PipelineDeps& deps,
                                     const std::string& inspiration, const std::string& id) {
    GenerationOutcome outcome;
    try {
        agents::DesignRequest dreq;
        dreq.task_text = core::task_to_json(task);
        dreq.docs = deps.docs;
        dreq.inspiration = inspiration;
        dreq.temperature = cfg.designer_temperature;
        dreq.model = cfg.model;
        auto designed = agents::design(dreq, *deps.provider,
                                       cfg.known_fns.empty() ? sketch::core_compute_names()
                                                             : cfg.known_fns);

        knowledge::ContextInputs ctx;
        ctx.task_text = dreq.task_text;
        ctx.sketch_text = designed.sketch_text;
        ctx.docs = deps.docs;
        agents::CodeRequest creq;
        creq.sketch_text = designed.sketch_text;
        creq.target_dsl = cfg.target_dsl;
        creq.context = knowledge::assemble_context(ctx, knowledge::Stage::Coder);
        creq.temperature = cfg.coder_temperature;
        creq.model = cfg.model;
        auto coded = agents::code(creq, *deps.provider);

        core::KernelCandidate candidate;
        candidate.id = id;
        candidate.source = coded.kernel_source;
        candidate.dsl = cfg.target_dsl;
        candidate.backend_id = deps.backend->id();
        candidate.sketch_text = designed.sketch_text;

        auto seeds = verify::make_seeds(cfg.seed, cfg.seeds_per_verify);
        verify::VerifyOptions vopts = cfg.verify_opts;
        vopts.work_dir = cfg.work_dir;
        auto report = verify::verify_kernel(candidate, task, *deps.backend, cfg.tol, seeds, vopts);
        candidate.status = report.status;
        candidate.latency_us = report.latency_gen_us;
        if (report.status == core::VerifyStatus::Pass && !report.latency_gen_us.empty()) {
            outcome.valid = true;
            Member m;
            m.candidate = std::move(candidate);
            m.sketch_text = designed.sketch_text;
            m.latency_us = report.mean_latency_gen();
            m.latency_base_us = report.mean_latency_base();
            outcome.member = std::move(m);
        }
    } catch (const agents::AgentError&) {
        // invalid generation; the round simply gets one fewer candidate
    } catch (const agents::ProviderError&) {
    }
    return outcome;
}

void update_elite(Island& island, int elite_size) {
    auto sorted = sorted_by_latency(island.population);
    if (static_cast<int>(sorted.size()) > elite_size) {
        sorted.resize(static_cast<std::size_t>(elite_size));
    }
    island.elite = std::move(sorted);
}

double best_latency(const Island& island) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : island.population) best = std::min(best, m.latency_us);
    return best;
}

}  // namespace

EvolveResult run_evolve(const core::OperatorSpec& task, const EvolveConfig& cfg,
                        const conductor::PipelineConfig& pipeline_cfg,
                        const conductor::PipelineDeps& deps) {
    if (!deps.provider || !deps.backend) {
        throw std::invalid_argument("run_evolve: provider and backend are required");
    }
    if (cfg.rounds < 1 || cfg.parallel < 1 || cfg.islands < 1 || cfg.migration_interval < 1 ||
        cfg.elite_size < 1 || cfg.plateau_delta <= 0.0) {
        throw std::invalid_argument("run_evolve: config values must be positive");
    }

    EvolveResult result;
    result.islands.resize(static_cast<std::size_t>(cfg.islands));
    for (int k = 0; k < cfg.islands; ++k) result.islands[static_cast<std::size_t>(k)].id = k;

    double global_best = std::numeric_limits<double>::infinity();
    int plateau_rounds = 0;
    result.stop_reason = "rounds";

    for (int round = 1; round <= cfg.rounds; ++round) {
        RoundReport rr;
        rr.round = round;

        for (int k = 0; k < cfg.islands; ++k) {
            Island& island = result.islands[static_cast<std::size_t>(k)];
            std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL +
                                static_cast<std::uint64_t>(round) * 1000003ULL +
                                static_cast<std::uint64_t>(k));

            auto parents = stratified_sample(island.population, rng);
            // Split parents back into strata for the contrastive analysis.
            std::vector<Member> top_stratum, bottom_stratum;
            if (!parents.empty()) {
                auto sorted = sorted_by_latency(island.population);
                const double median = sorted[sorted.size() / 2].latency_us;
                for (const auto& p : parents) {
                    (p.latency_us <= median ? top_stratum : bottom_stratum).push_back(p);
                }
            }
            std::string plan = comparative_analysis(top_stratum, bottom_stratum, deps.provider);
            rr.analysis_plans.push_back(plan);

            std::string inspiration = plan;
            if (!island.elite.empty()) {
                inspiration += "\n\nBest implementation so far (latency_us=" +
                               std::to_string(island.elite.front().latency_us) + "):\n" +
                               island.elite.front().sketch_text;
            }

            auto make_id = [&](int p) {
                return task.name + "-r" + std::to_string(round) + "-i" + std::to_string(k) + "-p" +
                       std::to_string(p);
            };

            std::vector<GenerationOutcome> outcomes(static_cast<std::size_t>(cfg.parallel));
            if (cfg.max_concurrency > 1) {
                std::vector<std::future<GenerationOutcome>> futures;
                for (int p = 0; p < cfg.parallel; ++p) {
                    futures.push_back(std::async(std::launch::async, [&, p] {
                        return generate_candidate(task, pipeline_cfg, deps, inspiration,
                                                  make_id(p + 1));
                    }));
                }
                for (int p = 0; p < cfg.parallel; ++p) {
                    outcomes[static_cast<std::size_t>(p)] = futures[static_cast<std::size_t>(p)].get();
                }
            } else {
                for (int p = 0; p < cfg.parallel; ++p) {
                    outcomes[static_cast<std::size_t>(p)] =
                        generate_candidate(task, pipeline_cfg, deps, inspiration, make_id(p + 1));
                }
            }
            for (auto& o : outcomes) {
                if (o.valid) push_unique(island.population, o.member);
            }
            update_elite(island, cfg.elite_size);
        }

        // Migration: a directed ring, island k-1 -> k, copying elites.
        if (round % cfg.migration_interval == 0 && cfg.islands > 1) {
            std::vector<std::vector<Member>> snapshots;
            snapshots.reserve(result.islands.size());
            for (const auto& island : result.islands) snapshots.push_back(island.elite);
            for (int k = 0; k < cfg.islands; ++k) {
                const int from = (k - 1 + cfg.islands) % cfg.islands;
                MigrationEvent ev;
                ev.round = round;
                ev.from = from;
                ev.to = k;
                for (const auto& m : snapshots[static_cast<std::size_t>(from)]) {
                    const std::size_t before = result.islands[static_cast<std::size_t>(k)]
                                                   .population.size();
                    push_unique(result.islands[static_cast<std::size_t>(k)].population, m);
                    if (result.islands[static_cast<std::size_t>(k)].population.size() > before) {
                        ev.member_ids.push_back(m.candidate.id);
                    }
                }
                if (!ev.member_ids.empty()) rr.migrations.push_back(std::move(ev));
                update_elite(result.islands[static_cast<std::size_t>(k)], cfg.elite_size);
            }
        }

        double round_best = std::numeric_limits<double>::infinity();
        double round_best_base = 0.0;
        for (const auto& island : result.islands) {
            rr.best_latency_per_island.push_back(best_latency(island));
            rr.population_sizes.push_back(island.population.size());
            for (const auto& m : island.population) {
                if (m.latency_us < round_best) {
                    round_best = m.latency_us;
                    round_best_base = m.latency_base_us;
                }
            }
        }
        result.rounds.push_back(std::move(rr));

        if (std::isfinite(round_best)) {
            if (std::isfinite(global_best) && global_best > 0.0) {
                const double improvement = (global_best - round_best) / global_best;
                plateau_rounds = improvement < cfg.plateau_delta ? plateau_rounds + 1 : 0;
            }
            global_best = std::min(global_best, round_best);

            if (cfg.target_speedup && round_best > 0.0 && round_best_base > 0.0 &&
                round_best_base / round_best >= *cfg.target_speedup) {
                result.stop_reason = "target";
                break;
            }
        }
        if (plateau_rounds >= 2) {
            result.stop_reason = "plateau";
            break;
        }
    }

    // Global argmin across islands.
    for (const auto& island : result.islands) {
        for (const auto& m : island.population) {
            if (!result.best || m.latency_us < result.best->latency_us ||
                (m.latency_us == result.best->latency_us &&
                 m.candidate.id < result.best->candidate.id)) {
                result.best = m;
            }
        }
    }
    result.status = result.best ? EvolveResult::Status::Succeeded : EvolveResult::Status::Failed;
    if (!result.best) result.stop_reason = "no_valid_candidate";

    // Successful implementations accumulate in the database.
    if (deps.db && deps.embedder && result.best) {
        const std::string features = retrieval::extract_features(task, nullptr);
        const std::string shape_text = retrieval::shape_feature_text(task);
        for (const auto& island : result.islands) {
            for (const auto& m : island.population) {
                retrieval::DbRecord rec;
                rec.id = m.candidate.id;
                rec.features = features;
                rec.logic_embedding = deps.embedder->embed(features);
                rec.shape_embedding = deps.embedder->embed(shape_text);
                rec.dsl = m.candidate.dsl;
                rec.backend = m.candidate.backend_id;
                rec.op_type = std::string(core::category_name(task.category));
                rec.shape_info = shape_text;
                rec.code = m.candidate.source;
                rec.sketch = m.sketch_text;
                rec.perf_latency_us = m.latency_us;
                deps.db->insert(rec);
            }
        }
    }
    return result;
}

std::string round_reports_json(const EvolveResult& result, bool timestamps) {
    json j;
    j["status"] = result.status == EvolveResult::Status::Succeeded ? "succeeded" : "failed";
    j["stop_reason"] = result.stop_reason;
    if (result.best) {
        j["best"] = {{"id", result.best->candidate.id},
                     {"latency_us", result.best->latency_us},
                     {"dsl", result.best->candidate.dsl}};
    }
    j["rounds"] = json::array();
    for (const auto& r : result.rounds) {
        json jr;
        jr["round"] = r.round;
        jr["best_latency_per_island"] = json::array();
        for (double v : r.best_latency_per_island) {
            jr["best_latency_per_island"].push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
        jr["population_sizes"] = r.population_sizes;
        jr["migrations"] = json::array();
        for (const auto& m : r.migrations) {
            jr["migrations"].push_back(
                {{"round", m.round}, {"from", m.from}, {"to", m.to}, {"members", m.member_ids}});
        }
        j["rounds"].push_back(std::move(jr));
    }
    if (timestamps) {
        j["written_at_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();
    }
    return j.dump(2) + "\n";
}

}  // namespace kgen::evolve
