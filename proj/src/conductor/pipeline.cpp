#include "kgen/conductor/pipeline.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "kgen/util/hash.hpp"
#include "kgen/util/text.hpp"

namespace kgen::conductor {

using nlohmann::json;

void ExecutionHistory::append(HistoryEntry entry) {
    if (!entries_.empty() && entry.iteration < entries_.back().iteration) {
        throw std::invalid_argument("history iterations must not decrease");
    }
    entries_.push_back(std::move(entry));
}

const HistoryEntry* ExecutionHistory::last_routing() const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->agent == "verifier") return &*it;
    }
    return nullptr;
}

std::string_view route_name(RouteDecision::Next n) {
    switch (n) {
        case RouteDecision::Next::Finish: return "finish";
        case RouteDecision::Next::Coder: return "coder";
        case RouteDecision::Next::Designer: return "designer";
    }
    return "finish";
}

namespace {

std::string first_lines(const std::string& text, std::size_t n) {
    auto lines = util::split_lines(text);
    std::ostringstream os;
    for (std::size_t i = 0; i < lines.size() && i < n; ++i) os << lines[i] << "\n";
    return os.str();
}

std::string templated_suggestion(const verify::VerifyReport& report, ErrorClass cls) {
    std::ostringstream os;
    switch (cls) {
        case ErrorClass::Syntax:
            os << "Fix the compilation errors without changing the algorithm. Compiler output:\n"
               << first_lines(report.diagnostics, 12);
            break;
        case ErrorClass::ApiMisuse:
            os << "The code calls an interface that does not exist or is misused. Match the API "
                  "reference exactly. Diagnostics:\n"
               << first_lines(report.diagnostics, 12);
            break;
        case ErrorClass::Runtime:
            os << "The kernel failed at runtime (" << core::status_name(report.status)
               << "). Check bounds, argument handling and termination. Log:\n"
               << first_lines(report.diagnostics, 12);
            break;
        case ErrorClass::Algorithm:
            os << "The computation is numerically wrong: violation_fraction="
               << report.violation_fraction << ", max_error=" << report.max_error
               << ". Revise the computation structure in the sketch; the implementation follows "
                  "it faithfully.\n"
               << first_lines(report.diagnostics, 8);
            break;
        case ErrorClass::MemoryPattern:
            os << "Memory access pattern violates buffer bounds. Restructure tiling and slice "
                  "extents in the sketch. Log:\n"
               << first_lines(report.diagnostics, 12);
            break;
    }
    return os.str();
}

std::string llm_suggestion(const verify::VerifyReport& report, const ExecutionHistory& history,
                           ErrorClass cls, agents::ChatProvider& provider) {
    std::ostringstream hist;
    for (const auto& e : history.entries()) {
        hist << "iteration " << e.iteration << " " << e.agent;
        if (e.report) hist << ": " << e.report->summary();
        if (!e.routing.empty()) hist << " -> " << e.routing;
        hist << "\n";
    }
    agents::ChatRequest req;
    req.messages = {
        {"system",
         "You are the Conductor of a kernel generation system. Given a verification failure, "
         "write a short, specific fix suggestion for the next agent."},
        {"user", "Error class: " + std::string(error_class_name(cls)) +
                     "\nVerification: " + report.summary() + "\nDiagnostics:\n" +
                     report.diagnostics + "\nHistory:\n" + hist.str()}};
    try {
        return provider.complete(req).content;
    } catch (const agents::ProviderError&) {
        return templated_suggestion(report, cls);
    }
}

}  // namespace

RouteDecision route(const verify::VerifyReport& report, const ExecutionHistory& history,
                    agents::ChatProvider* provider) {
    RouteDecision decision;
    if (report.status == core::VerifyStatus::Pass) {
        decision.next = RouteDecision::Next::Finish;
        decision.suggestion.clear();
        return decision;
    }

    const ErrorClass cls = classify_error(report, provider);
    decision.error_class = cls;
    const bool coder_class = cls == ErrorClass::Syntax || cls == ErrorClass::ApiMisuse ||
                             cls == ErrorClass::Runtime;
    decision.next = coder_class ? RouteDecision::Next::Coder : RouteDecision::Next::Designer;

    // Livelock guard: the same error class bouncing to the Coder twice in a
    // row escalates to the Designer.
    if (decision.next == RouteDecision::Next::Coder) {
        const HistoryEntry* prev = history.last_routing();
        if (prev && prev->routing == "coder" && prev->report &&
            classify_error(*prev->report, nullptr) == cls) {
            decision.next = RouteDecision::Next::Designer;
        }
    }

    decision.suggestion = provider ? llm_suggestion(report, history, cls, *provider)
                                   : templated_suggestion(report, cls);
    return decision;
}

PipelineResult run_pipeline(const core::OperatorSpec& task, const PipelineConfig& cfg,
                            const PipelineDeps& deps) {
    if (!deps.provider || !deps.backend) {
        throw std::invalid_argument("run_pipeline: provider and backend are required");
    }

    PipelineResult result;
    int agent_calls = 0;
    int iteration = 0;

    // Retrieved examples are fetched once per task.
    std::vector<std::string> retrieved;
    if (deps.db && deps.embedder) {
        for (const auto& sr : retrieval::retrieve(task, *deps.db, deps.backend->id(),
                                                  cfg.target_dsl, cfg.retrieval_k, *deps.embedder,
                                                  nullptr, cfg.retrieval_tau_sim)) {
            retrieved.push_back(retrieval::render_record(sr.record));
        }
    }

    const std::string task_text = core::task_to_json(task);
    auto seeds = verify::make_seeds(cfg.seed, cfg.seeds_per_verify);

    verify::VerifyOptions vopts = cfg.verify_opts;
    vopts.work_dir = cfg.work_dir;

    std::string designer_feedback;
    std::string coder_error_log;
    std::string coder_suggestion;
    agents::DesignResult designed;
    bool have_best = false;
    double best_violation = 2.0;

    auto digest = [](const std::string& s) { return util::digest_hex(s); };

    enum class Step { Designer, Coder } step = Step::Designer;
    while (true) {
        if (agent_calls >= cfg.max_iterations) break;

        if (step == Step::Designer) {
            agents::DesignRequest dreq;
            dreq.task_text = task_text;
            dreq.docs = deps.docs;
            dreq.retrieved_examples = retrieved;
            dreq.feedback = designer_feedback;
            dreq.temperature = cfg.designer_temperature;
            dreq.model = cfg.model;
            designed = agents::design(dreq, *deps.provider,
                                      cfg.known_fns.empty() ? sketch::core_compute_names()
                                                            : cfg.known_fns);
            ++agent_calls;
            HistoryEntry e;
            e.iteration = iteration + 1;
            e.agent = "designer";
            e.inputs_digest = digest(task_text + designer_feedback);
            e.outputs_digest = digest(designed.sketch_text);
            result.history.append(std::move(e));
            step = Step::Coder;
            coder_error_log.clear();
            coder_suggestion.clear();
            continue;
        }

        // Coder step.
        knowledge::ContextInputs ctx;
        ctx.task_text = task_text;
        ctx.sketch_text = designed.sketch_text;
        ctx.docs = deps.docs;
        ctx.retrieved_examples = retrieved;
        ctx.feedback = coder_suggestion;
        if (deps.docs && !deps.docs->api.empty()) {
            ctx.api_docs = knowledge::compress_api_docs(deps.docs->api, task.name, &designed.sk,
                                                        nullptr, cfg.api_budget);
        }
        agents::CodeRequest creq;
        creq.sketch_text = designed.sketch_text;
        creq.target_dsl = cfg.target_dsl;
        creq.context = knowledge::assemble_context(ctx, knowledge::Stage::Coder);
        creq.error_log = coder_error_log;
        creq.fix_suggestion = coder_suggestion;
        creq.temperature = cfg.coder_temperature;
        creq.model = cfg.model;
        auto coded = agents::code(creq, *deps.provider);
        ++agent_calls;
        ++iteration;

        HistoryEntry ce;
        ce.iteration = iteration;
        ce.agent = "coder";
        ce.inputs_digest = digest(designed.sketch_text + coder_error_log + coder_suggestion);
        ce.outputs_digest = digest(coded.kernel_source);
        result.history.append(std::move(ce));

        core::KernelCandidate candidate;
        candidate.id = task.name + "-it" + std::to_string(iteration);
        candidate.source = coded.kernel_source;
        candidate.dsl = cfg.target_dsl;
        candidate.backend_id = deps.backend->id();
        candidate.sketch_text = designed.sketch_text;

        auto report = verify::verify_kernel(candidate, task, *deps.backend, cfg.tol, seeds, vopts);
        candidate.status = report.status;
        candidate.latency_us = report.latency_gen_us;

        auto decision = route(report, result.history, cfg.llm_conductor ? deps.provider : nullptr);

        HistoryEntry ve;
        ve.iteration = iteration;
        ve.agent = "verifier";
        ve.inputs_digest = digest(candidate.source);
        ve.outputs_digest = digest(report.summary() + report.diagnostics);
        ve.report = report;
        ve.routing = std::string(route_name(decision.next));
        ve.suggestion = decision.suggestion;
        result.history.append(ve);

        // Track best-so-far for the Exhausted outcome.
        const double vf = report.status == core::VerifyStatus::Pass ? -1.0
                          : report.status == core::VerifyStatus::NumericFail
                              ? report.violation_fraction
                              : 1.5;
        if (!have_best || vf < best_violation) {
            have_best = true;
            best_violation = vf;
            result.candidate = candidate;
            result.report = report;
        }

        if (decision.next == RouteDecision::Next::Finish) {
            result.status = PipelineResult::Status::Finished;
            result.candidate = candidate;
            result.report = report;
            break;
        }
        if (decision.next == RouteDecision::Next::Coder) {
            coder_error_log = report.diagnostics.empty() ? report.summary() : report.diagnostics;
            coder_suggestion = decision.suggestion;
            step = Step::Coder;
        } else {
            designer_feedback = decision.suggestion;
            step = Step::Designer;
        }
    }

    result.iterations = iteration;
    if (!result.history.entries().empty()) {
        result.final_digest = result.history.entries().back().outputs_digest;
    }
    write_run_summary(cfg.work_dir / task.name / "run_summary.json", task, result, false);
    return result;
}

void write_run_summary(const std::filesystem::path& path, const core::OperatorSpec& task,
                       const PipelineResult& result, bool timestamps) {
    json j;
    j["task"] = task.name;
    j["status"] = result.status == PipelineResult::Status::Finished ? "finished" : "exhausted";
    j["iterations"] = result.iterations;
    j["final_status"] = std::string(core::status_name(result.report.status));
    j["violation_fraction"] = result.report.violation_fraction;
    j["latency_gen_us"] = result.report.mean_latency_gen();
    j["latency_base_us"] = result.report.mean_latency_base();
    j["candidate_id"] = result.candidate.id;
    j["final_digest"] = result.final_digest;
    j["history_length"] = result.history.entries().size();
    if (timestamps) {
        j["written_at_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();
    }
    util::write_file(path, j.dump(2) + "\n");
}

}  // namespace kgen::conductor
