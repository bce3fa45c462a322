#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kgen/conductor/pipeline.hpp"
#include "kgen/verify/interp_backend.hpp"
#include "support/fixtures.hpp"
#include "support/tmpdir.hpp"

using namespace kgen::conductor;
using kgen::agents::ScriptedProvider;
using kgen::core::OperatorSpec;
using kgen::core::VerifyStatus;
using kgen::verify::VerifyReport;
namespace ts = kgen::testsupport;

namespace {

VerifyReport report_of(VerifyStatus status, const std::string& diagnostics,
                       double violation = 0.0) {
    VerifyReport r;
    r.status = status;
    r.diagnostics = diagnostics;
    r.violation_fraction = violation;
    return r;
}

std::string fenced(const std::string& tag, const std::string& body) {
    return "```" + tag + "\n" + body + (body.back() == '\n' ? "" : "\n") + "```\n";
}

OperatorSpec copy_task() {
    OperatorSpec task;
    task.name = "identity_copy";
    task.category = kgen::core::OpCategory::Elementwise;
    task.reference_sketch = ts::kIdentitySketch;
    task.static_shapes = {{"N", 12}};
    return task;
}

// A sketch that parses and validates but computes the wrong function
// (doubles the input instead of copying it).
const char* kWrongAlgorithmSketch = R"(sketch identity_copy {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32;
  constexpr:;

  v = alloc([N])
  load(X[0:N] -> v)
  add(v, v, v)
  store(v -> Y[0:N])
}
)";

// A sketch with a syntax error (unterminated header).
const char* kBrokenSketch = "sketch broken {\n  symbols: N\n";

PipelineConfig test_config(const std::filesystem::path& work) {
    PipelineConfig cfg;
    cfg.work_dir = work;
    cfg.verify_opts.warmup = 1;
    cfg.verify_opts.reps = 2;
    cfg.seeds_per_verify = 2;
    return cfg;
}

}  // namespace

TEST_CASE("classification rule table") {
    CHECK(classify_error(report_of(VerifyStatus::CompileFail,
                                   "kernel.c:3: implicit declaration of function 'reduce_sum'")) ==
          ErrorClass::ApiMisuse);
    CHECK(classify_error(report_of(VerifyStatus::CompileFail,
                                   "kernel.c:9: error: expected ';' before '}'")) ==
          ErrorClass::Syntax);
    CHECK(classify_error(report_of(VerifyStatus::NumericFail, "", 0.9)) == ErrorClass::Algorithm);
    CHECK(classify_error(report_of(VerifyStatus::RuntimeFail,
                                   "ERROR: AddressSanitizer: heap-buffer-overflow on address")) ==
          ErrorClass::MemoryPattern);
    CHECK(classify_error(report_of(VerifyStatus::RuntimeFail, "kernel exited with status 3")) ==
          ErrorClass::Runtime);
    CHECK(classify_error(report_of(VerifyStatus::Timeout, "kernel timed out after 300 ms")) ==
          ErrorClass::Runtime);
    CHECK_THROWS_AS(classify_error(report_of(VerifyStatus::Pass, "")), std::invalid_argument);
}

TEST_CASE("provider override stays within the runtime/algorithm/memory triple") {
    ScriptedProvider provider;
    provider.push_reply("This is really a memory_pattern problem.");
    auto cls = classify_error(report_of(VerifyStatus::RuntimeFail, "segfault"), &provider);
    CHECK(cls == ErrorClass::MemoryPattern);

    // Syntax is never second-guessed; no provider call happens.
    ScriptedProvider untouched;
    auto syntax =
        classify_error(report_of(VerifyStatus::CompileFail, "error: expected ';'"), &untouched);
    CHECK(syntax == ErrorClass::Syntax);
    CHECK(untouched.calls() == 0);
}

TEST_CASE("routing follows the case table") {
    ExecutionHistory history;
    SUBCASE("pass finishes with an empty suggestion") {
        auto d = route(report_of(VerifyStatus::Pass, ""), history);
        CHECK(d.next == RouteDecision::Next::Finish);
        CHECK(d.suggestion.empty());
    }
    SUBCASE("syntax goes to the coder with the compiler message") {
        auto d = route(report_of(VerifyStatus::CompileFail, "error: expected ';' before '}'"),
                       history);
        CHECK(d.next == RouteDecision::Next::Coder);
        CHECK(d.suggestion.find("expected ';'") != std::string::npos);
    }
    SUBCASE("algorithm goes to the designer with the violation fraction") {
        auto d = route(report_of(VerifyStatus::NumericFail, "", 0.75), history);
        CHECK(d.next == RouteDecision::Next::Designer);
        CHECK(d.suggestion.find("0.75") != std::string::npos);
    }
}

TEST_CASE("repeated identical coder-bound classes escalate to the designer") {
    ExecutionHistory history;
    HistoryEntry prev;
    prev.iteration = 1;
    prev.agent = "verifier";
    prev.report = report_of(VerifyStatus::CompileFail, "error: expected ';'");
    prev.routing = "coder";
    history.append(prev);
    auto d = route(report_of(VerifyStatus::CompileFail, "error: expected ')'"), history);
    CHECK(d.next == RouteDecision::Next::Designer);
}

TEST_CASE("history enforces non-decreasing iterations") {
    ExecutionHistory history;
    HistoryEntry a;
    a.iteration = 2;
    history.append(a);
    HistoryEntry b;
    b.iteration = 1;
    CHECK_THROWS_AS(history.append(b), std::invalid_argument);
}

TEST_CASE("pipeline: clean one-shot success") {
    ts::ScopedTempDir work;
    ScriptedProvider provider;
    provider.push_reply(fenced("usk", ts::kIdentitySketch));  // designer
    provider.push_reply(fenced("usk", ts::kIdentitySketch));  // coder (sketch target)

    kgen::verify::InterpBackend backend;
    PipelineDeps deps;
    deps.provider = &provider;
    deps.backend = &backend;

    auto result = run_pipeline(copy_task(), test_config(work.path()), deps);
    CHECK(result.status == PipelineResult::Status::Finished);
    CHECK(result.iterations == 1);
    REQUIRE(result.history.entries().size() == 3);  // designer, coder, verifier
    CHECK(result.history.entries()[0].agent == "designer");
    CHECK(result.history.entries()[1].agent == "coder");
    CHECK(result.history.entries()[2].agent == "verifier");
    CHECK(result.history.entries()[2].routing == "finish");
    CHECK(result.final_digest == result.history.entries().back().outputs_digest);
    CHECK(std::filesystem::exists(work.path() / "identity_copy" / "run_summary.json"));
}

TEST_CASE("pipeline: compile error routes to the coder once, then finishes") {
    ts::ScopedTempDir work;
    ScriptedProvider provider;
    provider.push_reply(fenced("usk", ts::kIdentitySketch));  // designer
    provider.push_reply(fenced("usk", kBrokenSketch));        // coder: broken
    provider.push_reply(fenced("usk", ts::kIdentitySketch));  // coder: fixed

    kgen::verify::InterpBackend backend;
    PipelineDeps deps;
    deps.provider = &provider;
    deps.backend = &backend;

    auto result = run_pipeline(copy_task(), test_config(work.path()), deps);
    CHECK(result.status == PipelineResult::Status::Finished);
    CHECK(result.iterations == 2);
    int coder_routes = 0;
    for (const auto& e : result.history.entries()) {
        if (e.agent == "verifier" && e.routing == "coder") ++coder_routes;
    }
    CHECK(coder_routes == 1);
    // The second coder prompt carried the failure log.
    const auto transcript = provider.transcript();
    REQUIRE(transcript.size() == 3);
    CHECK(transcript[2].first.messages[1].content.find("## Previous failure") !=
          std::string::npos);
}

TEST_CASE("pipeline: wrong algorithm routes to the designer once") {
    ts::ScopedTempDir work;
    ScriptedProvider provider;
    provider.push_reply(fenced("usk", kWrongAlgorithmSketch));  // designer: bad plan
    provider.push_reply(fenced("usk", kWrongAlgorithmSketch));  // coder echoes it
    provider.push_reply(fenced("usk", ts::kIdentitySketch));    // designer: revised
    provider.push_reply(fenced("usk", ts::kIdentitySketch));    // coder echoes

    kgen::verify::InterpBackend backend;
    PipelineDeps deps;
    deps.provider = &provider;
    deps.backend = &backend;

    auto result = run_pipeline(copy_task(), test_config(work.path()), deps);
    CHECK(result.status == PipelineResult::Status::Finished);
    int designer_routes = 0;
    for (const auto& e : result.history.entries()) {
        if (e.agent == "verifier" && e.routing == "designer") ++designer_routes;
    }
    CHECK(designer_routes == 1);
    CHECK(result.iterations == 2);
}

TEST_CASE("pipeline: iteration budget caps the loop with best-so-far attached") {
    ts::ScopedTempDir work;
    ScriptedProvider provider;
    // Designer keeps proposing the wrong algorithm; budget runs out.
    for (int i = 0; i < 4; ++i) provider.push_reply(fenced("usk", kWrongAlgorithmSketch));

    kgen::verify::InterpBackend backend;
    PipelineDeps deps;
    deps.provider = &provider;
    deps.backend = &backend;

    auto cfg = test_config(work.path());
    cfg.max_iterations = 4;  // designer, coder, designer, coder
    auto result = run_pipeline(copy_task(), cfg, deps);
    CHECK(result.status == PipelineResult::Status::Exhausted);
    CHECK(result.report.status == VerifyStatus::NumericFail);
    CHECK(result.report.violation_fraction > 0.9);
    CHECK(result.iterations == 2);
}
