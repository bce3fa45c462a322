#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "kgen/core/task.hpp"
#include "kgen/util/text.hpp"
#include "kgen/verify/c_cpu_backend.hpp"
#include "kgen/verify/interp_backend.hpp"
#include "kgen/verify/verify.hpp"
#include "support/fixtures.hpp"
#include "support/tmpdir.hpp"

using namespace kgen::verify;
using kgen::core::KernelCandidate;
using kgen::core::OperatorSpec;
using kgen::core::VerifyStatus;
namespace ts = kgen::testsupport;

namespace {

const char* kVecAddSketch = R"(sketch vec_add {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32; Z[N]: f32;
  constexpr:;

  a = alloc([N])
  b = alloc([N])
  c = alloc([N], llm_hint=["output_buffer"])
  load(X[0:N] -> a)
  load(Y[0:N] -> b)
  add(a, b, c)
  store(c -> Z[0:N])
}
)";

OperatorSpec vec_add_task() {
    OperatorSpec task;
    task.name = "vec_add";
    task.category = kgen::core::OpCategory::Elementwise;
    task.reference_sketch = kVecAddSketch;
    task.static_shapes = {{"N", 32}};
    task.dynamic_ranges = {{"N", {4, 64}}};
    return task;
}

std::string fixture(const char* name) {
    return kgen::util::read_file(std::filesystem::path(KGEN_TEST_FIXTURES) / name);
}

VerifyOptions fast_opts(const std::filesystem::path& work) {
    VerifyOptions opts;
    opts.warmup = 1;
    opts.reps = 3;
    opts.work_dir = work;
    return opts;
}

}  // namespace

TEST_CASE("io derivation splits loads from stores") {
    ReferenceEvaluator ref(vec_add_task());
    CHECK(ref.io().inputs == std::vector<std::string>{"X", "Y"});
    CHECK(ref.io().outputs == std::vector<std::string>{"Z"});
}

TEST_CASE("instantiations are seed-stable") {
    auto task = vec_add_task();
    auto seeds = make_seeds(42, 5);
    auto a = make_instantiations(task, ShapeMode::Dynamic, seeds);
    auto b = make_instantiations(task, ShapeMode::Dynamic, seeds);
    REQUIRE(a.size() == 6);  // static + 5 dynamic
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].symbols == b[i].symbols);
        CHECK(a[i].seed == b[i].seed);
    }
    bool any_diff = false;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i].symbols.at("N") != 32) any_diff = true;
    }
    CHECK(any_diff);  // the ranges actually vary
}

TEST_CASE("interp backend self-consistency: the reference passes itself") {
    ts::ScopedTempDir work;
    auto task = vec_add_task();
    KernelCandidate cand;
    cand.id = "self";
    cand.dsl = "sketch";
    cand.source = task.reference_sketch;
    cand.sketch_text = task.reference_sketch;

    InterpBackend backend;
    auto seeds = make_seeds(1, 3);
    auto opts = fast_opts(work.path());
    opts.mode = ShapeMode::Dynamic;
    auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, opts);
    CHECK(report.status == VerifyStatus::Pass);
    CHECK(report.violation_fraction == 0.0);
    CHECK(report.max_error == 0.0);
    REQUIRE(report.latency_gen_us.size() == 3);
    // Deterministic cost model: candidate and baseline run the same sketch.
    CHECK(report.latency_gen_us == report.latency_base_us);
}

TEST_CASE("interp backend flags an unparsable sketch as CompileFail") {
    ts::ScopedTempDir work;
    auto task = vec_add_task();
    KernelCandidate cand;
    cand.id = "broken";
    cand.dsl = "sketch";
    cand.source = "sketch nope {";
    InterpBackend backend;
    auto seeds = make_seeds(1, 1);
    auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, fast_opts(work.path()));
    CHECK(report.status == VerifyStatus::CompileFail);
    CHECK(!report.diagnostics.empty());
}

TEST_CASE("c_cpu backend end to end") {
    ts::ScopedTempDir work;
    auto task = vec_add_task();
    CCpuBackend backend;
    auto seeds = make_seeds(7, 5);

    SUBCASE("correct add kernel passes across dynamic shapes") {
        KernelCandidate cand;
        cand.id = "c-add";
        cand.dsl = "c";
        cand.source = fixture("add_kernel.c");
        auto opts = fast_opts(work.path());
        opts.mode = ShapeMode::Dynamic;
        auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, opts);
        CAPTURE(report.diagnostics);
        CHECK(report.status == VerifyStatus::Pass);
        CHECK(report.instantiations.size() == 6);
        CHECK(report.latency_gen_us.size() == 3);
        CHECK(report.mean_latency_gen() > 0.0);
    }

    SUBCASE("a kernel writing garbage fails numerically") {
        KernelCandidate cand;
        cand.id = "c-zeros";
        cand.dsl = "c";
        std::string src = fixture("add_kernel.c");
        const std::string needle = "x.f32[i] + y.f32[i]";
        src.replace(src.find(needle), needle.size(), "0.0f");
        cand.source = src;
        auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, fast_opts(work.path()));
        CHECK(report.status == VerifyStatus::NumericFail);
        CHECK(report.violation_fraction > 0.99);
    }

    SUBCASE("syntax errors surface as CompileFail with compiler text") {
        KernelCandidate cand;
        cand.id = "c-syntax";
        cand.dsl = "c";
        cand.source = fixture("add_kernel.c") + "\nthis is not C\n";
        auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, fast_opts(work.path()));
        CHECK(report.status == VerifyStatus::CompileFail);
        CHECK(report.diagnostics.find("error") != std::string::npos);
    }

    SUBCASE("an endless loop times out") {
        KernelCandidate cand;
        cand.id = "c-spin";
        cand.dsl = "c";
        cand.source = R"(int kernel_main(int argc, char** argv) {
            volatile long long x = 0;
            for (;;) { x++; }
            return 0;
        })";
        auto opts = fast_opts(work.path());
        opts.run_timeout_ms = 300;
        auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, opts);
        CHECK(report.status == VerifyStatus::Timeout);
    }
}

TEST_CASE("sanitizer build reports out-of-bounds writes as RuntimeFail") {
    ts::ScopedTempDir work;
    auto task = vec_add_task();
    CCpuBackend::Options bopts;
    bopts.sanitize = true;
    CCpuBackend backend(bopts);
    KernelCandidate cand;
    cand.id = "c-oob";
    cand.dsl = "c";
    std::string src = fixture("add_kernel.c");
    const std::string needle = "z.f32[i] = x.f32[i] + y.f32[i];";
    src.replace(src.find(needle), needle.size(),
                "z.f32[i] = x.f32[i] + y.f32[i]; z.f32[z.numel + 7] = 1.0f;");
    cand.source = src;
    auto seeds = make_seeds(3, 1);
    auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, fast_opts(work.path()));
    CHECK(report.status == VerifyStatus::RuntimeFail);
    CHECK(report.diagnostics.find("AddressSanitizer") != std::string::npos);
}

TEST_CASE("oracle-backed references work through the registry") {
    OracleSpec spec;
    spec.inputs = {{"X", {"N"}, kgen::sketch::DType::F32}};
    spec.outputs = {{"Y", {"N"}, kgen::sketch::DType::F32}};
    spec.eval = [](const kgen::interp::Binding& b) {
        std::map<std::string, Tensor> out;
        const Tensor& x = b.tensor_values.at("X");
        Tensor y(x.dtype(), x.shape());
        for (std::int64_t i = 0; i < x.numel(); ++i) y.set(i, 2.0 * x.get(i));
        out["Y"] = std::move(y);
        return out;
    };
    OracleRegistry::instance().add("doubler", spec);

    OperatorSpec task;
    task.name = "double_it";
    task.reference_oracle = "doubler";
    task.static_shapes = {{"N", 16}};

    const char* candidate_sketch = R"(sketch double_it {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32;
  constexpr:;

  a = alloc([N])
  load(X[0:N] -> a)
  add(a, a, a)
  store(a -> Y[0:N])
}
)";
    ts::ScopedTempDir work;
    KernelCandidate cand;
    cand.id = "sk-doubler";
    cand.dsl = "sketch";
    cand.source = candidate_sketch;
    InterpBackend backend;
    auto seeds = make_seeds(5, 1);
    auto report = verify_kernel(cand, task, backend, Tolerance{}, seeds, fast_opts(work.path()));
    CAPTURE(report.diagnostics);
    CHECK(report.status == VerifyStatus::Pass);
}
