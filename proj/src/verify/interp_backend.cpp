#include "kgen/verify/interp_backend.hpp"

#include <chrono>

#include "kgen/sketch/parser.hpp"
#include "kgen/sketch/validate.hpp"

namespace kgen::verify {

namespace {

struct PreparedSketch : PreparedKernel {
    sketch::Sketch sk;
};

}  // namespace

PrepareOutcome InterpBackend::prepare(const core::KernelCandidate& candidate,
                                      const core::OperatorSpec& task,
                                      const std::filesystem::path& scratch) {
    (void)task;
    (void)scratch;
    PrepareOutcome out;
    if (candidate.dsl != "sketch") {
        out.status = VerifyStatus::CompileFail;
        out.log = "interp backend runs dsl 'sketch', got '" + candidate.dsl + "'";
        return out;
    }
    try {
        auto prepared = std::make_unique<PreparedSketch>();
        prepared->sk = sketch::parse_sketch(candidate.source);
        const auto& lib = lib_ ? *lib_ : interp::ComputeLibrary::builtin();
        auto diags = sketch::validate_sketch(prepared->sk, lib.names());
        if (!diags.empty()) {
            out.status = VerifyStatus::CompileFail;
            out.log = sketch::render_diagnostics(diags);
            return out;
        }
        out.kernel = std::move(prepared);
    } catch (const sketch::ParseError& e) {
        out.status = VerifyStatus::CompileFail;
        out.log = std::string("sketch parse error: ") + e.what();
    }
    return out;
}

RunOutcome InterpBackend::run(PreparedKernel& kernel, const interp::Binding& inputs,
                              const RunLimits& limits) {
    auto& prepared = static_cast<PreparedSketch&>(kernel);
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        interp::EvalOptions opts;
        opts.max_steps = limits.max_steps;
        opts.library = lib_;
        auto rs = interp::bind_shapes(prepared.sk, inputs);
        auto result = interp::eval_sketch(rs, inputs, opts);
        out.outputs = std::move(result.tensors);
        out.cost_units = static_cast<double>(result.steps);
    } catch (const interp::EvalBudgetExceeded& e) {
        out.status = VerifyStatus::Timeout;
        out.log = e.what();
    } catch (const interp::BindError& e) {
        out.status = VerifyStatus::RuntimeFail;
        out.log = std::string("bind error: ") + e.what();
    } catch (const std::exception& e) {
        out.status = VerifyStatus::RuntimeFail;
        out.log = e.what();
    }
    out.wall_us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

}  // namespace kgen::verify
