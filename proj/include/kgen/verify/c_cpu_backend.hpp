#pragma once

#include <vector>

#include "kgen/verify/backend.hpp"

namespace kgen::verify {

/// Compiles C candidates with the system compiler and runs them as
/// subprocesses. Tensors cross the boundary as .ten files; the kernel must
/// define
///
///   int kernel_main(int argc, char** argv);
///
/// invoked with argv[1..n_in] = input tensor paths (task input order),
/// argv[n_in+1..n_in+n_out] = output tensor paths to be written (task output
/// order), followed by one "name=value" argument per bound scalar (symbols
/// first, then constants, each sorted by name). Helper I/O routines are
/// available via `#include "ten_io.h"`, which the backend drops next to the
/// kernel source before compiling.
class CCpuBackend : public BackendAdapter {
public:
    struct Options {
        std::string compiler = "cc";
        std::vector<std::string> extra_flags;
        bool sanitize = false;  // add -fsanitize=address -g
        int compile_timeout_ms = 30'000;
    };

    CCpuBackend() = default;
    explicit CCpuBackend(Options opts) : opts_(std::move(opts)) {}

    std::string id() const override { return "c_cpu"; }
    BackendCaps capabilities() const override { return {true, true, true}; }

    PrepareOutcome prepare(const core::KernelCandidate& candidate, const core::OperatorSpec& task,
                           const std::filesystem::path& scratch) override;
    RunOutcome run(PreparedKernel& kernel, const interp::Binding& inputs,
                   const RunLimits& limits) override;

private:
    Options opts_;
};

}  // namespace kgen::verify
