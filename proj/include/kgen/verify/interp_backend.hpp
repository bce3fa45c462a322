#pragma once

#include <set>

#include "kgen/verify/backend.hpp"

namespace kgen::verify {

/// Runs "sketch"-DSL candidates on the reference interpreter. prepare()
/// parses and validates (failures surface as CompileFail); run() binds and
/// evaluates. Latency is reported as interpreter step count, a deterministic
/// cost model, so evolve traces and reports reproduce bit-for-bit.
class InterpBackend : public BackendAdapter {
public:
    InterpBackend() = default;
    explicit InterpBackend(const interp::ComputeLibrary* lib) : lib_(lib) {}

    std::string id() const override { return "interp"; }
    BackendCaps capabilities() const override { return {true, true, true}; }
    bool deterministic_timing() const override { return true; }

    PrepareOutcome prepare(const core::KernelCandidate& candidate, const core::OperatorSpec& task,
                           const std::filesystem::path& scratch) override;
    RunOutcome run(PreparedKernel& kernel, const interp::Binding& inputs,
                   const RunLimits& limits) override;

private:
    const interp::ComputeLibrary* lib_ = nullptr;
};

}  // namespace kgen::verify
