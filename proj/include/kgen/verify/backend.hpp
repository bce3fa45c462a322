#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "kgen/core/candidate.hpp"
#include "kgen/core/task.hpp"
#include "kgen/interp/eval.hpp"
#include "kgen/verify/report.hpp"

namespace kgen::verify {

struct BackendCaps {
    bool compile = true;
    bool run = true;
    bool profile = true;
};

/// Backend-specific handle for a prepared (compiled/parsed) candidate.
class PreparedKernel {
public:
    virtual ~PreparedKernel() = default;
};

struct PrepareOutcome {
    std::unique_ptr<PreparedKernel> kernel;  // null on failure
    VerifyStatus status = VerifyStatus::Pass;
    std::string log;
};

struct RunLimits {
    int timeout_ms = 10'000;
    std::uint64_t max_steps = 500'000'000;  // interpreter budget
};

struct RunOutcome {
    std::map<std::string, interp::Tensor> outputs;
    VerifyStatus status = VerifyStatus::Pass;
    std::string log;
    double wall_us = 0.0;       // measured wall time
    double cost_units = 0.0;    // deterministic work measure, when available
};

/// Adapter isolating toolchain and execution specifics. `run` must be
/// deterministic for the interp backend. Profiling on one backend instance
/// is mutually exclusive via profiling_lease().
class BackendAdapter {
public:
    virtual ~BackendAdapter() = default;

    virtual std::string id() const = 0;
    virtual BackendCaps capabilities() const = 0;
    /// True when reported latencies derive from a deterministic cost model
    /// rather than wall time.
    virtual bool deterministic_timing() const { return false; }

    virtual PrepareOutcome prepare(const core::KernelCandidate& candidate,
                                   const core::OperatorSpec& task,
                                   const std::filesystem::path& scratch) = 0;

    virtual RunOutcome run(PreparedKernel& kernel, const interp::Binding& inputs,
                           const RunLimits& limits) = 0;

    std::mutex& profiling_lease() { return profile_mutex_; }

private:
    std::mutex profile_mutex_;
};

}  // namespace kgen::verify
