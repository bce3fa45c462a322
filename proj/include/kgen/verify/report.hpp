#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kgen/core/status.hpp"

namespace kgen::verify {

using core::VerifyStatus;

/// Outcome of verifying one candidate against its task reference.
/// violation_fraction/max_error aggregate the worst instantiation; latency
/// samples are recorded only after warm-up runs complete.
struct VerifyReport {
    VerifyStatus status = VerifyStatus::RuntimeFail;
    double violation_fraction = 0.0;
    double max_error = 0.0;
    std::vector<double> latency_gen_us;
    std::vector<double> latency_base_us;
    std::string diagnostics;

    struct Instantiation {
        std::map<std::string, std::int64_t> symbols;
        bool passed = false;
        double violation_fraction = 0.0;
        double max_error = 0.0;
    };
    std::vector<Instantiation> instantiations;

    bool passed() const { return status == VerifyStatus::Pass; }
    double mean_latency_gen() const;
    double mean_latency_base() const;
    std::string summary() const;
};

}  // namespace kgen::verify
