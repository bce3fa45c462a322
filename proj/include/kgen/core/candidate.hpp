#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgen/core/status.hpp"

namespace kgen::core {

/// One generated kernel implementation.
struct KernelCandidate {
    std::string id;
    std::string source;       // kernel source text in `dsl`
    std::string dsl;          // "c" or "sketch"
    std::string backend_id;   // "c_cpu" or "interp"
    std::string sketch_text;  // originating unified sketch

    std::optional<VerifyStatus> status;  // set after verification
    std::vector<double> latency_us;      // post-warm-up samples
};

}  // namespace kgen::core
