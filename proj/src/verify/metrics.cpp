#include "kgen/verify/metrics.hpp"

#include <cmath>

namespace kgen::verify {

double Tolerance::tau(DType d) const {
    switch (d) {
        case DType::F16: return tau_f16;
        case DType::F32: return tau_f32;
        case DType::I32: return tau_i32;
    }
    return tau_f32;
}

double Tolerance::eps(DType d) const {
    switch (d) {
        case DType::F16: return eps_f16;
        case DType::F32: return eps_f32;
        case DType::I32: return eps_i32;
    }
    return eps_f32;
}

std::vector<double> elementwise_error(const Tensor& gen, const Tensor& ref, const Tolerance& tol) {
    if (gen.shape() != ref.shape()) throw ShapeMismatch("elementwise_error: shape mismatch");
    if (gen.dtype() != ref.dtype()) throw ShapeMismatch("elementwise_error: dtype mismatch");
    const double eps = tol.eps(ref.dtype());
    std::vector<double> errors(static_cast<std::size_t>(ref.numel()));
    for (std::int64_t i = 0; i < ref.numel(); ++i) {
        const double r = ref.get(i);
        const double g = gen.get(i);
        const double diff = std::fabs(g - r);
        errors[static_cast<std::size_t>(i)] = std::fabs(r) > eps ? diff / std::fabs(r) : diff;
    }
    return errors;
}

GateStats check_pass(std::span<const double> errors, double tau) {
    if (errors.empty()) throw DomainError("check_pass: empty error list");
    GateStats stats;
    for (double e : errors) {
        if (e > tau || std::isnan(e)) ++stats.violations;
        if (e > stats.max_error || std::isnan(e)) stats.max_error = e;
    }
    stats.violation_fraction =
        static_cast<double>(stats.violations) / static_cast<double>(errors.size());
    stats.result = stats.violation_fraction <= tau ? GateResult::Pass : GateResult::NumericFail;
    return stats;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        const auto factor = static_cast<std::uint64_t>(n - k + i);
        // result * factor / i is exact at every step; detect overflow first.
        if (result > UINT64_MAX / factor) throw DomainError("binomial: 64-bit overflow");
        result = result * factor / static_cast<std::uint64_t>(i);
    }
    return result;
}

namespace {

// Single-task pass@k. Computed as (C(n,k) - C(n-c,k)) / C(n,k) so that the
// division happens once, matching a favorable/total enumeration bit for bit.
double pass_at_k_single(int n, int c, int k) {
    if (n <= 62) {
        const std::uint64_t total = binomial(n, k);
        const std::uint64_t miss = binomial(n - c, k);
        return static_cast<double>(total - miss) / static_cast<double>(total);
    }
    // Stable product fallback for large n: 1 - prod (n-c-i)/(n-i).
    if (n - c < k) return 1.0;
    double miss = 1.0;
    for (int i = 0; i < k; ++i) {
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - miss;
}

}  // namespace

double pass_at_k(int n, std::span<const int> correct_counts, int k) {
    if (n < 1) throw DomainError("pass_at_k: n must be at least 1");
    if (k < 1 || k > n) throw DomainError("pass_at_k: k must satisfy 1 <= k <= n");
    if (correct_counts.empty()) throw DomainError("pass_at_k: no tasks");
    double sum = 0.0;
    for (int c : correct_counts) {
        if (c < 0 || c > n) throw DomainError("pass_at_k: correct count outside [0, n]");
        sum += pass_at_k_single(n, c, k);
    }
    return sum / static_cast<double>(correct_counts.size());
}

double geometric_mean(std::span<const double> values) {
    if (values.empty()) throw DomainError("geometric_mean: empty input");
    double log_sum = 0.0;
    for (double v : values) {
        if (v <= 0.0) throw DomainError("geometric_mean: values must be positive");
        log_sum += std::log2(v);
    }
    return std::exp2(log_sum / static_cast<double>(values.size()));
}

SpeedupSummary speedup_metrics(std::span<const std::pair<double, double>> latencies,
                               std::span<const double> thresholds) {
    if (latencies.empty()) throw DomainError("speedup_metrics: no latency pairs");
    SpeedupSummary summary;
    summary.speedups.reserve(latencies.size());
    for (const auto& [base, gen] : latencies) {
        if (base <= 0.0 || gen <= 0.0) throw DomainError("speedup_metrics: non-positive time");
        summary.speedups.push_back(base / gen);
    }
    summary.geometric_mean = geometric_mean(summary.speedups);
    for (double p : thresholds) {
        std::int64_t hits = 0;
        for (double s : summary.speedups) {
            if (s >= p) ++hits;
        }
        summary.fast_p.emplace_back(
            p, static_cast<double>(hits) / static_cast<double>(summary.speedups.size()));
    }
    return summary;
}

}  // namespace kgen::verify
