#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kgen/interp/tensor.hpp"

namespace kgen::verify {

using interp::Tensor;
using sketch::DType;

class ShapeMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pass gate thresholds per dtype, plus the relative-error denominator guard.
struct Tolerance {
    double tau_f16 = 0.004;
    double tau_f32 = 0.001;
    double tau_i32 = 0.0;  // integers must match exactly
    double eps_f16 = 1e-3;
    double eps_f32 = 1e-6;
    double eps_i32 = 1e-6;

    double tau(DType d) const;
    double eps(DType d) const;
};

/// Per-element error: relative where |ref| exceeds the guard, absolute
/// otherwise. Shapes and dtypes must match.
std::vector<double> elementwise_error(const Tensor& gen, const Tensor& ref, const Tolerance& tol);

enum class GateResult { Pass, NumericFail };

struct GateStats {
    GateResult result = GateResult::Pass;
    double violation_fraction = 0.0;
    double max_error = 0.0;
    std::int64_t violations = 0;
};

/// A result passes when the fraction of elements whose error exceeds tau
/// stays at or below tau itself.
GateStats check_pass(std::span<const double> errors, double tau);

/// Unbiased pass@k over N tasks from n samples each with c_i correct, using
/// exact integer combinatorics (C(a,b) = 0 when a < b). For n beyond exact
/// 64-bit range a numerically stable product form is used.
double pass_at_k(int n, std::span<const int> correct_counts, int k);

/// Exact binomial coefficient; throws DomainError if it cannot be
/// represented exactly in 64 bits.
std::uint64_t binomial(int n, int k);

struct SpeedupSummary {
    std::vector<double> speedups;                  // per kernel: base / gen
    double geometric_mean = 1.0;                   // exp2(mean log2 speedup)
    std::vector<std::pair<double, double>> fast_p; // threshold -> fraction
};

/// Speedup and aggregate metrics from (T_base, T_gen) pairs of mean
/// post-warm-up latencies. All times must be positive.
SpeedupSummary speedup_metrics(std::span<const std::pair<double, double>> latencies,
                               std::span<const double> thresholds);

double geometric_mean(std::span<const double> values);

}  // namespace kgen::verify
