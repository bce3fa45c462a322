#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kgen/interp/tensor.hpp"

namespace kgen::testsupport {

// Direct closed-form RMSNorm over X[B,F,D1,D2], independent of the sketch
// interpreter: Y[b,f,d1,d2] = X[b,f,d1,d2] / sqrt(mean_f(X^2)[b,d1,d2] + eps)
inline kgen::interp::Tensor rmsnorm_closed_form(const kgen::interp::Tensor& x, std::int64_t b_n,
                                                std::int64_t f_n, std::int64_t d1_n,
                                                std::int64_t d2_n, double eps) {
    using kgen::interp::Tensor;
    Tensor y(x.dtype(), {b_n, f_n, d1_n, d2_n});
    auto at = [&](std::int64_t b, std::int64_t f, std::int64_t d1, std::int64_t d2) {
        return ((b * f_n + f) * d1_n + d1) * d2_n + d2;
    };
    for (std::int64_t b = 0; b < b_n; ++b) {
        for (std::int64_t d1 = 0; d1 < d1_n; ++d1) {
            for (std::int64_t d2 = 0; d2 < d2_n; ++d2) {
                double sumsq = 0.0;
                for (std::int64_t f = 0; f < f_n; ++f) {
                    const double v = x.get(at(b, f, d1, d2));
                    sumsq += v * v;
                }
                const double rms = std::sqrt(sumsq / static_cast<double>(f_n) + eps);
                for (std::int64_t f = 0; f < f_n; ++f) {
                    y.set(at(b, f, d1, d2), x.get(at(b, f, d1, d2)) / rms);
                }
            }
        }
    }
    return y;
}

inline kgen::interp::Tensor random_tensor(kgen::sketch::DType dtype,
                                          std::vector<std::int64_t> shape, std::uint64_t seed,
                                          double lo = -1.0, double hi = 1.0) {
    kgen::interp::Tensor t(dtype, std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (std::int64_t i = 0; i < t.numel(); ++i) t.set(i, dist(rng));
    return t;
}

inline double max_abs_diff(const kgen::interp::Tensor& a, const kgen::interp::Tensor& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        m = std::max(m, std::fabs(a.get(i) - b.get(i)));
    }
    return m;
}

}  // namespace kgen::testsupport
