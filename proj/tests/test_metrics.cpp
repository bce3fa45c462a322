#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kgen/verify/metrics.hpp"

using namespace kgen::verify;
using kgen::interp::Tensor;
using kgen::sketch::DType;

namespace {

// Independent oracle: pass@k by enumerating every k-subset of n samples
// (the first c indices are the correct ones) and counting subsets that
// contain at least one correct sample.
double pass_at_k_enumerated(int n, int c, int k) {
    std::uint64_t total = 0, favorable = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++total;
        if ((mask & ((1u << c) - 1u)) != 0) ++favorable;
    }
    return static_cast<double>(favorable) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("elementwise error switches between relative and absolute") {
    Tolerance tol;
    SUBCASE("relative branch") {
        Tensor ref = Tensor::from_values(DType::F32, {1}, std::vector<double>{2.0});
        Tensor gen = Tensor::from_values(DType::F32, {1}, std::vector<double>{2.1});
        auto e = elementwise_error(gen, ref, tol);
        CHECK(e[0] == doctest::Approx(0.05).epsilon(1e-6));
    }
    SUBCASE("absolute branch at tiny reference") {
        Tensor ref = Tensor::from_values(DType::F32, {1}, std::vector<double>{0.0});
        Tensor gen = Tensor::from_values(DType::F32, {1}, std::vector<double>{0.003});
        auto e = elementwise_error(gen, ref, tol);
        CHECK(e[0] == doctest::Approx(0.003).epsilon(1e-6));
    }
    SUBCASE("identical tensors give zeros") {
        Tensor ref = Tensor::from_values(DType::F32, {3}, std::vector<double>{1, -2, 3});
        auto e = elementwise_error(ref, ref, tol);
        for (double v : e) CHECK(v == 0.0);
    }
    SUBCASE("shape mismatch throws") {
        Tensor a(DType::F32, {2});
        Tensor b(DType::F32, {3});
        CHECK_THROWS_AS(elementwise_error(a, b, Tolerance{}), ShapeMismatch);
    }
}

TEST_CASE("pass gate compares the violating fraction against tau") {
    std::vector<double> errors(1000, 0.0);
    SUBCASE("one violation in a thousand passes at tau=0.004") {
        errors[17] = 0.05;
        auto stats = check_pass(errors, 0.004);
        CHECK(stats.result == GateResult::Pass);
        CHECK(stats.violation_fraction == doctest::Approx(0.001));
    }
    SUBCASE("five violations in a thousand fail at tau=0.004") {
        for (int i = 0; i < 5; ++i) errors[static_cast<std::size_t>(i) * 100] = 0.05;
        auto stats = check_pass(errors, 0.004);
        CHECK(stats.result == GateResult::NumericFail);
        CHECK(stats.violation_fraction == doctest::Approx(0.005));
    }
    SUBCASE("zero violations pass for any positive tau") {
        for (double tau : {1e-9, 0.001, 0.004, 0.5}) {
            CHECK(check_pass(errors, tau).result == GateResult::Pass);
        }
    }
    SUBCASE("monotone: adding a violation never flips fail to pass") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> e(100);
            for (auto& v : e) v = std::uniform_real_distribution<double>(0.0, 0.01)(rng);
            const double tau = 0.004;
            auto before = check_pass(e, tau);
            e[trial % e.size()] = 1.0;  // definite violation
            auto after = check_pass(e, tau);
            if (before.result == GateResult::NumericFail) {
                CHECK(after.result == GateResult::NumericFail);
            }
            CHECK(after.violations >= before.violations);
        }
    }
}

TEST_CASE("pass_at_k named examples") {
    CHECK(pass_at_k(1, std::vector<int>{1}, 1) == 1.0);
    CHECK(pass_at_k(4, std::vector<int>{2}, 1) == 0.5);
    CHECK(pass_at_k(4, std::vector<int>{4, 0}, 4) == 0.5);
}

TEST_CASE("pass_at_k equals exhaustive subset enumeration for n <= 8") {
    for (int n = 1; n <= 8; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                CAPTURE(n);
                CAPTURE(c);
                CAPTURE(k);
                const double expected = pass_at_k_enumerated(n, c, k);
                const double got = pass_at_k(n, std::vector<int>{c}, k);
                CHECK(got == expected);  // exact, both divide integers once
            }
        }
    }
}

TEST_CASE("pass_at_k validates its domain") {
    CHECK_THROWS_AS(pass_at_k(4, std::vector<int>{5}, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(4, std::vector<int>{2}, 0), DomainError);
    CHECK_THROWS_AS(pass_at_k(4, std::vector<int>{2}, 5), DomainError);
    CHECK_THROWS_AS(pass_at_k(0, std::vector<int>{}, 1), DomainError);
}

TEST_CASE("speedup metrics") {
    SUBCASE("all-ones is the identity") {
        std::vector<std::pair<double, double>> lat{{10, 10}, {5, 5}, {2, 2}};
        auto s = speedup_metrics(lat, std::vector<double>{1.0});
        CHECK(s.geometric_mean == 1.0);
        CHECK(s.fast_p[0].second == 1.0);
    }
    SUBCASE("gm of 2 and 8 is exactly 4") {
        std::vector<std::pair<double, double>> lat{{2, 1}, {8, 1}};
        auto s = speedup_metrics(lat, std::vector<double>{});
        CHECK(s.geometric_mean == 4.0);
    }
    SUBCASE("gm of 0.5 and 2 is 1") {
        std::vector<std::pair<double, double>> lat{{1, 2}, {2, 1}};
        auto s = speedup_metrics(lat, std::vector<double>{0.8});
        CHECK(s.geometric_mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.fast_p[0].second == 0.5);  // only the 2.0 clears 0.8
    }
    SUBCASE("inversion invariance: GM(1/s) == 1/GM(s)") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> s(8);
            for (auto& v : s) v = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
            std::vector<double> inv(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) inv[i] = 1.0 / s[i];
            CHECK(geometric_mean(inv) == doctest::Approx(1.0 / geometric_mean(s)).epsilon(1e-12));
        }
    }
    SUBCASE("non-positive time is rejected") {
        std::vector<std::pair<double, double>> lat{{1, 0}};
        CHECK_THROWS_AS(speedup_metrics(lat, std::vector<double>{}), DomainError);
    }
}

TEST_CASE("tolerance defaults follow the dtype") {
    Tolerance tol;
    CHECK(tol.tau(DType::F16) == 0.004);
    CHECK(tol.tau(DType::F32) == 0.001);
    CHECK(tol.eps(DType::F32) == 1e-6);
    CHECK(tol.eps(DType::F16) == 1e-3);
}
