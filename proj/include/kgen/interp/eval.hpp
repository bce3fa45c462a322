#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "kgen/interp/compute.hpp"
#include "kgen/interp/tensor.hpp"
#include "kgen/sketch/ast.hpp"

namespace kgen::interp {

/// Concrete values for one evaluation: every declared symbol, constexpr
/// (sketch defaults apply when missing; an explicit binding wins) and tensor.
struct Binding {
    std::map<std::string, std::int64_t> symbol_values;
    std::map<std::string, double> constexpr_values;
    std::map<std::string, Tensor> tensor_values;
};

class BindError : public std::runtime_error {
public:
    BindError(std::string subject_, const std::string& message)
        : std::runtime_error(message), subject(std::move(subject_)) {}
    std::string subject;  // first unresolvable identifier or mismatched tensor
};

class RuntimeEvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EvalBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sketch with every declaration-level expression resolved against a binding.
struct ResolvedSketch {
    sketch::Sketch sk;
    std::map<std::string, double> scalars;  // symbols and constexpr values
    std::map<std::string, std::vector<std::int64_t>> tensor_shapes;
};

/// Resolves and cross-checks shapes. Throws BindError naming the first
/// unresolvable identifier, missing binding, or tensor whose provided
/// shape/dtype disagrees with its declaration.
ResolvedSketch bind_shapes(const sketch::Sketch& s, const Binding& b);

/// Trip count of a loop whose range is independent of enclosing loop
/// variables (throws BindError otherwise).
std::int64_t trip_count(const ResolvedSketch& rs, const sketch::Stmt& loop);

struct EvalOptions {
    std::uint64_t max_steps = 500'000'000;  // statement executions before EvalBudgetExceeded
    const ComputeLibrary* library = nullptr;  // default: ComputeLibrary::builtin()
};

struct EvalResult {
    std::map<std::string, Tensor> tensors;  // final contents of every declared tensor
    std::uint64_t steps = 0;                // deterministic work measure
};

/// Reference interpretation. Hints are ignored entirely; local buffers are
/// f32 and zero-initialized at their alloc statement; slice ranges that
/// exceed a tensor extent are clamped (partial tiles); evaluation order is
/// program order, so results are bit-deterministic.
EvalResult eval_sketch(const ResolvedSketch& rs, const Binding& b, const EvalOptions& opts = {});

}  // namespace kgen::interp
