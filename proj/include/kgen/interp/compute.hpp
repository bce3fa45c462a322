#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kgen/interp/tensor.hpp"

namespace kgen::interp {

class UnknownFunction : public std::runtime_error {
public:
    explicit UnknownFunction(const std::string& name)
        : std::runtime_error("unknown compute function '" + name + "'") {}
};

class ShapeConformanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A compute argument is either a tensor buffer or a scalar.
struct ComputeArg {
    const Tensor* tensor = nullptr;
    double scalar = 0.0;

    bool is_tensor() const { return tensor != nullptr; }
    static ComputeArg of(const Tensor& t) { return ComputeArg{&t, 0.0}; }
    static ComputeArg of(double v) { return ComputeArg{nullptr, v}; }
};

/// Registry of compute functions. Arithmetic is performed in double and
/// rounded on store into the destination's dtype; elementwise functions
/// broadcast numpy-style (trailing-aligned, extent-1 axes repeat, scalars
/// broadcast everywhere).
///
/// The default library registers the core set
///   add sub mul div sqrt exp relu max min reduce_sum reduce_max gemm
/// plus the extensions transpose, gather_rows and sort_desc. reduce_* take
/// (input, axis, dest) and drop the reduced axis ([1] when none remain);
/// accumulation walks the reduced axis in ascending order.
class ComputeLibrary {
public:
    using Fn = std::function<void(std::span<const ComputeArg>, Tensor&)>;

    void register_fn(std::string name, Fn fn);
    bool contains(std::string_view name) const;
    std::set<std::string> names() const;

    void apply(std::string_view name, std::span<const ComputeArg> inputs, Tensor& out) const;

    static const ComputeLibrary& builtin();

private:
    std::map<std::string, Fn, std::less<>> fns_;
};

inline void apply_compute(const ComputeLibrary& lib, std::string_view name,
                          std::span<const ComputeArg> inputs, Tensor& out) {
    lib.apply(name, inputs, out);
}

}  // namespace kgen::interp
