#include "kgen/interp/compute.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kgen::interp {

namespace {

std::string shape_str(const std::vector<std::int64_t>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeConformanceError(msg);
}

// Broadcast shape of all tensor arguments (numpy trailing alignment).
std::vector<std::int64_t> broadcast_shape(std::span<const ComputeArg> args) {
    std::vector<std::int64_t> shape;
    for (const auto& a : args) {
        if (!a.is_tensor()) continue;
        const auto& s = a.tensor->shape();
        if (s.size() > shape.size()) shape.insert(shape.begin(), s.size() - shape.size(), 1);
        const std::size_t off = shape.size() - s.size();
        for (std::size_t d = 0; d < s.size(); ++d) {
            std::int64_t& dst = shape[off + d];
            if (dst == 1) {
                dst = s[d];
            } else {
                require(s[d] == 1 || s[d] == dst,
                        "broadcast mismatch: " + shape_str(s) + " vs " + shape_str(shape));
            }
        }
    }
    if (shape.empty()) shape.push_back(1);  // all-scalar call
    return shape;
}

// Reads arg value at the broadcast multi-index.
double arg_at(const ComputeArg& a, std::span<const std::int64_t> idx,
              const std::vector<std::int64_t>& out_shape) {
    if (!a.is_tensor()) return a.scalar;
    const auto& s = a.tensor->shape();
    const std::size_t off = out_shape.size() - s.size();
    std::int64_t flat = 0;
    for (std::size_t d = 0; d < s.size(); ++d) {
        const std::int64_t i = s[d] == 1 ? 0 : idx[off + d];
        flat = flat * s[d] + i;
    }
    return a.tensor->get(flat);
}

void for_each_index(const std::vector<std::int64_t>& shape,
                    const std::function<void(std::span<const std::int64_t>, std::int64_t)>& fn) {
    std::vector<std::int64_t> idx(shape.size(), 0);
    const std::int64_t total = [&] {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }();
    for (std::int64_t flat = 0; flat < total; ++flat) {
        fn(idx, flat);
        for (std::size_t d = shape.size(); d-- > 0;) {
            if (++idx[d] < shape[d]) break;
            idx[d] = 0;
        }
    }
}

void elementwise(std::span<const ComputeArg> in, Tensor& out, std::size_t arity,
                 const std::function<double(std::span<const double>)>& op, const char* name) {
    require(in.size() == arity, std::string(name) + ": wrong argument count");
    const auto shape = broadcast_shape(in);
    require(out.shape() == shape, std::string(name) + ": destination shape " +
                                      shape_str(out.shape()) + " does not match broadcast " +
                                      shape_str(shape));
    std::vector<double> vals(arity);
    for_each_index(shape, [&](std::span<const std::int64_t> idx, std::int64_t flat) {
        for (std::size_t a = 0; a < arity; ++a) vals[a] = arg_at(in[a], idx, shape);
        out.set(flat, op(vals));
    });
}

ComputeLibrary::Fn ew2(double (*op)(double, double), const char* name) {
    return [op, name](std::span<const ComputeArg> in, Tensor& out) {
        elementwise(in, out, 2, [op](std::span<const double> v) { return op(v[0], v[1]); }, name);
    };
}

ComputeLibrary::Fn ew1(double (*op)(double), const char* name) {
    return [op, name](std::span<const ComputeArg> in, Tensor& out) {
        elementwise(in, out, 1, [op](std::span<const double> v) { return op(v[0]); }, name);
    };
}

const Tensor& tensor_arg(std::span<const ComputeArg> in, std::size_t i, const char* name) {
    require(i < in.size() && in[i].is_tensor(),
            std::string(name) + ": argument " + std::to_string(i + 1) + " must be a buffer");
    return *in[i].tensor;
}

std::int64_t scalar_int_arg(std::span<const ComputeArg> in, std::size_t i, const char* name) {
    require(i < in.size() && !in[i].is_tensor(),
            std::string(name) + ": argument " + std::to_string(i + 1) + " must be a scalar");
    const double v = in[i].scalar;
    const auto r = static_cast<std::int64_t>(std::llround(v));
    require(static_cast<double>(r) == v, std::string(name) + ": expected an integer scalar");
    return r;
}

void reduce_impl(std::span<const ComputeArg> in, Tensor& out, bool is_max, const char* name) {
    require(in.size() == 2, std::string(name) + " takes (input, axis, dest)");
    const Tensor& src = tensor_arg(in, 0, name);
    const std::int64_t axis = scalar_int_arg(in, 1, name);
    const auto& shape = src.shape();
    require(axis >= 0 && axis < static_cast<std::int64_t>(shape.size()),
            std::string(name) + ": axis out of range");

    std::vector<std::int64_t> out_shape;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (static_cast<std::int64_t>(d) != axis) out_shape.push_back(shape[d]);
    }
    if (out_shape.empty()) out_shape.push_back(1);
    require(out.shape() == out_shape, std::string(name) + ": destination shape " +
                                          shape_str(out.shape()) + " should be " + shape_str(out_shape));

    std::int64_t outer = 1, inner = 1;
    for (std::int64_t d = 0; d < axis; ++d) outer *= shape[static_cast<std::size_t>(d)];
    for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < shape.size(); ++d) inner *= shape[d];
    const std::int64_t extent = shape[static_cast<std::size_t>(axis)];

    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t i = 0; i < inner; ++i) {
            double acc = is_max ? src.get(o * extent * inner + i) : 0.0;
            for (std::int64_t k = is_max ? 1 : 0; k < extent; ++k) {
                const double v = src.get((o * extent + k) * inner + i);
                acc = is_max ? std::max(acc, v) : acc + v;
            }
            out.set(o * inner + i, acc);
        }
    }
}

void gemm_impl(std::span<const ComputeArg> in, Tensor& out) {
    require(in.size() == 2, "gemm takes (a, b, dest)");
    const Tensor* a = &tensor_arg(in, 0, "gemm");
    const Tensor* b = &tensor_arg(in, 1, "gemm");
    require(a->rank() == 2 && b->rank() == 2, "gemm operands must be rank 2");
    const std::int64_t m = a->shape()[0], k = a->shape()[1], n = b->shape()[1];
    require(b->shape()[0] == k, "gemm inner dimensions disagree: " + shape_str(a->shape()) +
                                    " x " + shape_str(b->shape()));
    require(out.shape() == std::vector<std::int64_t>{m, n},
            "gemm destination must be [" + std::to_string(m) + "," + std::to_string(n) + "]");
    // Destination may alias an operand; snapshot in that case.
    Tensor a_copy, b_copy;
    if (a == &out) { a_copy = *a; a = &a_copy; }
    if (b == &out) { b_copy = *b; b = &b_copy; }
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::int64_t p = 0; p < k; ++p) {
                acc += a->get(i * k + p) * b->get(p * n + j);
            }
            out.set(i * n + j, acc);
        }
    }
}

void transpose_impl(std::span<const ComputeArg> in, Tensor& out) {
    require(in.size() == 1, "transpose takes (input, dest)");
    const Tensor* src = &tensor_arg(in, 0, "transpose");
    require(src->rank() == 2, "transpose operand must be rank 2");
    const std::int64_t m = src->shape()[0], n = src->shape()[1];
    require(out.shape() == std::vector<std::int64_t>{n, m},
            "transpose destination must be [" + std::to_string(n) + "," + std::to_string(m) + "]");
    Tensor copy;
    if (src == &out) { copy = *src; src = &copy; }
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            out.set(j * m + i, src->get(i * n + j));
        }
    }
}

void gather_rows_impl(std::span<const ComputeArg> in, Tensor& out) {
    require(in.size() == 2, "gather_rows takes (data, indices, dest)");
    const Tensor& data = tensor_arg(in, 0, "gather_rows");
    const Tensor& idx = tensor_arg(in, 1, "gather_rows");
    require(data.rank() == 2 && idx.rank() == 1, "gather_rows wants data[M,N], indices[G]");
    const std::int64_t m = data.shape()[0], n = data.shape()[1], g = idx.shape()[0];
    require(out.shape() == std::vector<std::int64_t>{g, n},
            "gather_rows destination must be [" + std::to_string(g) + "," + std::to_string(n) + "]");
    for (std::int64_t r = 0; r < g; ++r) {
        const auto row = static_cast<std::int64_t>(std::llround(idx.get(r)));
        require(row >= 0 && row < m, "gather_rows: index " + std::to_string(row) + " out of range [0," +
                                         std::to_string(m) + ")");
        for (std::int64_t c = 0; c < n; ++c) out.set(r * n + c, data.get(row * n + c));
    }
}

void sort_desc_impl(std::span<const ComputeArg> in, Tensor& out) {
    require(in.size() == 1, "sort_desc takes (input, dest)");
    const Tensor& src = tensor_arg(in, 0, "sort_desc");
    require(src.rank() == 1, "sort_desc operand must be rank 1");
    require(out.shape() == src.shape(), "sort_desc destination shape must match input");
    std::vector<double> vals(static_cast<std::size_t>(src.numel()));
    for (std::int64_t i = 0; i < src.numel(); ++i) vals[static_cast<std::size_t>(i)] = src.get(i);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    for (std::int64_t i = 0; i < src.numel(); ++i) out.set(i, vals[static_cast<std::size_t>(i)]);
}

}  // namespace

void ComputeLibrary::register_fn(std::string name, Fn fn) {
    fns_[std::move(name)] = std::move(fn);
}

bool ComputeLibrary::contains(std::string_view name) const {
    return fns_.find(name) != fns_.end();
}

std::set<std::string> ComputeLibrary::names() const {
    std::set<std::string> out;
    for (const auto& [k, v] : fns_) out.insert(k);
    return out;
}

void ComputeLibrary::apply(std::string_view name, std::span<const ComputeArg> inputs,
                           Tensor& out) const {
    auto it = fns_.find(name);
    if (it == fns_.end()) throw UnknownFunction(std::string(name));
    it->second(inputs, out);
}

const ComputeLibrary& ComputeLibrary::builtin() {
    static const ComputeLibrary lib = [] {
        ComputeLibrary l;
        l.register_fn("add", ew2([](double a, double b) { return a + b; }, "add"));
        l.register_fn("sub", ew2([](double a, double b) { return a - b; }, "sub"));
        l.register_fn("mul", ew2([](double a, double b) { return a * b; }, "mul"));
        l.register_fn("div", ew2([](double a, double b) { return a / b; }, "div"));
        l.register_fn("max", ew2([](double a, double b) { return std::max(a, b); }, "max"));
        l.register_fn("min", ew2([](double a, double b) { return std::min(a, b); }, "min"));
        l.register_fn("sqrt", ew1([](double a) { return std::sqrt(a); }, "sqrt"));
        l.register_fn("exp", ew1([](double a) { return std::exp(a); }, "exp"));
        l.register_fn("relu", ew1([](double a) { return a > 0.0 ? a : 0.0; }, "relu"));
        l.register_fn("reduce_sum", [](std::span<const ComputeArg> in, Tensor& out) {
            reduce_impl(in, out, false, "reduce_sum");
        });
        l.register_fn("reduce_max", [](std::span<const ComputeArg> in, Tensor& out) {
            reduce_impl(in, out, true, "reduce_max");
        });
        l.register_fn("gemm", gemm_impl);
        l.register_fn("transpose", transpose_impl);
        l.register_fn("gather_rows", gather_rows_impl);
        l.register_fn("sort_desc", sort_desc_impl);
        return l;
    }();
    return lib;
}

}  // namespace kgen::interp
