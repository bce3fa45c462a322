#include "kgen/sketch/ast.hpp"

#include <cctype>

namespace kgen::sketch {

std::string_view dtype_name(DType d) {
    switch (d) {
        case DType::F16: return "f16";
        case DType::F32: return "f32";
        case DType::I32: return "i32";
    }
    return "f32";
}

std::optional<DType> dtype_from(std::string_view name) {
    if (name == "f16") return DType::F16;
    if (name == "f32") return DType::F32;
    if (name == "i32") return DType::I32;
    return std::nullopt;
}

Expr Expr::integer(long long v) {
    Expr e;
    e.kind = Kind::IntLit;
    e.int_value = v;
    return e;
}

Expr Expr::floating(double v) {
    Expr e;
    e.kind = Kind::FloatLit;
    e.float_value = v;
    return e;
}

Expr Expr::ref(std::string n) {
    Expr e;
    e.kind = Kind::Ref;
    e.name = std::move(n);
    return e;
}

Expr Expr::binary(Kind k, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = k;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

bool Expr::operator==(const Expr& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::IntLit: return int_value == o.int_value;
        case Kind::FloatLit: return float_value == o.float_value;
        case Kind::Ref: return name == o.name;
        default: return args == o.args;
    }
}

const std::set<std::string>& hint_vocabulary() {
    static const std::set<std::string> vocab = {
        "parallel",  "grididx",     "coreidx",   "pipeline",       "vectorize",
        "unroll",    "fastest",     "fast",      "accumulator",    "init_zero",
        "input_cache", "output_buffer", "temp_workspace",
    };
    return vocab;
}

bool hint_allowed(std::string_view tag) {
    if (tag.rfind("x-", 0) == 0 && tag.size() > 2) return true;
    return hint_vocabulary().count(std::string(tag)) != 0;
}

bool Stmt::operator==(const Stmt& o) const {
    if (kind != o.kind || hints != o.hints) return false;
    switch (kind) {
        case Kind::ForLoop:
            return loop_var == o.loop_var && range_start == o.range_start &&
                   range_stop == o.range_stop && range_step == o.range_step && body == o.body;
        case Kind::Alloc:
            return alloc_name == o.alloc_name && alloc_shape == o.alloc_shape;
        case Kind::Load:
        case Kind::Store:
            return buffer == o.buffer && slice == o.slice;
        case Kind::Compute:
            return fn == o.fn && args == o.args;
    }
    return false;
}

const TensorSpec* Sketch::find_tensor(std::string_view n) const {
    for (const auto& t : decls.tensors) {
        if (t.name == n) return &t;
    }
    return nullptr;
}

bool Sketch::operator==(const Sketch& o) const {
    return name == o.name && decls == o.decls && body == o.body;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s.substr(1)) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

const std::set<std::string>& core_compute_names() {
    static const std::set<std::string> names = {
        "add", "sub", "mul", "div", "sqrt", "exp", "relu",
        "max", "min", "reduce_sum", "reduce_max", "gemm",
    };
    return names;
}

namespace {
void collect_compute(const std::vector<Stmt>& body, std::set<std::string>& out) {
    for (const auto& st : body) {
        if (st.kind == Stmt::Kind::Compute) out.insert(st.fn);
        if (st.kind == Stmt::Kind::ForLoop) collect_compute(st.body, out);
    }
}
}  // namespace

std::set<std::string> compute_names_used(const Sketch& s) {
    std::set<std::string> out;
    collect_compute(s.body, out);
    return out;
}

}  // namespace kgen::sketch
