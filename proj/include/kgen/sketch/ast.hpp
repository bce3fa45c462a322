#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kgen::sketch {

enum class DType { F16, F32, I32 };

std::string_view dtype_name(DType d);
std::optional<DType> dtype_from(std::string_view name);

/// Integer/scalar expression over declared names, loop indices and literals.
/// ceil(a, b) is integer ceiling division.
struct Expr {
    enum class Kind { IntLit, FloatLit, Ref, Add, Sub, Mul, CeilDiv };

    Kind kind = Kind::IntLit;
    long long int_value = 0;
    double float_value = 0.0;
    std::string name;        // Ref
    std::vector<Expr> args;  // binary operands / ceil arguments

    static Expr integer(long long v);
    static Expr floating(double v);
    static Expr ref(std::string n);
    static Expr binary(Kind k, Expr lhs, Expr rhs);

    bool is_int(long long v) const { return kind == Kind::IntLit && int_value == v; }
    bool operator==(const Expr& o) const;
};

/// One axis of a tensor slice: a single index (axis collapses) or a
/// half-open lo:hi range.
struct SliceAxis {
    Expr lo;
    std::optional<Expr> hi;

    bool is_range() const { return hi.has_value(); }
    bool operator==(const SliceAxis&) const = default;
};

struct TensorSlice {
    std::string tensor;
    std::vector<SliceAxis> axes;

    bool operator==(const TensorSlice&) const = default;
};

/// Closed hint vocabulary; tags with an "x-" prefix are free-form extensions.
bool hint_allowed(std::string_view tag);
const std::set<std::string>& hint_vocabulary();

struct HintSet {
    std::set<std::string> tags;

    bool empty() const { return tags.empty(); }
    bool contains(std::string_view t) const { return tags.count(std::string(t)) != 0; }
    void merge(const HintSet& o) { tags.insert(o.tags.begin(), o.tags.end()); }

    bool operator==(const HintSet&) const = default;
};

struct Stmt {
    enum class Kind { ForLoop, Alloc, Load, Store, Compute };

    Kind kind = Kind::Compute;
    HintSet hints;
    int line = 0;  // source line when parsed; 0 for programmatic ASTs

    // ForLoop
    std::string loop_var;
    Expr range_start = Expr::integer(0);
    Expr range_stop = Expr::integer(0);
    Expr range_step = Expr::integer(1);
    std::vector<Stmt> body;

    // Alloc
    std::string alloc_name;
    std::vector<Expr> alloc_shape;

    // Load / Store
    std::string buffer;
    TensorSlice slice;

    // Compute (destination-last; destination must be a bare buffer reference)
    std::string fn;
    std::vector<Expr> args;

    bool operator==(const Stmt& o) const;  // structural; ignores `line`
};

struct TensorSpec {
    std::string name;
    std::vector<Expr> dims;
    DType dtype = DType::F32;

    bool operator==(const TensorSpec&) const = default;
};

struct ConstexprDecl {
    std::string name;
    std::optional<long long> default_value;

    bool operator==(const ConstexprDecl&) const = default;
};

struct Declarations {
    std::vector<std::string> symbols;
    std::vector<TensorSpec> tensors;
    std::vector<ConstexprDecl> constexprs;

    bool operator==(const Declarations&) const = default;
};

struct Sketch {
    std::string name;
    Declarations decls;
    std::vector<Stmt> body;

    const TensorSpec* find_tensor(std::string_view n) const;
    bool operator==(const Sketch& o) const;
};

bool is_identifier(std::string_view s);

/// Names of the compute-library floor every interpreter backend must provide.
const std::set<std::string>& core_compute_names();

/// Compute function names used anywhere in the sketch body.
std::set<std::string> compute_names_used(const Sketch& s);

}  // namespace kgen::sketch
