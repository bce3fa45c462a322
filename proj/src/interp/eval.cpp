#include "kgen/interp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kgen::interp {

using sketch::Expr;
using sketch::Sketch;
using sketch::SliceAxis;
using sketch::Stmt;

namespace {

struct ScalarEnv {
    const std::map<std::string, double>* globals = nullptr;
    std::vector<std::pair<std::string, std::int64_t>> loop_vars;

    double lookup(const std::string& name) const {
        for (auto it = loop_vars.rbegin(); it != loop_vars.rend(); ++it) {
            if (it->first == name) return static_cast<double>(it->second);
        }
        auto f = globals->find(name);
        if (f == globals->end()) throw BindError(name, "no value bound for '" + name + "'");
        return f->second;
    }
};

double eval_scalar(const Expr& e, const ScalarEnv& env) {
    switch (e.kind) {
        case Expr::Kind::IntLit: return static_cast<double>(e.int_value);
        case Expr::Kind::FloatLit: return e.float_value;
        case Expr::Kind::Ref: return env.lookup(e.name);
        case Expr::Kind::Add: return eval_scalar(e.args[0], env) + eval_scalar(e.args[1], env);
        case Expr::Kind::Sub: return eval_scalar(e.args[0], env) - eval_scalar(e.args[1], env);
        case Expr::Kind::Mul: return eval_scalar(e.args[0], env) * eval_scalar(e.args[1], env);
        case Expr::Kind::CeilDiv: {
            const double a = eval_scalar(e.args[0], env);
            const double b = eval_scalar(e.args[1], env);
            const auto ia = static_cast<std::int64_t>(std::llround(a));
            const auto ib = static_cast<std::int64_t>(std::llround(b));
            if (static_cast<double>(ia) != a || static_cast<double>(ib) != b || ib <= 0) {
                throw RuntimeEvalError("ceil() needs integer operands with a positive divisor");
            }
            return static_cast<double>((ia + ib - 1) / ib);
        }
    }
    throw RuntimeEvalError("unreachable expression kind");
}

std::int64_t eval_extent(const Expr& e, const ScalarEnv& env, const std::string& what) {
    const double v = eval_scalar(e, env);
    const auto i = static_cast<std::int64_t>(std::llround(v));
    if (static_cast<double>(i) != v) {
        throw BindError(what, what + " does not evaluate to an integer");
    }
    return i;
}

struct ResolvedSlice {
    const Tensor* tensor = nullptr;
    std::string name;
    std::vector<std::int64_t> lo;        // per tensor axis
    std::vector<std::int64_t> extent;    // clamped extent per axis (1 for single index)
    std::vector<bool> ranged;            // axis kept in the region?
    std::vector<std::int64_t> region;    // shape of ranged axes
};

class Evaluator {
public:
    Evaluator(const ResolvedSketch& rs, const Binding& b, const EvalOptions& opts)
        : rs_(rs), opts_(opts), lib_(opts.library ? *opts.library : ComputeLibrary::builtin()) {
        env_.globals = &rs_.scalars;
        for (const auto& t : rs_.sk.decls.tensors) {
            tensors_[t.name] = b.tensor_values.at(t.name);
        }
    }

    EvalResult run() {
        exec_block(rs_.sk.body);
        EvalResult res;
        res.tensors = std::move(tensors_);
        res.steps = steps_;
        return res;
    }

private:
    const ResolvedSketch& rs_;
    const EvalOptions& opts_;
    const ComputeLibrary& lib_;
    ScalarEnv env_;
    std::map<std::string, Tensor> tensors_;  // declared tensors (mutable copies)
    std::map<std::string, Tensor> locals_;   // alloc'd buffers

    std::uint64_t steps_ = 0;

    void tick() {
        if (++steps_ > opts_.max_steps) {
            throw EvalBudgetExceeded("evaluation exceeded " + std::to_string(opts_.max_steps) +
                                     " steps");
        }
    }

    void exec_block(const std::vector<Stmt>& body) {
        std::vector<std::string> scope_allocs;
        for (const auto& st : body) exec_stmt(st, scope_allocs);
        for (const auto& n : scope_allocs) locals_.erase(n);
    }

    void exec_stmt(const Stmt& st, std::vector<std::string>& scope_allocs) {
        tick();
        switch (st.kind) {
            case Stmt::Kind::ForLoop: {
                const std::int64_t start = eval_extent(st.range_start, env_, "range start");
                const std::int64_t stop = eval_extent(st.range_stop, env_, "range stop");
                const std::int64_t step = eval_extent(st.range_step, env_, "range step");
                if (step <= 0) throw RuntimeEvalError("loop step must be positive");
                for (std::int64_t i = start; i < stop; i += step) {
                    env_.loop_vars.emplace_back(st.loop_var, i);
                    exec_block(st.body);
                    env_.loop_vars.pop_back();
                }
                return;
            }
            case Stmt::Kind::Alloc: {
                std::vector<std::int64_t> shape;
                for (const auto& d : st.alloc_shape) {
                    const std::int64_t e = eval_extent(d, env_, "alloc extent");
                    if (e <= 0) throw RuntimeEvalError("alloc extent must be positive");
                    shape.push_back(e);
                }
                // Local buffers are f32 regardless of hint; every alloc
                // starts zeroed (init_zero is advisory for code generators).
                locals_[st.alloc_name] = Tensor(DType::F32, std::move(shape));
                if (std::find(scope_allocs.begin(), scope_allocs.end(), st.alloc_name) ==
                    scope_allocs.end()) {
                    scope_allocs.push_back(st.alloc_name);
                }
                return;
            }
            case Stmt::Kind::Load: {
                const ResolvedSlice rsl = resolve_slice(st.slice);
                Tensor& buf = local(st.buffer);
                check_region_fits(rsl, buf, "load");
                copy_region(rsl, buf, /*into_buffer=*/true);
                return;
            }
            case Stmt::Kind::Store: {
                const ResolvedSlice rsl = resolve_slice(st.slice);
                Tensor& buf = local(st.buffer);
                check_region_fits(rsl, buf, "store");
                copy_region(rsl, buf, /*into_buffer=*/false);
                return;
            }
            case Stmt::Kind::Compute: {
                exec_compute(st);
                return;
            }
        }
    }

    Tensor& local(const std::string& name) {
        auto it = locals_.find(name);
        if (it == locals_.end()) {
            throw RuntimeEvalError("buffer '" + name + "' is not allocated");
        }
        return it->second;
    }

    ResolvedSlice resolve_slice(const sketch::TensorSlice& sl) {
        auto it = tensors_.find(sl.tensor);
        if (it == tensors_.end()) throw RuntimeEvalError("unknown tensor '" + sl.tensor + "'");
        ResolvedSlice out;
        out.tensor = &it->second;
        out.name = sl.tensor;
        const auto& shape = it->second.shape();
        if (sl.axes.size() != shape.size()) {
            throw RuntimeEvalError("slice of '" + sl.tensor + "' has " +
                                   std::to_string(sl.axes.size()) + " axes; tensor rank is " +
                                   std::to_string(shape.size()));
        }
        for (std::size_t d = 0; d < sl.axes.size(); ++d) {
            const SliceAxis& axis = sl.axes[d];
            const std::int64_t extent = shape[d];
            std::int64_t lo = eval_extent(axis.lo, env_, "slice index");
            if (lo < 0) throw RuntimeEvalError("negative index " + std::to_string(lo) + " into '" +
                                               sl.tensor + "'");
            if (axis.hi) {
                std::int64_t hi = eval_extent(*axis.hi, env_, "slice bound");
                if (hi > extent) hi = extent;  // partial-tile clamp
                if (lo >= hi) {
                    throw RuntimeEvalError("zero-extent slice [" + std::to_string(lo) + ":" +
                                           std::to_string(hi) + ") of '" + sl.tensor + "'");
                }
                out.lo.push_back(lo);
                out.extent.push_back(hi - lo);
                out.ranged.push_back(true);
                out.region.push_back(hi - lo);
            } else {
                if (lo >= extent) {
                    throw RuntimeEvalError("index " + std::to_string(lo) + " out of bounds for '" +
                                           sl.tensor + "' axis " + std::to_string(d));
                }
                out.lo.push_back(lo);
                out.extent.push_back(1);
                out.ranged.push_back(false);
            }
        }
        return out;
    }

    void check_region_fits(const ResolvedSlice& rsl, const Tensor& buf, const char* what) {
        if (rsl.region.empty()) {  // all axes are single indices: scalar transfer
            if (buf.numel() != 1) {
                throw RuntimeEvalError(std::string(what) +
                                       ": scalar slice needs a single-element buffer");
            }
            return;
        }
        if (rsl.region.size() != buf.rank()) {
            throw RuntimeEvalError(std::string(what) + ": slice region rank " +
                                   std::to_string(rsl.region.size()) + " does not match buffer rank " +
                                   std::to_string(buf.rank()));
        }
        for (std::size_t d = 0; d < rsl.region.size(); ++d) {
            if (rsl.region[d] > buf.shape()[d]) {
                throw RuntimeEvalError(std::string(what) + ": slice region exceeds buffer extent " +
                                       std::to_string(buf.shape()[d]) + " on axis " + std::to_string(d));
            }
        }
    }

    // Copies the clamped region between tensor and buffer prefix. The region
    // walks ranged axes only; collapsed (single-index) axes are fixed.
    void copy_region(const ResolvedSlice& rsl, Tensor& buf, bool into_buffer) {
        Tensor& ten = *const_cast<Tensor*>(rsl.tensor);
        const std::size_t rank = rsl.lo.size();
        std::vector<std::int64_t> idx(rank, 0);  // offsets within the region per tensor axis
        for (;;) {
            std::int64_t ten_flat = 0;
            std::int64_t buf_flat = 0;
            std::size_t region_d = 0;
            for (std::size_t d = 0; d < rank; ++d) {
                ten_flat = ten_flat * ten.shape()[d] + (rsl.lo[d] + idx[d]);
                if (rsl.ranged[d]) {
                    buf_flat = buf_flat * buf.shape()[region_d] + idx[d];
                    ++region_d;
                }
            }
            if (into_buffer) {
                buf.set(buf_flat, ten.get(ten_flat));
            } else {
                ten.set(ten_flat, buf.get(buf_flat));
            }
            bool wrapped = true;
            for (std::size_t d = rank; d-- > 0;) {
                if (++idx[d] < rsl.extent[d]) {
                    wrapped = false;
                    break;
                }
                idx[d] = 0;
            }
            if (wrapped) return;
        }
    }

    void exec_compute(const Stmt& st) {
        std::vector<ComputeArg> args;
        args.reserve(st.args.size() - 1);
        for (std::size_t i = 0; i + 1 < st.args.size(); ++i) {
            const Expr& a = st.args[i];
            if (a.kind == Expr::Kind::Ref) {
                auto it = locals_.find(a.name);
                if (it != locals_.end()) {
                    args.push_back(ComputeArg::of(it->second));
                    continue;
                }
            }
            args.push_back(ComputeArg::of(eval_scalar(a, env_)));
        }
        const Expr& dest = st.args.back();
        if (dest.kind != Expr::Kind::Ref) {
            throw RuntimeEvalError("compute destination must be a buffer name");
        }
        Tensor& out = local(dest.name);
        lib_.apply(st.fn, args, out);
    }
};

}  // namespace

ResolvedSketch bind_shapes(const Sketch& s, const Binding& b) {
    ResolvedSketch rs;
    rs.sk = s;

    for (const auto& sym : s.decls.symbols) {
        auto it = b.symbol_values.find(sym);
        if (it == b.symbol_values.end()) throw BindError(sym, "no value bound for symbol '" + sym + "'");
        if (it->second <= 0) throw BindError(sym, "symbol '" + sym + "' must be positive");
        rs.scalars[sym] = static_cast<double>(it->second);
    }
    for (const auto& cx : s.decls.constexprs) {
        auto it = b.constexpr_values.find(cx.name);
        if (it != b.constexpr_values.end()) {
            rs.scalars[cx.name] = it->second;  // external binding wins
        } else if (cx.default_value) {
            rs.scalars[cx.name] = static_cast<double>(*cx.default_value);
        } else {
            throw BindError(cx.name, "no value bound for constexpr '" + cx.name + "'");
        }
    }

    ScalarEnv env;
    env.globals = &rs.scalars;

    for (const auto& t : s.decls.tensors) {
        std::vector<std::int64_t> shape;
        for (const auto& d : t.dims) {
            const std::int64_t e = eval_extent(d, env, "dimension of '" + t.name + "'");
            if (e <= 0) throw BindError(t.name, "tensor '" + t.name + "' has non-positive extent");
            shape.push_back(e);
        }
        auto it = b.tensor_values.find(t.name);
        if (it == b.tensor_values.end()) {
            throw BindError(t.name, "no tensor bound for '" + t.name + "'");
        }
        if (it->second.dtype() != t.dtype) {
            throw BindError(t.name, "tensor '" + t.name + "' dtype mismatch");
        }
        if (it->second.shape() != shape) {
            throw BindError(t.name, "tensor '" + t.name + "' shape mismatch");
        }
        rs.tensor_shapes[t.name] = std::move(shape);
    }

    // Check that every body expression can resolve: loop variables are given
    // placeholder values, so unresolvable names surface as BindError now.
    struct Walker {
        ScalarEnv env;
        void walk(const std::vector<Stmt>& body) {
            for (const auto& st : body) {
                switch (st.kind) {
                    case Stmt::Kind::ForLoop:
                        eval_scalar(st.range_start, env);
                        eval_scalar(st.range_stop, env);
                        eval_scalar(st.range_step, env);
                        env.loop_vars.emplace_back(st.loop_var, 0);
                        walk(st.body);
                        env.loop_vars.pop_back();
                        break;
                    case Stmt::Kind::Alloc:
                        for (const auto& d : st.alloc_shape) eval_scalar(d, env);
                        break;
                    case Stmt::Kind::Load:
                    case Stmt::Kind::Store:
                        for (const auto& axis : st.slice.axes) {
                            eval_scalar(axis.lo, env);
                            if (axis.hi) eval_scalar(*axis.hi, env);
                        }
                        break;
                    case Stmt::Kind::Compute:
                        for (std::size_t i = 0; i + 1 < st.args.size(); ++i) {
                            const Expr& a = st.args[i];
                            if (a.kind == Expr::Kind::Ref) continue;  // may be a buffer
                            eval_scalar(a, env);
                        }
                        break;
                }
            }
        }
    };
    Walker w;
    w.env = env;
    w.walk(s.body);

    return rs;
}

std::int64_t trip_count(const ResolvedSketch& rs, const Stmt& loop) {
    if (loop.kind != Stmt::Kind::ForLoop) throw std::invalid_argument("trip_count: not a loop");
    ScalarEnv env;
    env.globals = &rs.scalars;
    const std::int64_t start = eval_extent(loop.range_start, env, "range start");
    const std::int64_t stop = eval_extent(loop.range_stop, env, "range stop");
    const std::int64_t step = eval_extent(loop.range_step, env, "range step");
    if (step <= 0) throw RuntimeEvalError("loop step must be positive");
    if (stop <= start) return 0;
    return (stop - start + step - 1) / step;
}

EvalResult eval_sketch(const ResolvedSketch& rs, const Binding& b, const EvalOptions& opts) {
    Evaluator e(rs, b, opts);
    return e.run();
}

}  // namespace kgen::interp
