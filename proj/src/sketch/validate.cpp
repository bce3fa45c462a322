#include "kgen/sketch/validate.hpp"

#include <map>
#include <optional>

namespace kgen::sketch {

namespace {

enum class NameKind { Symbol, Constexpr, Tensor, LoopVar, Buffer };

struct BufferInfo {
    std::size_t rank = 0;
    bool written = false;
};

class Validator {
public:
    Validator(const Sketch& s, const std::set<std::string>& fns) : sk_(s), fns_(fns) {}

    std::vector<Diagnostic> run() {
        check_decls();
        if (sk_.body.empty()) {
            diag(DiagCode::EmptyBody, 0, "sketch body is empty");
        }
        scopes_.emplace_back();
        check_block(sk_.body);
        scopes_.pop_back();
        return std::move(diags_);
    }

private:
    const Sketch& sk_;
    const std::set<std::string>& fns_;
    std::vector<Diagnostic> diags_;

    std::map<std::string, NameKind> globals_;
    std::map<std::string, BufferInfo> buffers_;  // currently in scope
    std::vector<std::map<std::string, NameKind>> scopes_;

    void diag(DiagCode code, int line, std::string msg) {
        diags_.push_back({code, std::move(msg), line});
    }

    void check_decls() {
        if (!is_identifier(sk_.name)) {
            diag(DiagCode::BadIdentifier, 0, "sketch name '" + sk_.name + "' is not an identifier");
        }
        auto declare = [&](const std::string& n, NameKind k) {
            if (!is_identifier(n)) {
                diag(DiagCode::BadIdentifier, 0, "declaration '" + n + "' is not an identifier");
                return;
            }
            if (globals_.count(n)) {
                diag(DiagCode::DuplicateDeclaration, 0, "'" + n + "' is declared more than once");
                return;
            }
            globals_[n] = k;
        };
        for (const auto& s : sk_.decls.symbols) declare(s, NameKind::Symbol);
        for (const auto& t : sk_.decls.tensors) declare(t.name, NameKind::Tensor);
        for (const auto& c : sk_.decls.constexprs) declare(c.name, NameKind::Constexpr);

        for (const auto& t : sk_.decls.tensors) {
            if (t.dims.empty()) {
                diag(DiagCode::EmptyDims, 0, "tensor '" + t.name + "' has no dimensions");
            }
            for (const auto& d : t.dims) check_dim_expr(d, 0, "dimension of tensor '" + t.name + "'");
        }
    }

    std::optional<NameKind> lookup(const std::string& n) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto f = it->find(n);
            if (f != it->end()) return f->second;
        }
        auto f = globals_.find(n);
        if (f != globals_.end()) return f->second;
        return std::nullopt;
    }

    // Integer expressions in dims/ranges/slices: refs must resolve to
    // symbols, constexpr names or loop indices; no float literals.
    void check_dim_expr(const Expr& e, int line, const std::string& where) {
        switch (e.kind) {
            case Expr::Kind::IntLit:
                return;
            case Expr::Kind::FloatLit:
                diag(DiagCode::BadDimension, line, "float literal in " + where);
                return;
            case Expr::Kind::Ref: {
                auto k = lookup(e.name);
                if (!k) {
                    diag(DiagCode::UndeclaredSymbol, line, "'" + e.name + "' is not declared (" + where + ")");
                } else if (*k == NameKind::Tensor || *k == NameKind::Buffer) {
                    diag(DiagCode::BadDimension, line, "'" + e.name + "' names storage (" + where + ")");
                }
                return;
            }
            default:
                for (const auto& a : e.args) check_dim_expr(a, line, where);
        }
    }

    void check_hints(const HintSet& hints, int line) {
        for (const auto& t : hints.tags) {
            if (!hint_allowed(t)) {
                diag(DiagCode::UnknownHint, line, "unknown hint \"" + t + "\"");
            }
        }
    }

    void check_block(const std::vector<Stmt>& body) {
        scopes_.emplace_back();
        std::vector<std::string> block_buffers;
        for (const auto& st : body) {
            check_hints(st.hints, st.line);
            switch (st.kind) {
                case Stmt::Kind::ForLoop: {
                    check_dim_expr(st.range_start, st.line, "range of loop '" + st.loop_var + "'");
                    check_dim_expr(st.range_stop, st.line, "range of loop '" + st.loop_var + "'");
                    check_dim_expr(st.range_step, st.line, "range of loop '" + st.loop_var + "'");
                    if (!is_identifier(st.loop_var)) {
                        diag(DiagCode::BadIdentifier, st.line, "loop index '" + st.loop_var + "'");
                    } else if (lookup(st.loop_var)) {
                        diag(DiagCode::ShadowedIndex, st.line,
                             "loop index '" + st.loop_var + "' shadows an enclosing declaration");
                    }
                    scopes_.emplace_back();
                    scopes_.back()[st.loop_var] = NameKind::LoopVar;
                    check_block(st.body);
                    scopes_.pop_back();
                    break;
                }
                case Stmt::Kind::Alloc: {
                    if (st.alloc_shape.empty()) {
                        diag(DiagCode::EmptyDims, st.line, "alloc '" + st.alloc_name + "' has no shape");
                    }
                    for (const auto& d : st.alloc_shape) {
                        check_dim_expr(d, st.line, "shape of alloc '" + st.alloc_name + "'");
                    }
                    if (!is_identifier(st.alloc_name)) {
                        diag(DiagCode::BadIdentifier, st.line, "alloc name '" + st.alloc_name + "'");
                    } else if (lookup(st.alloc_name)) {
                        diag(DiagCode::DuplicateDeclaration, st.line,
                             "alloc '" + st.alloc_name + "' shadows an existing name");
                    } else {
                        scopes_.back()[st.alloc_name] = NameKind::Buffer;
                        buffers_[st.alloc_name] = BufferInfo{st.alloc_shape.size(), false};
                        block_buffers.push_back(st.alloc_name);
                    }
                    break;
                }
                case Stmt::Kind::Load: {
                    check_slice(st.slice, st.line);
                    auto* buf = buffer_of(st.buffer, st.line, "load destination");
                    if (buf) {
                        check_region_rank(st.slice, buf->rank, st.line, "load into '" + st.buffer + "'");
                        buf->written = true;
                    }
                    break;
                }
                case Stmt::Kind::Store: {
                    check_slice(st.slice, st.line);
                    auto* buf = buffer_of(st.buffer, st.line, "store source");
                    if (buf) {
                        check_region_rank(st.slice, buf->rank, st.line, "store from '" + st.buffer + "'");
                        if (!buf->written) {
                            diag(DiagCode::StoreBeforeWrite, st.line,
                                 "buffer '" + st.buffer + "' is stored before anything was written to it");
                        }
                    }
                    break;
                }
                case Stmt::Kind::Compute: {
                    if (!fns_.count(st.fn)) {
                        diag(DiagCode::UnknownFunction, st.line,
                             "unknown compute function '" + st.fn + "'");
                    }
                    if (st.args.size() < 2) {
                        diag(DiagCode::BadComputeDest, st.line,
                             "compute '" + st.fn + "' needs at least one input and a destination");
                        break;
                    }
                    for (std::size_t i = 0; i + 1 < st.args.size(); ++i) {
                        check_compute_input(st.args[i], st.line);
                    }
                    const Expr& dest = st.args.back();
                    if (dest.kind != Expr::Kind::Ref) {
                        diag(DiagCode::BadComputeDest, st.line,
                             "destination of '" + st.fn + "' must be a buffer name");
                    } else {
                        auto* buf = buffer_of(dest.name, st.line, "compute destination");
                        if (buf) buf->written = true;
                    }
                    break;
                }
            }
        }
        for (const auto& n : block_buffers) buffers_.erase(n);
        scopes_.pop_back();
    }

    BufferInfo* buffer_of(const std::string& name, int line, const std::string& role) {
        auto k = lookup(name);
        if (!k || *k != NameKind::Buffer) {
            diag(DiagCode::UseBeforeAlloc, line, role + " '" + name + "' is not an alloc'd buffer in scope");
            return nullptr;
        }
        auto it = buffers_.find(name);
        return it == buffers_.end() ? nullptr : &it->second;
    }

    void check_slice(const TensorSlice& sl, int line) {
        const TensorSpec* spec = sk_.find_tensor(sl.tensor);
        if (!spec) {
            auto k = lookup(sl.tensor);
            if (!k) {
                diag(DiagCode::UndeclaredSymbol, line, "'" + sl.tensor + "' is not declared");
            } else {
                diag(DiagCode::RankMismatch, line, "'" + sl.tensor + "' is not a tensor");
            }
            return;
        }
        if (sl.axes.size() != spec->dims.size()) {
            diag(DiagCode::RankMismatch, line,
                 "slice of '" + sl.tensor + "' has " + std::to_string(sl.axes.size()) +
                     " axes but the tensor has rank " + std::to_string(spec->dims.size()));
        }
        for (const auto& axis : sl.axes) {
            check_dim_expr(axis.lo, line, "slice of '" + sl.tensor + "'");
            if (axis.hi) check_dim_expr(*axis.hi, line, "slice of '" + sl.tensor + "'");
        }
    }

    void check_region_rank(const TensorSlice& sl, std::size_t buffer_rank, int line,
                           const std::string& what) {
        std::size_t region_rank = 0;
        for (const auto& a : sl.axes) {
            if (a.is_range()) ++region_rank;
        }
        if (region_rank == 0 && buffer_rank == 1) return;  // scalar transfer
        if (region_rank != buffer_rank) {
            diag(DiagCode::RankMismatch, line,
                 what + ": slice region has rank " + std::to_string(region_rank) +
                     " but the buffer has rank " + std::to_string(buffer_rank));
        }
    }

    void check_compute_input(const Expr& a, int line) {
        if (a.kind == Expr::Kind::Ref) {
            auto k = lookup(a.name);
            if (!k) {
                diag(DiagCode::UndeclaredSymbol, line, "'" + a.name + "' is not declared");
            } else if (*k == NameKind::Tensor) {
                diag(DiagCode::UseBeforeAlloc, line,
                     "tensor '" + a.name + "' must be loaded into a buffer before compute");
            }
            return;
        }
        // Scalar expression: refs inside must be scalars.
        if (a.kind == Expr::Kind::IntLit || a.kind == Expr::Kind::FloatLit) return;
        for (const auto& sub : a.args) check_scalar_ref(sub, line);
    }

    void check_scalar_ref(const Expr& e, int line) {
        switch (e.kind) {
            case Expr::Kind::Ref: {
                auto k = lookup(e.name);
                if (!k) {
                    diag(DiagCode::UndeclaredSymbol, line, "'" + e.name + "' is not declared");
                } else if (*k == NameKind::Tensor || *k == NameKind::Buffer) {
                    diag(DiagCode::BadDimension, line,
                         "'" + e.name + "' names storage inside a scalar expression");
                }
                return;
            }
            case Expr::Kind::IntLit:
            case Expr::Kind::FloatLit:
                return;
            default:
                for (const auto& a : e.args) check_scalar_ref(a, line);
        }
    }
};

}  // namespace

std::vector<Diagnostic> validate_sketch(const Sketch& s, const std::set<std::string>& known_fns) {
    Validator v(s, known_fns);
    return v.run();
}

}  // namespace kgen::sketch
