#pragma once

#include <random>
#include <string>
#include <vector>

#include "kgen/sketch/ast.hpp"

namespace kgen::testsupport {

// Random valid sketches for round-trip property tests. The generator mirrors
// the parser's scoping rules (no shadowing, alloc before use, write before
// store), so every produced sketch both validates and reparses.
class SketchGen {
public:
    explicit SketchGen(std::uint64_t seed) : rng_(seed) {}

    kgen::sketch::Sketch generate() {
        using namespace kgen::sketch;
        Sketch sk;
        sk.name = "gen_" + std::to_string(counter_++);
        buffers_.clear();
        written_.clear();
        loop_vars_.clear();

        const int nsym = pick(1, 3);
        for (int i = 0; i < nsym; ++i) sk.decls.symbols.push_back("S" + std::to_string(i));
        const int ncx = pick(0, 2);
        for (int i = 0; i < ncx; ++i) {
            ConstexprDecl c;
            c.name = "C" + std::to_string(i);
            if (flip()) c.default_value = pick(1, 16);
            sk.decls.constexprs.push_back(c);
        }
        const int nten = pick(1, 3);
        for (int i = 0; i < nten; ++i) {
            TensorSpec t;
            t.name = "T" + std::to_string(i);
            const int rank = pick(1, 3);
            for (int d = 0; d < rank; ++d) t.dims.push_back(scalar_ref(sk));
            t.dtype = flip() ? DType::F32 : (flip() ? DType::F16 : DType::I32);
            sk.decls.tensors.push_back(t);
        }
        sk.body = gen_block(sk, 0);
        if (sk.body.empty()) sk.body.push_back(gen_alloc());
        return sk;
    }

private:
    std::mt19937_64 rng_;
    int counter_ = 0;
    int name_counter_ = 0;
    std::vector<std::pair<std::string, int>> buffers_;  // name, rank
    std::vector<std::string> written_;
    std::vector<std::string> loop_vars_;

    int pick(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }
    bool flip() { return pick(0, 1) == 1; }

    kgen::sketch::Expr scalar_ref(const kgen::sketch::Sketch& sk) {
        using kgen::sketch::Expr;
        const int c = pick(0, 2);
        if (c == 0 && !sk.decls.symbols.empty()) {
            return Expr::ref(sk.decls.symbols[static_cast<std::size_t>(pick(
                0, static_cast<int>(sk.decls.symbols.size()) - 1))]);
        }
        if (c == 1 && !sk.decls.constexprs.empty()) {
            return Expr::ref(sk.decls.constexprs[static_cast<std::size_t>(pick(
                                                     0, static_cast<int>(sk.decls.constexprs.size()) - 1))]
                                 .name);
        }
        return Expr::integer(pick(1, 8));
    }

    kgen::sketch::Expr index_expr(const kgen::sketch::Sketch& sk) {
        using kgen::sketch::Expr;
        if (!loop_vars_.empty() && flip()) {
            Expr v = Expr::ref(loop_vars_[static_cast<std::size_t>(
                pick(0, static_cast<int>(loop_vars_.size()) - 1))]);
            if (flip()) return Expr::binary(Expr::Kind::Mul, std::move(v), Expr::integer(pick(1, 4)));
            return v;
        }
        if (flip()) return scalar_ref(sk);
        return Expr::integer(pick(0, 4));
    }

    kgen::sketch::HintSet maybe_hints() {
        kgen::sketch::HintSet h;
        if (pick(0, 3) == 0) {
            static const char* tags[] = {"parallel", "pipeline", "vectorize", "unroll",
                                         "fast", "fastest", "accumulator", "x-custom"};
            const int n = pick(1, 3);
            for (int i = 0; i < n; ++i) h.tags.insert(tags[pick(0, 7)]);
        }
        return h;
    }

    kgen::sketch::Stmt gen_alloc() {
        using namespace kgen::sketch;
        Stmt st;
        st.kind = Stmt::Kind::Alloc;
        st.alloc_name = "a" + std::to_string(name_counter_++);
        const int rank = pick(1, 2);
        for (int d = 0; d < rank; ++d) st.alloc_shape.push_back(Expr::integer(pick(1, 8)));
        st.hints = maybe_hints();
        buffers_.emplace_back(st.alloc_name, rank);
        return st;
    }

    kgen::sketch::TensorSlice gen_slice(const kgen::sketch::Sketch& sk, int region_rank) {
        using namespace kgen::sketch;
        // Choose a tensor with rank >= region_rank.
        std::vector<const TensorSpec*> ok;
        for (const auto& t : sk.decls.tensors) {
            if (static_cast<int>(t.dims.size()) >= region_rank) ok.push_back(&t);
        }
        const TensorSpec& t = *ok[static_cast<std::size_t>(pick(0, static_cast<int>(ok.size()) - 1))];
        TensorSlice sl;
        sl.tensor = t.name;
        const int rank = static_cast<int>(t.dims.size());
        // Mark exactly region_rank axes as ranges.
        std::vector<bool> ranged(static_cast<std::size_t>(rank), false);
        int placed = 0;
        for (int d = 0; d < rank && placed < region_rank; ++d) {
            if (rank - d <= region_rank - placed || flip()) {
                ranged[static_cast<std::size_t>(d)] = true;
                ++placed;
            }
        }
        for (int d = 0; d < rank; ++d) {
            SliceAxis axis;
            if (ranged[static_cast<std::size_t>(d)]) {
                axis.lo = Expr::integer(0);
                axis.hi = scalar_ref(sk);
            } else {
                axis.lo = index_expr(sk);
            }
            sl.axes.push_back(std::move(axis));
        }
        return sl;
    }

    bool tensor_with_rank_at_least(const kgen::sketch::Sketch& sk, int r) const {
        for (const auto& t : sk.decls.tensors) {
            if (static_cast<int>(t.dims.size()) >= r) return true;
        }
        return false;
    }

    std::vector<kgen::sketch::Stmt> gen_block(const kgen::sketch::Sketch& sk, int depth) {
        using namespace kgen::sketch;
        std::vector<Stmt> body;
        const std::size_t buffers_before = buffers_.size();
        const int n = pick(1, 4);
        for (int i = 0; i < n; ++i) {
            const int kind = pick(0, 5);
            if (kind == 0 && depth < 2) {
                Stmt st;
                st.kind = Stmt::Kind::ForLoop;
                st.loop_var = "i" + std::to_string(name_counter_++);
                st.range_stop = scalar_ref(sk);
                if (flip()) st.range_start = Expr::integer(0);
                if (pick(0, 3) == 0) {
                    st.range_start = Expr::integer(0);
                    st.range_stop = Expr::binary(Expr::Kind::CeilDiv, scalar_ref(sk),
                                                 Expr::integer(pick(1, 4)));
                }
                st.hints = maybe_hints();
                loop_vars_.push_back(st.loop_var);
                st.body = gen_block(sk, depth + 1);
                loop_vars_.pop_back();
                if (st.body.empty()) continue;
                body.push_back(std::move(st));
            } else if (kind == 1 || buffers_.empty()) {
                body.push_back(gen_alloc());
            } else if (kind == 2) {
                // load: pick a buffer, slice region rank must match
                const auto& [name, rank] = buffers_[static_cast<std::size_t>(
                    pick(0, static_cast<int>(buffers_.size()) - 1))];
                if (!tensor_with_rank_at_least(sk, rank)) continue;
                Stmt st;
                st.kind = Stmt::Kind::Load;
                st.buffer = name;
                st.slice = gen_slice(sk, rank);
                st.hints = maybe_hints();
                written_.push_back(name);
                body.push_back(std::move(st));
            } else if (kind == 3 && !written_.empty()) {
                const std::string name = written_[static_cast<std::size_t>(
                    pick(0, static_cast<int>(written_.size()) - 1))];
                int rank = 1;
                for (const auto& [bn, br] : buffers_) {
                    if (bn == name) rank = br;
                }
                if (!tensor_with_rank_at_least(sk, rank)) continue;
                Stmt st;
                st.kind = Stmt::Kind::Store;
                st.buffer = name;
                st.slice = gen_slice(sk, rank);
                body.push_back(std::move(st));
            } else {
                static const char* fns[] = {"add", "mul", "sub", "max", "relu", "sqrt"};
                const char* fn = fns[pick(0, 5)];
                const bool unary = std::string(fn) == "relu" || std::string(fn) == "sqrt";
                Stmt st;
                st.kind = Stmt::Kind::Compute;
                st.fn = fn;
                auto buffer_ref = [&] {
                    return Expr::ref(buffers_[static_cast<std::size_t>(
                                                  pick(0, static_cast<int>(buffers_.size()) - 1))]
                                         .first);
                };
                st.args.push_back(buffer_ref());
                if (!unary) {
                    if (pick(0, 2) == 0) {
                        st.args.push_back(flip() ? Expr::floating(0.5) : scalar_ref(sk));
                    } else {
                        st.args.push_back(buffer_ref());
                    }
                }
                Expr dest = buffer_ref();
                written_.push_back(dest.name);
                st.args.push_back(std::move(dest));
                st.hints = maybe_hints();
                body.push_back(std::move(st));
            }
        }
        // Names alloc'd in this block go out of scope with it.
        for (std::size_t b = buffers_.size(); b-- > buffers_before;) {
            const std::string& name = buffers_[b].first;
            std::erase(written_, name);
            buffers_.pop_back();
        }
        return body;
    }
};

}  // namespace kgen::testsupport
