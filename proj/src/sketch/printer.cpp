#include "kgen/sketch/printer.hpp"

#include <sstream>
#include <stdexcept>

#include "kgen/util/text.hpp"

namespace kgen::sketch {

namespace {

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub:
            return 1;
        case Expr::Kind::Mul:
            return 2;
        default:
            return 3;  // literals, refs, ceil()
    }
}

void print_expr_rec(const Expr& e, std::ostream& os) {
    switch (e.kind) {
        case Expr::Kind::IntLit:
            os << e.int_value;
            return;
        case Expr::Kind::FloatLit:
            os << util::format_double(e.float_value);
            return;
        case Expr::Kind::Ref:
            os << e.name;
            return;
        case Expr::Kind::CeilDiv:
            os << "ceil(";
            print_expr_rec(e.args[0], os);
            os << ", ";
            print_expr_rec(e.args[1], os);
            os << ")";
            return;
        case Expr::Kind::Add:
        case Expr::Kind::Sub:
        case Expr::Kind::Mul: {
            const int prec = precedence(e.kind);
            const char* op = e.kind == Expr::Kind::Add ? "+" : e.kind == Expr::Kind::Sub ? "-" : "*";
            // The parser is left-associative, so the right operand needs
            // parentheses at equal precedence as well.
            bool lparen = precedence(e.args[0].kind) < prec;
            bool rparen = precedence(e.args[1].kind) <= prec;
            if (lparen) os << "(";
            print_expr_rec(e.args[0], os);
            if (lparen) os << ")";
            os << op;
            if (rparen) os << "(";
            print_expr_rec(e.args[1], os);
            if (rparen) os << ")";
            return;
        }
    }
}

void print_hint_list(const HintSet& hints, std::ostream& os) {
    bool first = true;
    for (const auto& t : hints.tags) {
        if (!first) os << ", ";
        first = false;
        os << '"' << t << '"';
    }
}

void print_slice(const TensorSlice& sl, std::ostream& os) {
    os << sl.tensor << "[";
    bool first = true;
    for (const auto& axis : sl.axes) {
        if (!first) os << ", ";
        first = false;
        print_expr_rec(axis.lo, os);
        if (axis.hi) {
            os << ":";
            print_expr_rec(*axis.hi, os);
        }
    }
    os << "]";
}

void print_stmt(const Stmt& st, int depth, std::ostream& os) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    if (!st.hints.empty() && st.kind != Stmt::Kind::Alloc) {
        os << pad << "@llm_hint(";
        print_hint_list(st.hints, os);
        os << ")\n";
    }
    switch (st.kind) {
        case Stmt::Kind::ForLoop: {
            os << pad << "for " << st.loop_var << " in range(";
            const bool default_step = st.range_step.is_int(1);
            if (st.range_start.is_int(0) && default_step) {
                print_expr_rec(st.range_stop, os);
            } else {
                print_expr_rec(st.range_start, os);
                os << ", ";
                print_expr_rec(st.range_stop, os);
                if (!default_step) {
                    os << ", ";
                    print_expr_rec(st.range_step, os);
                }
            }
            os << "):\n";
            for (const auto& inner : st.body) print_stmt(inner, depth + 1, os);
            return;
        }
        case Stmt::Kind::Alloc: {
            os << pad << st.alloc_name << " = alloc([";
            bool first = true;
            for (const auto& d : st.alloc_shape) {
                if (!first) os << ", ";
                first = false;
                print_expr_rec(d, os);
            }
            os << "]";
            if (!st.hints.empty()) {
                os << ", llm_hint=[";
                print_hint_list(st.hints, os);
                os << "]";
            }
            os << ")\n";
            return;
        }
        case Stmt::Kind::Load:
            os << pad << "load(";
            print_slice(st.slice, os);
            os << " -> " << st.buffer << ")\n";
            return;
        case Stmt::Kind::Store:
            os << pad << "store(" << st.buffer << " -> ";
            print_slice(st.slice, os);
            os << ")\n";
            return;
        case Stmt::Kind::Compute: {
            os << pad << st.fn << "(";
            bool first = true;
            for (const auto& a : st.args) {
                if (!first) os << ", ";
                first = false;
                print_expr_rec(a, os);
            }
            os << ")\n";
            return;
        }
    }
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    print_expr_rec(e, os);
    return os.str();
}

std::string print_sketch(const Sketch& s) {
    if (s.body.empty()) throw std::invalid_argument("print_sketch: sketch body is empty");

    std::ostringstream os;
    os << "sketch " << s.name << " {\n";

    os << "  symbols:";
    for (std::size_t i = 0; i < s.decls.symbols.size(); ++i) {
        os << (i == 0 ? " " : ", ") << s.decls.symbols[i];
    }
    os << ";\n";

    os << "  tensors:";
    for (const auto& t : s.decls.tensors) {
        os << " " << t.name << "[";
        for (std::size_t j = 0; j < t.dims.size(); ++j) {
            if (j) os << ", ";
            print_expr_rec(t.dims[j], os);
        }
        os << "]: " << dtype_name(t.dtype) << ";";
    }
    if (s.decls.tensors.empty()) os << ";";
    os << "\n";

    os << "  constexpr:";
    for (std::size_t i = 0; i < s.decls.constexprs.size(); ++i) {
        const auto& c = s.decls.constexprs[i];
        os << (i == 0 ? " " : ", ") << c.name;
        if (c.default_value) os << " = " << *c.default_value;
    }
    os << ";\n\n";

    for (const auto& st : s.body) print_stmt(st, 1, os);
    os << "}\n";
    return os.str();
}

namespace {
void strip_stmt(Stmt& st) {
    st.hints = HintSet{};
    for (auto& inner : st.body) strip_stmt(inner);
}
}  // namespace

Sketch strip_hints(const Sketch& s) {
    Sketch out = s;
    for (auto& st : out.body) strip_stmt(st);
    return out;
}

}  // namespace kgen::sketch
