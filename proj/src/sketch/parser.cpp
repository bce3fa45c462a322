#include "kgen/sketch/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

namespace kgen::sketch {

namespace {

enum class Tok {
    Ident, Int, Float, Str,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Comma, Colon, Semicolon, Arrow, Assign, At, Plus, Minus, Star,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long long ival = 0;
    double fval = 0.0;
    int line = 0;
    int col = 0;
};

struct Line {
    int number = 0;
    int indent = 0;
    std::vector<Token> toks;
};

[[noreturn]] void syntax_error(int line, int col, const std::string& msg) {
    throw ParseError(ParseError::Kind::Syntax, line, col, msg);
}

std::string tok_desc(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of line";
        case Tok::Str: return "string \"" + t.text + "\"";
        default: return "'" + t.text + "'";
    }
}

// ---------------------------------------------------------------------------
// Lexer: one token vector per logical line, comments stripped, blank lines
// skipped, indentation measured in spaces (tabs rejected).
// ---------------------------------------------------------------------------

std::vector<Line> lex(std::string_view text) {
    std::vector<Line> lines;
    int line_no = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    while (i <= n) {
        // Measure indentation.
        int indent = 0;
        bool blank = true;
        Line line;
        line.number = line_no;
        while (i < n && text[i] != '\n') {
            char c = text[i];
            if (c == ' ') {
                ++indent;
                ++i;
            } else if (c == '\t') {
                syntax_error(line_no, indent + 1, "tab in indentation; use spaces");
            } else if (c == '\r') {
                ++i;
            } else {
                blank = false;
                break;
            }
        }
        line.indent = indent;
        int col = indent + 1;

        while (i < n && text[i] != '\n') {
            char c = text[i];
            if (c == ' ' || c == '\r') {
                ++i;
                ++col;
                continue;
            }
            if (c == '\t') syntax_error(line_no, col, "tab character");
            if (c == '#') {  // comment to end of line
                while (i < n && text[i] != '\n') ++i;
                break;
            }
            Token t;
            t.line = line_no;
            t.col = col;
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
                t.kind = Tok::Ident;
                t.text = std::string(text.substr(i, j - i));
                col += static_cast<int>(j - i);
                i = j;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                bool is_float = false;
                while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                if (j < n && text[j] == '.') {
                    is_float = true;
                    ++j;
                    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                }
                if (j < n && (text[j] == 'e' || text[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
                    if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
                        is_float = true;
                        j = k;
                        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                    }
                }
                t.text = std::string(text.substr(i, j - i));
                if (is_float) {
                    t.kind = Tok::Float;
                    t.fval = std::strtod(t.text.c_str(), nullptr);
                } else {
                    t.kind = Tok::Int;
                    t.ival = std::strtoll(t.text.c_str(), nullptr, 10);
                }
                col += static_cast<int>(j - i);
                i = j;
            } else if (c == '"') {
                std::size_t j = i + 1;
                std::string value;
                while (j < n && text[j] != '"' && text[j] != '\n') value.push_back(text[j++]);
                if (j >= n || text[j] != '"') syntax_error(line_no, col, "unterminated string");
                t.kind = Tok::Str;
                t.text = std::move(value);
                col += static_cast<int>(j + 1 - i);
                i = j + 1;
            } else if (c == '-' && i + 1 < n && text[i + 1] == '>') {
                t.kind = Tok::Arrow;
                t.text = "->";
                i += 2;
                col += 2;
            } else {
                switch (c) {
                    case '(': t.kind = Tok::LParen; break;
                    case ')': t.kind = Tok::RParen; break;
                    case '[': t.kind = Tok::LBracket; break;
                    case ']': t.kind = Tok::RBracket; break;
                    case '{': t.kind = Tok::LBrace; break;
                    case '}': t.kind = Tok::RBrace; break;
                    case ',': t.kind = Tok::Comma; break;
                    case ':': t.kind = Tok::Colon; break;
                    case ';': t.kind = Tok::Semicolon; break;
                    case '=': t.kind = Tok::Assign; break;
                    case '@': t.kind = Tok::At; break;
                    case '+': t.kind = Tok::Plus; break;
                    case '-': t.kind = Tok::Minus; break;
                    case '*': t.kind = Tok::Star; break;
                    default:
                        syntax_error(line_no, col, std::string("unexpected character '") + c + "'");
                }
                t.text = std::string(1, c);
                ++i;
                ++col;
            }
            line.toks.push_back(std::move(t));
        }

        if (!blank && !line.toks.empty()) lines.push_back(std::move(line));
        if (i >= n) break;
        ++i;  // consume '\n'
        ++line_no;
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Token cursor over a single line.
// ---------------------------------------------------------------------------

class Cursor {
public:
    Cursor(const Line& line) : line_(line) {}

    const Token& peek(int ahead = 0) const {
        static const Token end_tok{};
        std::size_t idx = pos_ + static_cast<std::size_t>(ahead);
        if (idx >= line_.toks.size()) {
            // Report end-of-line position from the last real token.
            return end_sentinel();
        }
        return line_.toks[idx];
    }

    const Token& end_sentinel() const {
        end_.kind = Tok::End;
        end_.line = line_.number;
        end_.col = line_.toks.empty() ? line_.indent + 1
                                      : line_.toks.back().col + static_cast<int>(line_.toks.back().text.size());
        return end_;
    }

    bool at(Tok k) const { return peek().kind == k; }
    bool at_ident(std::string_view kw) const {
        return peek().kind == Tok::Ident && peek().text == kw;
    }
    bool done() const { return pos_ >= line_.toks.size(); }

    Token next() {
        const Token& t = peek();
        if (t.kind != Tok::End) ++pos_;
        return t;
    }

    Token expect(Tok k, const std::string& what) {
        const Token& t = peek();
        if (t.kind != k) syntax_error(t.line, t.col, "expected " + what + ", found " + tok_desc(t));
        return next();
    }

    void expect_done() {
        if (!done()) {
            const Token& t = peek();
            syntax_error(t.line, t.col, "unexpected trailing " + tok_desc(t));
        }
    }

    int line_number() const { return line_.number; }

private:
    const Line& line_;
    std::size_t pos_ = 0;
    mutable Token end_;
};

// ---------------------------------------------------------------------------
// Parser with integrated scope resolution.
// ---------------------------------------------------------------------------

enum class NameKind { Symbol, Constexpr, Tensor, LoopVar, Buffer };

class Parser {
public:
    explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

    Sketch parse() {
        if (lines_.empty()) syntax_error(1, 1, "empty input; expected 'sketch <name> {'");

        Sketch sk;
        {
            Cursor c(lines_[idx_]);
            Token kw = c.expect(Tok::Ident, "'sketch'");
            if (kw.text != "sketch") syntax_error(kw.line, kw.col, "expected 'sketch', found '" + kw.text + "'");
            Token name = c.expect(Tok::Ident, "sketch name");
            sk.name = name.text;
            c.expect(Tok::LBrace, "'{'");
            c.expect_done();
            sketch_indent_ = lines_[idx_].indent;
            ++idx_;
        }

        parse_header(sk);
        declare_globals(sk);

        if (idx_ < lines_.size() && !at_closing_brace()) {
            sk.body = parse_block(sketch_indent_, sk);
        }
        if (idx_ >= lines_.size()) {
            syntax_error(lines_.back().number + 1, 1, "expected '}' to close sketch");
        }
        {
            Cursor c(lines_[idx_]);
            c.expect(Tok::RBrace, "'}'");
            c.expect_done();
            ++idx_;
        }
        if (idx_ < lines_.size()) {
            const Line& extra = lines_[idx_];
            syntax_error(extra.number, extra.indent + 1, "content after closing '}'");
        }
        if (sk.body.empty()) {
            syntax_error(lines_.back().number, 1, "sketch body is empty");
        }
        return sk;
    }

private:
    std::vector<Line> lines_;
    std::size_t idx_ = 0;
    int sketch_indent_ = 0;

    std::map<std::string, NameKind> globals_;
    std::vector<std::map<std::string, NameKind>> scopes_;

    bool at_closing_brace() const {
        if (idx_ >= lines_.size()) return false;
        const Line& l = lines_[idx_];
        return l.toks.size() == 1 && l.toks[0].kind == Tok::RBrace;
    }

    bool line_starts_section(std::string_view kw) const {
        if (idx_ >= lines_.size()) return false;
        const Line& l = lines_[idx_];
        return l.toks.size() >= 2 && l.toks[0].kind == Tok::Ident && l.toks[0].text == kw &&
               l.toks[1].kind == Tok::Colon;
    }

    void parse_header(Sketch& sk) {
        if (line_starts_section("symbols")) parse_symbols(sk);
        if (line_starts_section("tensors")) parse_tensors(sk);
        if (line_starts_section("constexpr")) parse_constexprs(sk);
    }

    void parse_symbols(Sketch& sk) {
        Cursor c(lines_[idx_++]);
        c.next();  // symbols
        c.expect(Tok::Colon, "':'");
        bool first = true;
        while (!c.done() && !c.at(Tok::Semicolon)) {
            if (!first) c.expect(Tok::Comma, "','");
            first = false;
            Token id = c.expect(Tok::Ident, "symbol name");
            sk.decls.symbols.push_back(id.text);
        }
        if (c.at(Tok::Semicolon)) c.next();
        c.expect_done();
    }

    void parse_tensors(Sketch& sk) {
        Cursor c(lines_[idx_++]);
        c.next();  // tensors
        c.expect(Tok::Colon, "':'");
        while (!c.done()) {
            if (c.at(Tok::Semicolon)) {
                c.next();
                continue;
            }
            TensorSpec ts;
            Token id = c.expect(Tok::Ident, "tensor name");
            ts.name = id.text;
            c.expect(Tok::LBracket, "'['");
            for (;;) {
                ts.dims.push_back(parse_expr(c));
                if (c.at(Tok::Comma)) {
                    c.next();
                    continue;
                }
                break;
            }
            c.expect(Tok::RBracket, "']'");
            c.expect(Tok::Colon, "':'");
            Token dt = c.expect(Tok::Ident, "dtype (f16/f32/i32)");
            auto d = dtype_from(dt.text);
            if (!d) syntax_error(dt.line, dt.col, "unknown dtype '" + dt.text + "'");
            ts.dtype = *d;
            sk.decls.tensors.push_back(std::move(ts));
            if (c.at(Tok::Semicolon)) {
                c.next();
            } else {
                break;
            }
        }
        c.expect_done();
    }

    void parse_constexprs(Sketch& sk) {
        Cursor c(lines_[idx_++]);
        c.next();  // constexpr
        c.expect(Tok::Colon, "':'");
        bool first = true;
        while (!c.done() && !c.at(Tok::Semicolon)) {
            if (!first) c.expect(Tok::Comma, "','");
            first = false;
            Token id = c.expect(Tok::Ident, "constexpr name");
            ConstexprDecl decl;
            decl.name = id.text;
            if (c.at(Tok::Assign)) {
                c.next();
                Token v = c.expect(Tok::Int, "integer default value");
                decl.default_value = v.ival;
            }
            sk.decls.constexprs.push_back(std::move(decl));
        }
        if (c.at(Tok::Semicolon)) c.next();
        c.expect_done();
    }

    void declare_globals(const Sketch& sk) {
        auto add = [&](const std::string& n, NameKind k, int line) {
            if (globals_.count(n)) {
                syntax_error(line, 1, "duplicate declaration of '" + n + "'");
            }
            globals_[n] = k;
        };
        int hdr = lines_.empty() ? 1 : lines_[0].number;
        for (const auto& s : sk.decls.symbols) add(s, NameKind::Symbol, hdr);
        for (const auto& t : sk.decls.tensors) add(t.name, NameKind::Tensor, hdr);
        for (const auto& cx : sk.decls.constexprs) add(cx.name, NameKind::Constexpr, hdr);

        // Tensor dimension expressions may reference symbols and constexpr
        // names from any header section, so check after all are declared.
        for (const auto& t : sk.decls.tensors) {
            for (const auto& d : t.dims) check_scalar_expr(d, hdr, /*allow_float=*/false);
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

    void check_scalar_expr(const Expr& e, int line, bool allow_float = true) const {
        switch (e.kind) {
            case Expr::Kind::IntLit:
                return;
            case Expr::Kind::FloatLit:
                if (!allow_float) syntax_error(line, 1, "float literal not allowed here");
                return;
            case Expr::Kind::Ref: {
                auto k = lookup(e.name);
                if (!k) {
                    throw ParseError(ParseError::Kind::UndeclaredSymbol, line, 1,
                                     "undeclared identifier '" + e.name + "'");
                }
                if (*k == NameKind::Tensor || *k == NameKind::Buffer) {
                    syntax_error(line, 1, "'" + e.name + "' names storage; expected a scalar");
                }
                return;
            }
            default:
                for (const auto& a : e.args) check_scalar_expr(a, line, allow_float);
        }
    }

    void declare_local(const Token& id, NameKind k) {
        if (lookup(id.text)) {
            syntax_error(id.line, id.col, "'" + id.text + "' shadows an existing declaration");
        }
        scopes_.back()[id.text] = k;
    }

    // Parses statements at one indentation level; recursion handles loops.
    std::vector<Stmt> parse_block(int parent_indent, const Sketch& sk) {
        if (idx_ >= lines_.size() || at_closing_brace()) {
            const Line& prev = lines_[idx_ > 0 ? idx_ - 1 : 0];
            syntax_error(prev.number, 1, "expected an indented block");
        }
        const int block_indent = lines_[idx_].indent;
        if (block_indent <= parent_indent) {
            syntax_error(lines_[idx_].number, block_indent + 1, "expected an indented block");
        }

        scopes_.emplace_back();
        std::vector<Stmt> stmts;
        HintSet pending;
        int pending_line = 0;

        while (idx_ < lines_.size() && !at_closing_brace() && lines_[idx_].indent >= block_indent) {
            const Line& line = lines_[idx_];
            if (line.indent > block_indent) {
                syntax_error(line.number, line.indent + 1, "unexpected indentation");
            }
            Cursor c(line);
            if (c.at(Tok::At)) {
                parse_hint_line(c, pending);
                pending_line = line.number;
                ++idx_;
                continue;
            }
            Stmt st = parse_statement(c, block_indent, sk);
            st.hints.merge(pending);
            pending = HintSet{};
            stmts.push_back(std::move(st));
        }

        if (!pending.empty()) {
            syntax_error(pending_line, 1, "@llm_hint is not followed by a statement");
        }
        scopes_.pop_back();
        return stmts;
    }

    void parse_hint_line(Cursor& c, HintSet& hints) {
        c.expect(Tok::At, "'@'");
        Token kw = c.expect(Tok::Ident, "'llm_hint'");
        if (kw.text != "llm_hint") syntax_error(kw.line, kw.col, "expected 'llm_hint'");
        c.expect(Tok::LParen, "'('");
        bool first = true;
        while (!c.at(Tok::RParen)) {
            if (!first) c.expect(Tok::Comma, "','");
            first = false;
            Token tag = c.expect(Tok::Str, "hint string");
            if (!hint_allowed(tag.text)) {
                throw ParseError(ParseError::Kind::UnknownHint, tag.line, tag.col,
                                 "unknown hint \"" + tag.text + "\"");
            }
            hints.tags.insert(tag.text);
        }
        c.expect(Tok::RParen, "')'");
        c.expect_done();
    }

    Stmt parse_statement(Cursor& c, int indent, const Sketch& sk) {
        const Token& head = c.peek();
        if (head.kind != Tok::Ident) {
            syntax_error(head.line, head.col, "expected a statement, found " + tok_desc(head));
        }
        if (head.text == "for") return parse_for(c, indent, sk);
        if (head.text == "load") return parse_load(c, sk);
        if (head.text == "store") return parse_store(c, sk);
        if (c.peek(1).kind == Tok::Assign) return parse_alloc(c);
        if (c.peek(1).kind == Tok::LParen) return parse_compute(c);
        syntax_error(head.line, head.col, "expected a statement, found '" + head.text + "'");
    }

    Stmt parse_for(Cursor& c, int indent, const Sketch& sk) {
        Stmt st;
        st.kind = Stmt::Kind::ForLoop;
        st.line = c.line_number();
        c.next();  // for
        Token var = c.expect(Tok::Ident, "loop variable");
        Token in_kw = c.expect(Tok::Ident, "'in'");
        if (in_kw.text != "in") syntax_error(in_kw.line, in_kw.col, "expected 'in'");
        Token range_kw = c.expect(Tok::Ident, "'range'");
        if (range_kw.text != "range") syntax_error(range_kw.line, range_kw.col, "expected 'range'");
        c.expect(Tok::LParen, "'('");
        std::vector<Expr> args;
        args.push_back(parse_expr(c));
        while (c.at(Tok::Comma)) {
            c.next();
            args.push_back(parse_expr(c));
        }
        c.expect(Tok::RParen, "')'");
        c.expect(Tok::Colon, "':'");
        c.expect_done();
        if (args.size() > 3) syntax_error(st.line, 1, "range() takes at most 3 arguments");
        if (args.size() == 1) {
            st.range_stop = std::move(args[0]);
        } else {
            st.range_start = std::move(args[0]);
            st.range_stop = std::move(args[1]);
            if (args.size() == 3) st.range_step = std::move(args[2]);
        }
        check_scalar_expr(st.range_start, st.line, false);
        check_scalar_expr(st.range_stop, st.line, false);
        check_scalar_expr(st.range_step, st.line, false);

        ++idx_;
        scopes_.emplace_back();
        declare_local(var, NameKind::LoopVar);
        st.loop_var = var.text;
        st.body = parse_block(indent, sk);
        scopes_.pop_back();
        return st;
    }

    Stmt parse_alloc(Cursor& c) {
        Stmt st;
        st.kind = Stmt::Kind::Alloc;
        st.line = c.line_number();
        Token dest = c.expect(Tok::Ident, "buffer name");
        c.expect(Tok::Assign, "'='");
        Token kw = c.expect(Tok::Ident, "'alloc'");
        if (kw.text != "alloc") syntax_error(kw.line, kw.col, "expected 'alloc'");
        c.expect(Tok::LParen, "'('");
        c.expect(Tok::LBracket, "'['");
        for (;;) {
            st.alloc_shape.push_back(parse_expr(c));
            if (c.at(Tok::Comma)) {
                c.next();
                continue;
            }
            break;
        }
        c.expect(Tok::RBracket, "']'");
        if (c.at(Tok::Comma)) {
            c.next();
            Token hk = c.expect(Tok::Ident, "'llm_hint'");
            if (hk.text != "llm_hint") syntax_error(hk.line, hk.col, "expected 'llm_hint'");
            c.expect(Tok::Assign, "'='");
            c.expect(Tok::LBracket, "'['");
            bool first = true;
            while (!c.at(Tok::RBracket)) {
                if (!first) c.expect(Tok::Comma, "','");
                first = false;
                Token tag = c.expect(Tok::Str, "hint string");
                if (!hint_allowed(tag.text)) {
                    throw ParseError(ParseError::Kind::UnknownHint, tag.line, tag.col,
                                     "unknown hint \"" + tag.text + "\"");
                }
                st.hints.tags.insert(tag.text);
            }
            c.expect(Tok::RBracket, "']'");
        }
        c.expect(Tok::RParen, "')'");
        c.expect_done();
        for (const auto& d : st.alloc_shape) check_scalar_expr(d, st.line, false);
        declare_local(dest, NameKind::Buffer);
        st.alloc_name = dest.text;
        ++idx_;
        return st;
    }

    TensorSlice parse_slice(Cursor& c, const Sketch& sk) {
        TensorSlice sl;
        Token name = c.expect(Tok::Ident, "tensor name");
        auto k = lookup(name.text);
        if (!k) {
            throw ParseError(ParseError::Kind::UndeclaredSymbol, name.line, name.col,
                             "undeclared identifier '" + name.text + "'");
        }
        if (*k != NameKind::Tensor) {
            syntax_error(name.line, name.col, "'" + name.text + "' is not a declared tensor");
        }
        sl.tensor = name.text;
        c.expect(Tok::LBracket, "'['");
        for (;;) {
            SliceAxis axis;
            axis.lo = parse_expr(c);
            if (c.at(Tok::Colon)) {
                c.next();
                axis.hi = parse_expr(c);
            }
            check_scalar_expr(axis.lo, name.line, false);
            if (axis.hi) check_scalar_expr(*axis.hi, name.line, false);
            sl.axes.push_back(std::move(axis));
            if (c.at(Tok::Comma)) {
                c.next();
                continue;
            }
            break;
        }
        c.expect(Tok::RBracket, "']'");
        (void)sk;
        return sl;
    }

    std::string expect_buffer(Cursor& c) {
        Token id = c.expect(Tok::Ident, "buffer name");
        auto k = lookup(id.text);
        if (!k) {
            throw ParseError(ParseError::Kind::UndeclaredSymbol, id.line, id.col,
                             "undeclared identifier '" + id.text + "'");
        }
        if (*k != NameKind::Buffer) {
            syntax_error(id.line, id.col, "'" + id.text + "' is not an alloc'd buffer");
        }
        return id.text;
    }

    Stmt parse_load(Cursor& c, const Sketch& sk) {
        Stmt st;
        st.kind = Stmt::Kind::Load;
        st.line = c.line_number();
        c.next();  // load
        c.expect(Tok::LParen, "'('");
        st.slice = parse_slice(c, sk);
        c.expect(Tok::Arrow, "'->'");
        st.buffer = expect_buffer(c);
        c.expect(Tok::RParen, "')'");
        c.expect_done();
        ++idx_;
        return st;
    }

    Stmt parse_store(Cursor& c, const Sketch& sk) {
        Stmt st;
        st.kind = Stmt::Kind::Store;
        st.line = c.line_number();
        c.next();  // store
        c.expect(Tok::LParen, "'('");
        st.buffer = expect_buffer(c);
        c.expect(Tok::Arrow, "'->'");
        st.slice = parse_slice(c, sk);
        c.expect(Tok::RParen, "')'");
        c.expect_done();
        ++idx_;
        return st;
    }

    Stmt parse_compute(Cursor& c) {
        Stmt st;
        st.kind = Stmt::Kind::Compute;
        st.line = c.line_number();
        Token fn = c.expect(Tok::Ident, "compute function name");
        st.fn = fn.text;
        c.expect(Tok::LParen, "'('");
        while (!c.at(Tok::RParen)) {
            if (!st.args.empty()) c.expect(Tok::Comma, "','");
            st.args.push_back(parse_expr(c));
        }
        c.expect(Tok::RParen, "')'");
        c.expect_done();
        if (st.args.size() < 2) {
            syntax_error(st.line, fn.col, "compute call needs at least one input and a destination");
        }
        // Inputs: bare buffer references or scalar expressions.
        for (std::size_t i = 0; i + 1 < st.args.size(); ++i) {
            const Expr& a = st.args[i];
            if (a.kind == Expr::Kind::Ref) {
                auto k = lookup(a.name);
                if (!k) {
                    throw ParseError(ParseError::Kind::UndeclaredSymbol, st.line, fn.col,
                                     "undeclared identifier '" + a.name + "'");
                }
                if (*k == NameKind::Tensor) {
                    syntax_error(st.line, fn.col,
                                 "tensor '" + a.name + "' must be loaded into a buffer before compute");
                }
            } else {
                check_scalar_expr(a, st.line);
            }
        }
        const Expr& dest = st.args.back();
        if (dest.kind != Expr::Kind::Ref) {
            syntax_error(st.line, fn.col, "compute destination (last argument) must be a buffer name");
        }
        auto k = lookup(dest.name);
        if (!k) {
            throw ParseError(ParseError::Kind::UndeclaredSymbol, st.line, fn.col,
                             "undeclared identifier '" + dest.name + "'");
        }
        if (*k != NameKind::Buffer) {
            syntax_error(st.line, fn.col, "compute destination '" + dest.name + "' is not an alloc'd buffer");
        }
        ++idx_;
        return st;
    }

    // expr := term (('+'|'-') term)* ; term := atom ('*' atom)*
    Expr parse_expr(Cursor& c) {
        Expr lhs = parse_term(c);
        while (c.at(Tok::Plus) || c.at(Tok::Minus)) {
            bool plus = c.at(Tok::Plus);
            c.next();
            Expr rhs = parse_term(c);
            lhs = Expr::binary(plus ? Expr::Kind::Add : Expr::Kind::Sub, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Expr parse_term(Cursor& c) {
        Expr lhs = parse_atom(c);
        while (c.at(Tok::Star)) {
            c.next();
            Expr rhs = parse_atom(c);
            lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    Expr parse_atom(Cursor& c) {
        const Token& t = c.peek();
        switch (t.kind) {
            case Tok::Int: {
                Token v = c.next();
                return Expr::integer(v.ival);
            }
            case Tok::Float: {
                Token v = c.next();
                return Expr::floating(v.fval);
            }
            case Tok::Ident: {
                if (t.text == "ceil") {
                    c.next();
                    c.expect(Tok::LParen, "'('");
                    Expr a = parse_expr(c);
                    c.expect(Tok::Comma, "','");
                    Expr b = parse_expr(c);
                    c.expect(Tok::RParen, "')'");
                    return Expr::binary(Expr::Kind::CeilDiv, std::move(a), std::move(b));
                }
                Token v = c.next();
                return Expr::ref(v.text);
            }
            case Tok::LParen: {
                c.next();
                Expr e = parse_expr(c);
                c.expect(Tok::RParen, "')'");
                return e;
            }
            default:
                syntax_error(t.line, t.col, "expected an expression, found " + tok_desc(t));
        }
    }
};

}  // namespace

Sketch parse_sketch(std::string_view text) {
    Parser p(lex(text));
    return p.parse();
}

}  // namespace kgen::sketch
