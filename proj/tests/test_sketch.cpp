#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "kgen/sketch/parser.hpp"
#include "kgen/sketch/printer.hpp"
#include "kgen/sketch/validate.hpp"
#include "support/fixtures.hpp"
#include "support/sketch_gen.hpp"

using namespace kgen::sketch;
namespace ts = kgen::testsupport;

TEST_CASE("rms_norm sketch parses with expected structure") {
    Sketch sk = parse_sketch(ts::kRmsNormSketch);
    CHECK(sk.name == "rms_norm_optimized");
    CHECK(sk.decls.symbols == std::vector<std::string>{"B", "F", "D1", "D2"});
    REQUIRE(sk.decls.tensors.size() == 2);
    CHECK(sk.decls.tensors[0].name == "X");
    CHECK(sk.decls.tensors[0].dims.size() == 4);
    CHECK(sk.decls.tensors[1].name == "Y");
    REQUIRE(sk.decls.constexprs.size() == 2);
    CHECK(sk.decls.constexprs[0].name == "eps");
    CHECK(sk.decls.constexprs[1].name == "TILE_SIZE");

    REQUIRE(sk.body.size() == 1);
    const Stmt& outer = sk.body[0];
    REQUIRE(outer.kind == Stmt::Kind::ForLoop);
    CHECK(outer.hints.contains("parallel"));
    CHECK(outer.hints.contains("coreidx"));

    REQUIRE(outer.body.size() == 1);
    const Stmt& tile_loop = outer.body[0];
    REQUIRE(tile_loop.kind == Stmt::Kind::ForLoop);
    CHECK(tile_loop.loop_var == "d1_outer");
    CHECK(tile_loop.hints.contains("parallel"));
    CHECK(tile_loop.range_stop.kind == Expr::Kind::CeilDiv);

    // Two pipeline-hinted inner loops.
    int pipeline_loops = 0;
    for (const auto& st : tile_loop.body) {
        if (st.kind == Stmt::Kind::ForLoop && st.hints.contains("pipeline")) ++pipeline_loops;
    }
    CHECK(pipeline_loops == 2);

    // Alloc hints arrive via the llm_hint keyword list.
    const Stmt& acc = tile_loop.body[0];
    REQUIRE(acc.kind == Stmt::Kind::Alloc);
    CHECK(acc.alloc_name == "square_sum");
    CHECK(acc.hints.contains("accumulator"));
    CHECK(acc.hints.contains("init_zero"));
    CHECK(acc.hints.contains("fast"));
}

TEST_CASE("identity sketch parses to one unhinted loop") {
    Sketch sk = parse_sketch(ts::kIdentitySketch);
    CHECK(sk.decls.symbols == std::vector<std::string>{"N"});
    CHECK(sk.decls.tensors.size() == 2);
    CHECK(sk.decls.constexprs.empty());
    REQUIRE(sk.body.size() == 1);
    CHECK(sk.body[0].kind == Stmt::Kind::ForLoop);
    CHECK(sk.body[0].hints.empty());
    CHECK(sk.body[0].body.size() == 3);
}

TEST_CASE("unknown hint is rejected with position") {
    std::string text(ts::kRmsNormSketch);
    const std::string needle = "@llm_hint(\"pipeline\")";
    text.replace(text.find(needle), needle.size(), "@llm_hint(\"turbo\")");
    try {
        parse_sketch(text);
        FAIL("expected UnknownHint");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseError::Kind::UnknownHint);
        CHECK(e.line > 1);
        CHECK(std::string(e.what()).find("turbo") != std::string::npos);
    }
}

TEST_CASE("extension hints with x- prefix are accepted") {
    std::string text(ts::kRmsNormSketch);
    const std::string needle = "@llm_hint(\"pipeline\")";
    text.replace(text.find(needle), needle.size(), "@llm_hint(\"x-sram-doublebuffer\")");
    Sketch sk = parse_sketch(text);
    CHECK(validate_sketch(sk).empty());
}

TEST_CASE("undeclared identifiers are rejected at parse time") {
    const char* text = R"(sketch t {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32;
  constexpr:;

  for i in range(N):
    v = alloc([1])
    load(X[j] -> v)
    store(v -> Y[i])
}
)";
    try {
        parse_sketch(text);
        FAIL("expected UndeclaredSymbol");
    } catch (const ParseError& e) {
        CHECK(e.kind == ParseError::Kind::UndeclaredSymbol);
        CHECK(std::string(e.what()).find("'j'") != std::string::npos);
    }
}

TEST_CASE("load into a never-allocated buffer is an unbound identifier") {
    const char* text = R"(sketch t {
  symbols: N;
  tensors: X[N]: f32;
  constexpr:;

  for i in range(N):
    load(X[i] -> v)
}
)";
    CHECK_THROWS_AS(parse_sketch(text), ParseError);
}

TEST_CASE("loop index shadowing is rejected") {
    const char* text = R"(sketch t {
  symbols: N;
  tensors: X[N]: f32;
  constexpr:;

  for N in range(4):
    v = alloc([1])
    load(X[N] -> v)
}
)";
    CHECK_THROWS_AS(parse_sketch(text), ParseError);
}

TEST_CASE("decorator stacking unions tags onto one statement") {
    const char* text = R"(sketch t {
  symbols: N;
  tensors: X[N]: f32; Y[N]: f32;
  constexpr:;

  @llm_hint("parallel")
  @llm_hint("vectorize", "unroll")
  for i in range(N):
    v = alloc([1])
    load(X[i] -> v)
    store(v -> Y[i])
}
)";
    Sketch sk = parse_sketch(text);
    CHECK(sk.body[0].hints.tags ==
          std::set<std::string>{"parallel", "vectorize", "unroll"});
}

TEST_CASE("validate accepts the rms_norm sketch") {
    Sketch sk = parse_sketch(ts::kRmsNormSketch);
    auto diags = validate_sketch(sk);
    CHECK(diags.empty());
}

TEST_CASE("validate flags a store of an unallocated buffer") {
    Sketch sk = parse_sketch(ts::kIdentitySketch);
    // Rewrite the store to use a buffer name that was never alloc'd.
    sk.body[0].body[2].buffer = "ghost";
    auto diags = validate_sketch(sk);
    REQUIRE(!diags.empty());
    CHECK(diags[0].code == DiagCode::UseBeforeAlloc);
}

TEST_CASE("validate flags rank mismatches") {
    Sketch sk = parse_sketch(ts::kRmsNormSketch);
    // Drop one axis from the first load: 3 slice axes on a 4-D tensor.
    Stmt& tile_loop = sk.body[0].body[0];
    Stmt& first_pass = tile_loop.body[1];
    REQUIRE(first_pass.kind == Stmt::Kind::ForLoop);
    Stmt& load = first_pass.body[1];
    REQUIRE(load.kind == Stmt::Kind::Load);
    load.slice.axes.pop_back();
    auto diags = validate_sketch(sk);
    REQUIRE(!diags.empty());
    CHECK(std::any_of(diags.begin(), diags.end(),
                      [](const Diagnostic& d) { return d.code == DiagCode::RankMismatch; }));
}

TEST_CASE("validate flags unknown compute functions") {
    Sketch sk = parse_sketch(ts::kIdentitySketch);
    Stmt fn;
    fn.kind = Stmt::Kind::Compute;
    fn.fn = "warp_shuffle";
    fn.args = {Expr::ref("v"), Expr::ref("v")};
    sk.body[0].body.insert(sk.body[0].body.begin() + 2, fn);
    auto diags = validate_sketch(sk);
    CHECK(std::any_of(diags.begin(), diags.end(),
                      [](const Diagnostic& d) { return d.code == DiagCode::UnknownFunction; }));
}

TEST_CASE("validate flags a store before any write") {
    const char* text = R"(sketch t {
  symbols: N;
  tensors: Y[N]: f32;
  constexpr:;

  v = alloc([N])
  store(v -> Y[0:N])
}
)";
    Sketch sk = parse_sketch(text);
    auto diags = validate_sketch(sk);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == DiagCode::StoreBeforeWrite);
}

TEST_CASE("empty body cannot be printed") {
    Sketch sk;
    sk.name = "empty";
    CHECK_THROWS_AS(print_sketch(sk), std::invalid_argument);
    CHECK(!validate_sketch(sk).empty());
}

TEST_CASE("print/parse round trip is a fixed point on rms_norm") {
    Sketch first = parse_sketch(ts::kRmsNormSketch);
    std::string printed = print_sketch(first);
    Sketch second = parse_sketch(printed);
    CHECK(first == second);
    // And printing is idempotent from there on.
    CHECK(print_sketch(second) == printed);
}

TEST_CASE("round trip holds over generated sketches") {
    ts::SketchGen gen(20240811);
    for (int i = 0; i < 120; ++i) {
        Sketch sk = gen.generate();
        CAPTURE(i);
        auto diags = validate_sketch(sk);
        if (!diags.empty()) CAPTURE(render_diagnostics(diags));
        REQUIRE(diags.empty());
        std::string printed = print_sketch(sk);
        CAPTURE(printed);
        Sketch reparsed = parse_sketch(printed);
        REQUIRE(reparsed == sk);
    }
}

TEST_CASE("expression printing preserves structure through parentheses") {
    Expr e = Expr::binary(Expr::Kind::Mul,
                          Expr::binary(Expr::Kind::Add, Expr::ref("a"), Expr::integer(1)),
                          Expr::ref("b"));
    CHECK(print_expr(e) == "(a+1)*b");
    Expr right = Expr::binary(Expr::Kind::Sub, Expr::ref("a"),
                              Expr::binary(Expr::Kind::Add, Expr::ref("b"), Expr::ref("c")));
    CHECK(print_expr(right) == "a-(b+c)");
}

TEST_CASE("core compute floor names are stable") {
    const auto& names = core_compute_names();
    for (const char* fn : {"add", "sub", "mul", "div", "sqrt", "exp", "relu", "max", "min",
                           "reduce_sum", "reduce_max", "gemm"}) {
        CHECK(names.count(fn) == 1);
    }
}
