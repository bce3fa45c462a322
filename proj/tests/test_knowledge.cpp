#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "kgen/knowledge/context.hpp"
#include "kgen/knowledge/docset.hpp"
#include "kgen/knowledge/format.hpp"
#include "kgen/sketch/parser.hpp"
#include "kgen/util/text.hpp"
#include "support/fixtures.hpp"
#include "support/tmpdir.hpp"

using namespace kgen::knowledge;
namespace ts = kgen::testsupport;
namespace fs = std::filesystem;

namespace {

void write_doc(const fs::path& dir, const std::string& name, const std::string& title,
               const std::string& tags, const std::string& body) {
    kgen::util::write_file(dir / name,
                           "---\ntitle: " + title + "\ntags: " + tags + "\n---\n" + body + "\n");
}

fs::path make_docset(const fs::path& root) {
    const fs::path ds = root / "c" / "cpu";
    for (const char* cat : {"basic", "api", "expert_suggestions", "examples"}) {
        fs::create_directories(ds / cat);
    }
    write_doc(ds / "basic", "arch.md", "CPU execution model", "cpu, simd", "Cores and caches.");
    write_doc(ds / "api", "reduce.md", "Reduction helpers", "reduce_sum, reduce", "reduce_sum(buf, axis, out)");
    write_doc(ds / "api", "gemm.md", "Matrix multiply", "gemm, matmul", "gemm(a, b, out)");
    write_doc(ds / "api", "elementwise.md", "Elementwise math", "add, mul, elementwise", "add/mul/...");
    write_doc(ds / "expert_suggestions", "tiling.md", "Tile sizes", "tiling", "Prefer powers of two.");
    write_doc(ds / "examples", "vec_add.md", "Vector add", "elementwise", "```c\n/* ... */\n```");
    return ds;
}

}  // namespace

TEST_CASE("load_docset reads all four categories") {
    ts::ScopedTempDir dir;
    auto ds_root = make_docset(dir.path());
    DocSet ds = load_docset(ds_root);
    CHECK(ds.dsl_id == "c");
    CHECK(ds.backend_id == "cpu");
    CHECK(ds.basic.size() == 1);
    CHECK(ds.api.size() == 3);
    CHECK(ds.expert_suggestions.size() == 1);
    CHECK(ds.examples.size() == 1);
    CHECK(ds.api[1].title == "Matrix multiply");  // sorted by filename: elementwise, gemm, reduce
    CHECK(ds.basic[0].tags.count("simd") == 1);
    CHECK(ds.warnings.empty());
}

TEST_CASE("empty directory reports all four categories missing") {
    ts::ScopedTempDir dir;
    try {
        load_docset(dir.path() / "c" / "cpu");
        FAIL("expected DocError");
    } catch (const DocError& e) {
        CHECK(e.missing == std::vector<std::string>{"basic", "api", "expert_suggestions", "examples"});
    }
}

TEST_CASE("a single missing category is named") {
    ts::ScopedTempDir dir;
    auto ds_root = make_docset(dir.path());
    fs::remove_all(ds_root / "expert_suggestions");
    try {
        load_docset(ds_root);
        FAIL("expected DocError");
    } catch (const DocError& e) {
        CHECK(e.missing == std::vector<std::string>{"expert_suggestions"});
    }
}

TEST_CASE("unknown files become warnings, not errors") {
    ts::ScopedTempDir dir;
    auto ds_root = make_docset(dir.path());
    kgen::util::write_file(ds_root / "api" / "notes.txt", "scratch");
    DocSet ds = load_docset(ds_root);
    REQUIRE(ds.warnings.size() == 1);
    CHECK(ds.warnings[0].find("notes.txt") != std::string::npos);
}

TEST_CASE("compression") {
    ts::ScopedTempDir dir;
    DocSet ds = load_docset(make_docset(dir.path()));
    auto sk = kgen::sketch::parse_sketch(R"(sketch row_sum {
  symbols: M, N;
  tensors: X[M, N]: f32; S[M]: f32;
  constexpr:;

  for m in range(M):
    row = alloc([N])
    load(X[m, 0:N] -> row)
    acc = alloc([1], llm_hint=["accumulator"])
    reduce_sum(row, 0, acc)
    store(acc -> S[m])
}
)");

    SUBCASE("budget larger than the total is the identity") {
        auto out = compress_api_docs(ds.api, "row sums", &sk, nullptr, 1 << 20);
        REQUIRE(out.size() == ds.api.size());
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].id == ds.api[i].id);
    }

    SUBCASE("fallback ranks by tag overlap with sketch compute names") {
        // Budget fits roughly one document; the reduce doc must win because
        // the sketch uses reduce_sum.
        auto out = compress_api_docs(ds.api, "sum rows of a matrix", &sk, nullptr, 60);
        REQUIRE(!out.empty());
        CHECK(out[0].id == "reduce.md");
        CHECK(total_size(out) <= 60);
    }

    SUBCASE("scripted provider picks exactly the listed ids") {
        kgen::agents::ScriptedProvider provider;
        provider.push_reply("gemm.md\nelementwise.md\n");
        auto out = compress_api_docs(ds.api, "matmul", &sk, &provider, 80);
        REQUIRE(out.size() == 2);
        CHECK(out[0].id == "gemm.md");
        CHECK(out[1].id == "elementwise.md");
    }

    SUBCASE("compression never fabricates documents") {
        auto out = compress_api_docs(ds.api, "anything", &sk, nullptr, 100);
        for (const auto& d : out) {
            CHECK(std::any_of(ds.api.begin(), ds.api.end(),
                              [&](const Document& orig) { return orig.id == d.id; }));
        }
    }
}

TEST_CASE("context assembly") {
    ts::ScopedTempDir dir;
    DocSet ds = load_docset(make_docset(dir.path()));
    ContextInputs in;
    in.task_text = "Implement vector add";
    in.docs = &ds;
    in.api_docs = ds.api;
    in.retrieved_examples = {"example one", "example two"};
    in.feedback = "previous attempt failed to compile";

    SUBCASE("coder stage with everything present has six labeled sections") {
        auto sections = assemble_context(in, Stage::Coder);
        REQUIRE(sections.size() == 6);
        CHECK(sections[0].label == "## Task");
        CHECK(sections[1].label == "## Hardware and language notes");
        CHECK(sections[2].label == "## API reference");
        CHECK(sections[3].label == "## Expert suggestions");
        CHECK(sections[4].label == "## Retrieved examples");
        CHECK(sections[5].label == "## Previous feedback");
    }

    SUBCASE("designer stage has no API section") {
        auto sections = assemble_context(in, Stage::Designer);
        for (const auto& s : sections) CHECK(s.label != "## API reference");
        CHECK(sections.size() == 5);
    }

    SUBCASE("empty retrieval drops the examples section but keeps order") {
        in.retrieved_examples.clear();
        auto sections = assemble_context(in, Stage::Coder);
        REQUIRE(sections.size() == 5);
        CHECK(sections[3].label == "## Expert suggestions");
        CHECK(sections[4].label == "## Previous feedback");
    }

    SUBCASE("assembly is a pure function of its inputs") {
        auto a = render_sections(assemble_context(in, Stage::Coder));
        auto b = render_sections(assemble_context(in, Stage::Coder));
        CHECK(a == b);
    }
}

TEST_CASE("docs formatting tool wraps raw files into the layout") {
    ts::ScopedTempDir dir;
    const auto raw = dir.path() / "raw_reduce.txt";
    kgen::util::write_file(raw,
                           "Reduction intrinsics operate on contiguous buffers. Reduction order "
                           "is ascending. Buffers must be contiguous.");
    SUBCASE("fallback tags from word frequency") {
        FormatRequest req;
        req.inputs = {raw};
        req.out_root = dir.path() / "docspec";
        req.dsl = "c";
        req.backend = "cpu";
        req.category = "api";
        auto written = format_docs(req);
        REQUIRE(written.size() == 1);
        DocSet ds = load_docset(dir.path() / "docspec" / "c" / "cpu");
        REQUIRE(ds.api.size() == 1);
        CHECK(ds.api[0].title == "raw_reduce");
        CHECK(ds.api[0].tags.count("reduction") == 1);
        CHECK(ds.api[0].tags.count("contiguous") == 1);
    }
    SUBCASE("scripted provider supplies the tags") {
        kgen::agents::ScriptedProvider provider;
        provider.push_reply("reduce, intrinsics");
        FormatRequest req;
        req.inputs = {raw};
        req.out_root = dir.path() / "docspec2";
        req.dsl = "c";
        req.backend = "cpu";
        req.category = "api";
        req.provider = &provider;
        format_docs(req);
        DocSet ds = load_docset(dir.path() / "docspec2" / "c" / "cpu");
        REQUIRE(ds.api.size() == 1);
        CHECK(ds.api[0].tags == std::set<std::string>{"reduce", "intrinsics"});
    }
}
