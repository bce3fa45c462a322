#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgen/sketch/ast.hpp"

namespace kgen::core {

enum class OpCategory {
    Elementwise,
    Reduction,
    Normalization,
    TensorManipulation,
    MatMul,
    Indexing,
    Sorting,
    Fused,
};

std::string_view category_name(OpCategory c);
std::optional<OpCategory> category_from(std::string_view name);
const std::vector<OpCategory>& all_categories();

struct ShapeRange {
    std::int64_t lo = 1;
    std::int64_t hi = 1;  // inclusive
};

/// Value range for an integer input tensor; the bounds are integer literals
/// or symbol names, evaluated per shape instantiation. hi is exclusive.
struct IntInputRange {
    std::string lo = "0";
    std::string hi = "1";
};

/// One benchmark/generation task. The reference is either a sketch (run on
/// the interpreter) or the id of a registered closed-form oracle.
struct OperatorSpec {
    std::string name;
    OpCategory category = OpCategory::Elementwise;
    std::string reference_sketch;    // sketch source text, or
    std::string reference_oracle;    // registered oracle id
    std::map<std::string, std::int64_t> static_shapes;   // symbol -> extent
    std::map<std::string, ShapeRange> dynamic_ranges;    // symbol -> [lo, hi]
    std::map<std::string, double> constants;             // constexpr bindings
    std::map<std::string, IntInputRange> int_inputs;     // i32 tensor value ranges
    sketch::DType dtype = sketch::DType::F32;

    bool has_reference() const { return !reference_sketch.empty() || !reference_oracle.empty(); }
};

std::string task_to_json(const OperatorSpec& task);
OperatorSpec task_from_json(std::string_view json_text);
OperatorSpec load_task_file(const std::filesystem::path& path);
void save_task_file(const std::filesystem::path& path, const OperatorSpec& task);

}  // namespace kgen::core
