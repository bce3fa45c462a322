#include "kgen/core/task.hpp"

#include <json.hpp>

#include "kgen/core/status.hpp"
#include "kgen/util/text.hpp"

namespace kgen::core {

using nlohmann::json;

std::string_view status_name(VerifyStatus s) {
    switch (s) {
        case VerifyStatus::Pass: return "pass";
        case VerifyStatus::NumericFail: return "numeric_fail";
        case VerifyStatus::CompileFail: return "compile_fail";
        case VerifyStatus::RuntimeFail: return "runtime_fail";
        case VerifyStatus::Timeout: return "timeout";
    }
    return "unknown";
}

std::optional<VerifyStatus> status_from(std::string_view name) {
    if (name == "pass") return VerifyStatus::Pass;
    if (name == "numeric_fail") return VerifyStatus::NumericFail;
    if (name == "compile_fail") return VerifyStatus::CompileFail;
    if (name == "runtime_fail") return VerifyStatus::RuntimeFail;
    if (name == "timeout") return VerifyStatus::Timeout;
    return std::nullopt;
}

std::string_view category_name(OpCategory c) {
    switch (c) {
        case OpCategory::Elementwise: return "elementwise";
        case OpCategory::Reduction: return "reduction";
        case OpCategory::Normalization: return "normalization";
        case OpCategory::TensorManipulation: return "tensor_manipulation";
        case OpCategory::MatMul: return "matmul";
        case OpCategory::Indexing: return "indexing";
        case OpCategory::Sorting: return "sorting";
        case OpCategory::Fused: return "fused";
    }
    return "elementwise";
}

std::optional<OpCategory> category_from(std::string_view name) {
    for (OpCategory c : all_categories()) {
        if (category_name(c) == name) return c;
    }
    return std::nullopt;
}

const std::vector<OpCategory>& all_categories() {
    static const std::vector<OpCategory> cats = {
        OpCategory::Elementwise,    OpCategory::Reduction, OpCategory::Normalization,
        OpCategory::TensorManipulation, OpCategory::MatMul, OpCategory::Indexing,
        OpCategory::Sorting,        OpCategory::Fused,
    };
    return cats;
}

std::string task_to_json(const OperatorSpec& task) {
    json j;
    j["name"] = task.name;
    j["category"] = std::string(category_name(task.category));
    j["dtype"] = std::string(sketch::dtype_name(task.dtype));
    if (!task.reference_sketch.empty()) j["reference_sketch"] = task.reference_sketch;
    if (!task.reference_oracle.empty()) j["reference_oracle"] = task.reference_oracle;
    j["static_shapes"] = json::object();
    for (const auto& [k, v] : task.static_shapes) j["static_shapes"][k] = v;
    j["dynamic_ranges"] = json::object();
    for (const auto& [k, v] : task.dynamic_ranges) j["dynamic_ranges"][k] = json::array({v.lo, v.hi});
    if (!task.constants.empty()) {
        j["constants"] = json::object();
        for (const auto& [k, v] : task.constants) j["constants"][k] = v;
    }
    if (!task.int_inputs.empty()) {
        j["int_inputs"] = json::object();
        for (const auto& [k, v] : task.int_inputs) j["int_inputs"][k] = json::array({v.lo, v.hi});
    }
    return j.dump(2) + "\n";
}

OperatorSpec task_from_json(std::string_view json_text) {
    json j = json::parse(json_text);
    OperatorSpec task;
    task.name = j.at("name").get<std::string>();
    if (task.name.empty()) throw std::invalid_argument("task name must not be empty");
    auto cat = category_from(j.at("category").get<std::string>());
    if (!cat) throw std::invalid_argument("unknown task category");
    task.category = *cat;
    if (j.contains("dtype")) {
        auto d = sketch::dtype_from(j["dtype"].get<std::string>());
        if (!d) throw std::invalid_argument("unknown task dtype");
        task.dtype = *d;
    }
    if (j.contains("reference_sketch")) task.reference_sketch = j["reference_sketch"].get<std::string>();
    if (j.contains("reference_oracle")) task.reference_oracle = j["reference_oracle"].get<std::string>();
    if (j.contains("static_shapes")) {
        for (auto& [k, v] : j["static_shapes"].items()) task.static_shapes[k] = v.get<std::int64_t>();
    }
    if (j.contains("dynamic_ranges")) {
        for (auto& [k, v] : j["dynamic_ranges"].items()) {
            ShapeRange r{v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()};
            if (r.lo < 1 || r.hi < r.lo) throw std::invalid_argument("bad dynamic range for " + k);
            task.dynamic_ranges[k] = r;
        }
    }
    if (j.contains("constants")) {
        for (auto& [k, v] : j["constants"].items()) task.constants[k] = v.get<double>();
    }
    if (j.contains("int_inputs")) {
        for (auto& [k, v] : j["int_inputs"].items()) {
            task.int_inputs[k] = IntInputRange{v.at(0).get<std::string>(), v.at(1).get<std::string>()};
        }
    }
    return task;
}

OperatorSpec load_task_file(const std::filesystem::path& path) {
    return task_from_json(util::read_file(path));
}

void save_task_file(const std::filesystem::path& path, const OperatorSpec& task) {
    util::write_file(path, task_to_json(task));
}

}  // namespace kgen::core
