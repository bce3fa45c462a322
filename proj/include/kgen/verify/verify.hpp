#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgen/verify/backend.hpp"
#include "kgen/verify/metrics.hpp"
#include "kgen/verify/report.hpp"

namespace kgen::verify {

/// Tensor interface of a task, in declaration order. Outputs are the tensors
/// the reference stores into; everything else is an input.
struct IoSpec {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

/// Closed-form reference registered under an id, as an alternative to a
/// sketch reference. Dims entries are symbol names or integer literals.
struct TensorDeclSpec {
    std::string name;
    std::vector<std::string> dims;
    DType dtype = DType::F32;
};

struct OracleSpec {
    std::vector<TensorDeclSpec> inputs;
    std::vector<TensorDeclSpec> outputs;
    std::function<std::map<std::string, Tensor>(const interp::Binding&)> eval;
};

class OracleRegistry {
public:
    static OracleRegistry& instance();
    void add(const std::string& id, OracleSpec spec);
    const OracleSpec* find(const std::string& id) const;

private:
    std::map<std::string, OracleSpec> oracles_;
};

/// Evaluates a task's reference implementation: either its sketch on the
/// interpreter or a registered oracle. Also owns the task's tensor
/// declarations, which drive input generation and the io contract.
class ReferenceEvaluator {
public:
    ReferenceEvaluator(const core::OperatorSpec& task, const interp::ComputeLibrary* lib = nullptr);

    const IoSpec& io() const { return io_; }

    /// Declared shape of every tensor under the given symbol/constant values.
    std::map<std::string, std::vector<std::int64_t>> shapes(
        const std::map<std::string, std::int64_t>& symbols) const;
    DType tensor_dtype(const std::string& name) const;

    /// Reference outputs; `steps` (when non-null) receives the interpreter
    /// cost of a sketch reference.
    std::map<std::string, Tensor> eval(const interp::Binding& binding,
                                       std::uint64_t* steps = nullptr) const;

    const core::OperatorSpec& task() const { return task_; }

private:
    core::OperatorSpec task_;
    const interp::ComputeLibrary* lib_;
    sketch::Sketch ref_sketch_;
    bool use_sketch_ = false;
    const OracleSpec* oracle_ = nullptr;
    IoSpec io_;
    std::vector<TensorDeclSpec> decls_;  // unified declaration view
};

enum class ShapeMode { Static, Dynamic };

struct Instantiation {
    std::map<std::string, std::int64_t> symbols;
    std::uint64_t seed = 0;
};

/// Static mode: the task's static shapes with the first seed. Dynamic mode:
/// static first, then one seeded draw from the task's dynamic ranges per
/// seed. Identical seeds give identical instantiations.
std::vector<Instantiation> make_instantiations(const core::OperatorSpec& task, ShapeMode mode,
                                               std::span<const std::uint64_t> seeds);

std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count);

/// Seeded input tensors (uniform [-1, 1) floats; integer tensors use the
/// task's declared value ranges) and zeroed outputs.
interp::Binding make_binding(const core::OperatorSpec& task, const ReferenceEvaluator& ref,
                             const Instantiation& inst);

struct VerifyOptions {
    ShapeMode mode = ShapeMode::Static;
    int warmup = 3;
    int reps = 20;
    int run_timeout_ms = 10'000;
    std::uint64_t max_steps = 500'000'000;
    bool profile = true;
    std::filesystem::path work_dir = "work";
    const interp::ComputeLibrary* library = nullptr;
};

/// Full verification: correctness over every instantiation (worst violation
/// fraction wins), then profiling with warm-up. The baseline latency is the
/// task reference on the interpreter, measured in the same unit as the
/// candidate (cost units for deterministic backends, wall microseconds
/// otherwise). Artifacts land under work/<task>/<candidate-id>/{src,bin,io,logs}.
VerifyReport verify_kernel(const core::KernelCandidate& candidate, const core::OperatorSpec& task,
                           BackendAdapter& backend, const Tolerance& tol,
                           std::span<const std::uint64_t> seeds, const VerifyOptions& opts = {});

std::filesystem::path candidate_work_dir(const std::filesystem::path& work_root,
                                         const std::string& task_name,
                                         const std::string& candidate_id);

}  // namespace kgen::verify
