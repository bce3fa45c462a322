#include "kgen/verify/verify.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <random>
#include <sstream>

#include "kgen/sketch/parser.hpp"
#include "kgen/util/hash.hpp"
#include "kgen/util/text.hpp"

namespace kgen::verify {

double VerifyReport::mean_latency_gen() const {
    if (latency_gen_us.empty()) return 0.0;
    double s = 0.0;
    for (double v : latency_gen_us) s += v;
    return s / static_cast<double>(latency_gen_us.size());
}

double VerifyReport::mean_latency_base() const {
    if (latency_base_us.empty()) return 0.0;
    double s = 0.0;
    for (double v : latency_base_us) s += v;
    return s / static_cast<double>(latency_base_us.size());
}

std::string VerifyReport::summary() const {
    std::ostringstream ss;
    ss << core::status_name(status) << " violation_fraction=" << violation_fraction
       << " max_error=" << max_error;
    if (!latency_gen_us.empty()) {
        ss << " latency_gen_us=" << mean_latency_gen() << " latency_base_us=" << mean_latency_base();
    }
    return ss.str();
}

OracleRegistry& OracleRegistry::instance() {
    static OracleRegistry reg;
    return reg;
}

void OracleRegistry::add(const std::string& id, OracleSpec spec) {
    oracles_[id] = std::move(spec);
}

const OracleSpec* OracleRegistry::find(const std::string& id) const {
    auto it = oracles_.find(id);
    return it == oracles_.end() ? nullptr : &it->second;
}

namespace {

void collect_stored(const std::vector<sketch::Stmt>& body, std::set<std::string>& stored) {
    for (const auto& st : body) {
        if (st.kind == sketch::Stmt::Kind::Store) stored.insert(st.slice.tensor);
        if (st.kind == sketch::Stmt::Kind::ForLoop) collect_stored(st.body, stored);
    }
}

std::vector<std::string> decl_dims_to_strings(const std::vector<sketch::Expr>& dims) {
    std::vector<std::string> out;
    for (const auto& d : dims) {
        if (d.kind == sketch::Expr::Kind::IntLit) {
            out.push_back(std::to_string(d.int_value));
        } else if (d.kind == sketch::Expr::Kind::Ref) {
            out.push_back(d.name);
        } else {
            out.push_back("");  // composite; resolved through the sketch itself
        }
    }
    return out;
}

}  // namespace

ReferenceEvaluator::ReferenceEvaluator(const core::OperatorSpec& task,
                                       const interp::ComputeLibrary* lib)
    : task_(task), lib_(lib) {
    if (!task.reference_sketch.empty()) {
        ref_sketch_ = sketch::parse_sketch(task.reference_sketch);
        use_sketch_ = true;
        std::set<std::string> stored;
        collect_stored(ref_sketch_.body, stored);
        for (const auto& t : ref_sketch_.decls.tensors) {
            TensorDeclSpec d{t.name, decl_dims_to_strings(t.dims), t.dtype};
            decls_.push_back(d);
            if (stored.count(t.name)) {
                io_.outputs.push_back(t.name);
            } else {
                io_.inputs.push_back(t.name);
            }
        }
    } else if (!task.reference_oracle.empty()) {
        oracle_ = OracleRegistry::instance().find(task.reference_oracle);
        if (!oracle_) {
            throw std::invalid_argument("no registered oracle '" + task.reference_oracle + "'");
        }
        for (const auto& d : oracle_->inputs) {
            decls_.push_back(d);
            io_.inputs.push_back(d.name);
        }
        for (const auto& d : oracle_->outputs) {
            decls_.push_back(d);
            io_.outputs.push_back(d.name);
        }
    } else {
        throw std::invalid_argument("task '" + task.name + "' has no reference");
    }
}

std::map<std::string, std::vector<std::int64_t>> ReferenceEvaluator::shapes(
    const std::map<std::string, std::int64_t>& symbols) const {
    auto scalar = [&](const std::string& text) -> std::int64_t {
        if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text[0])))) {
            return std::stoll(text);
        }
        auto it = symbols.find(text);
        if (it != symbols.end()) return it->second;
        auto cit = task_.constants.find(text);
        if (cit != task_.constants.end()) return static_cast<std::int64_t>(cit->second);
        throw std::invalid_argument("cannot resolve dimension '" + text + "'");
    };

    if (use_sketch_) {
        // Evaluate declared dims through the sketch machinery so composite
        // expressions (products, ceil) work too.
        interp::Binding b;
        b.symbol_values = symbols;
        b.constexpr_values = task_.constants;
        std::map<std::string, std::vector<std::int64_t>> out;
        std::map<std::string, double> env = task_.constants;
        for (const auto& [k, v] : symbols) env[k] = static_cast<double>(v);
        for (const auto& t : ref_sketch_.decls.tensors) {
            std::vector<std::int64_t> shape;
            for (const auto& d : t.dims) {
                // Reuse the declared dim strings when simple, else evaluate.
                std::function<double(const sketch::Expr&)> ev = [&](const sketch::Expr& e) -> double {
                    switch (e.kind) {
                        case sketch::Expr::Kind::IntLit: return static_cast<double>(e.int_value);
                        case sketch::Expr::Kind::FloatLit: return e.float_value;
                        case sketch::Expr::Kind::Ref: {
                            auto it = env.find(e.name);
                            if (it == env.end()) {
                                throw std::invalid_argument("unbound dimension '" + e.name + "'");
                            }
                            return it->second;
                        }
                        case sketch::Expr::Kind::Add: return ev(e.args[0]) + ev(e.args[1]);
                        case sketch::Expr::Kind::Sub: return ev(e.args[0]) - ev(e.args[1]);
                        case sketch::Expr::Kind::Mul: return ev(e.args[0]) * ev(e.args[1]);
                        case sketch::Expr::Kind::CeilDiv: {
                            const auto a = static_cast<std::int64_t>(ev(e.args[0]));
                            const auto b2 = static_cast<std::int64_t>(ev(e.args[1]));
                            return static_cast<double>((a + b2 - 1) / b2);
                        }
                    }
                    return 0.0;
                };
                shape.push_back(static_cast<std::int64_t>(ev(d)));
            }
            out[t.name] = std::move(shape);
        }
        return out;
    }

    std::map<std::string, std::vector<std::int64_t>> out;
    for (const auto& d : decls_) {
        std::vector<std::int64_t> shape;
        for (const auto& dim : d.dims) shape.push_back(scalar(dim));
        out[d.name] = std::move(shape);
    }
    return out;
}

DType ReferenceEvaluator::tensor_dtype(const std::string& name) const {
    for (const auto& d : decls_) {
        if (d.name == name) return d.dtype;
    }
    throw std::invalid_argument("unknown tensor '" + name + "'");
}

std::map<std::string, Tensor> ReferenceEvaluator::eval(const interp::Binding& binding,
                                                       std::uint64_t* steps) const {
    if (use_sketch_) {
        interp::EvalOptions opts;
        opts.library = lib_;
        auto rs = interp::bind_shapes(ref_sketch_, binding);
        auto res = interp::eval_sketch(rs, binding, opts);
        if (steps) *steps = res.steps;
        std::map<std::string, Tensor> out;
        for (const auto& name : io_.outputs) out[name] = res.tensors.at(name);
        return out;
    }
    if (steps) *steps = 0;
    auto all = oracle_->eval(binding);
    std::map<std::string, Tensor> out;
    for (const auto& name : io_.outputs) out[name] = all.at(name);
    return out;
}

std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count) {
    std::vector<std::uint64_t> seeds;
    std::mt19937_64 rng(base * 0x9E3779B97F4A7C15ULL + 1);
    for (int i = 0; i < count; ++i) seeds.push_back(rng());
    return seeds;
}

std::vector<Instantiation> make_instantiations(const core::OperatorSpec& task, ShapeMode mode,
                                               std::span<const std::uint64_t> seeds) {
    std::vector<Instantiation> insts;
    const std::uint64_t first_seed = seeds.empty() ? 1 : seeds.front();
    insts.push_back({task.static_shapes, first_seed});
    if (mode == ShapeMode::Dynamic) {
        for (std::uint64_t seed : seeds) {
            Instantiation inst;
            inst.seed = seed ^ 0xD1B54A32D192ED03ULL;
            inst.symbols = task.static_shapes;
            std::mt19937_64 rng(seed);
            for (const auto& [name, range] : task.dynamic_ranges) {
                std::uniform_int_distribution<std::int64_t> dist(range.lo, range.hi);
                inst.symbols[name] = dist(rng);
            }
            insts.push_back(std::move(inst));
        }
    }
    return insts;
}

interp::Binding make_binding(const core::OperatorSpec& task, const ReferenceEvaluator& ref,
                             const Instantiation& inst) {
    interp::Binding b;
    b.symbol_values = inst.symbols;
    b.constexpr_values = task.constants;
    auto shapes = ref.shapes(inst.symbols);

    for (const auto& name : ref.io().inputs) {
        const DType dtype = ref.tensor_dtype(name);
        Tensor t(dtype, shapes.at(name));
        std::mt19937_64 rng(inst.seed ^ util::fnv1a(name));
        if (dtype == DType::I32) {
            auto it = task.int_inputs.find(name);
            if (it == task.int_inputs.end()) {
                throw std::invalid_argument("i32 input '" + name +
                                            "' needs an int_inputs range in the task");
            }
            auto resolve = [&](const std::string& text) -> std::int64_t {
                if (!text.empty() && std::isdigit(static_cast<unsigned char>(text[0]))) {
                    return std::stoll(text);
                }
                return inst.symbols.at(text);
            };
            const std::int64_t lo = resolve(it->second.lo);
            const std::int64_t hi = resolve(it->second.hi);
            if (hi <= lo) throw std::invalid_argument("empty int range for '" + name + "'");
            std::uniform_int_distribution<std::int64_t> dist(lo, hi - 1);
            for (std::int64_t i = 0; i < t.numel(); ++i) t.set(i, static_cast<double>(dist(rng)));
        } else {
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (std::int64_t i = 0; i < t.numel(); ++i) t.set(i, dist(rng));
        }
        b.tensor_values[name] = std::move(t);
    }
    for (const auto& name : ref.io().outputs) {
        if (b.tensor_values.count(name)) continue;  // in/out tensor keeps its input data
        b.tensor_values[name] = Tensor(ref.tensor_dtype(name), shapes.at(name));
    }
    return b;
}

std::filesystem::path candidate_work_dir(const std::filesystem::path& work_root,
                                         const std::string& task_name,
                                         const std::string& candidate_id) {
    auto sanitize = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
                                  c == '_'
                              ? c
                              : '_');
        }
        return out.empty() ? std::string("unnamed") : out;
    };
    return work_root / sanitize(task_name) / sanitize(candidate_id);
}

VerifyReport verify_kernel(const core::KernelCandidate& candidate, const core::OperatorSpec& task,
                           BackendAdapter& backend, const Tolerance& tol,
                           std::span<const std::uint64_t> seeds, const VerifyOptions& opts) {
    VerifyReport report;
    std::ostringstream log;

    const auto scratch = candidate_work_dir(opts.work_dir, task.name, candidate.id);
    std::filesystem::create_directories(scratch / "logs");

    ReferenceEvaluator ref(task, opts.library);

    auto prep = backend.prepare(candidate, task, scratch);
    if (!prep.kernel) {
        report.status = prep.status == VerifyStatus::Pass ? VerifyStatus::CompileFail : prep.status;
        report.diagnostics = prep.log;
        util::write_file(scratch / "logs" / "verify.log", report.diagnostics);
        return report;
    }

    RunLimits limits;
    limits.timeout_ms = opts.run_timeout_ms;
    limits.max_steps = opts.max_steps;

    const auto insts = make_instantiations(task, opts.mode, seeds);
    bool all_passed = true;
    for (const auto& inst : insts) {
        interp::Binding binding = make_binding(task, ref, inst);
        auto expected = ref.eval(binding);
        auto run = backend.run(*prep.kernel, binding, limits);
        VerifyReport::Instantiation rec;
        rec.symbols = inst.symbols;
        if (run.status != VerifyStatus::Pass) {
            report.status = run.status;
            report.diagnostics = log.str() + run.log;
            rec.passed = false;
            report.instantiations.push_back(std::move(rec));
            util::write_file(scratch / "logs" / "verify.log", report.diagnostics);
            return report;
        }
        double inst_vf = 0.0, inst_max = 0.0;
        bool inst_ok = true;
        for (const auto& name : ref.io().outputs) {
            auto it = run.outputs.find(name);
            if (it == run.outputs.end()) {
                inst_ok = false;
                inst_vf = 1.0;
                log << "missing output '" << name << "'\n";
                continue;
            }
            const Tensor& got = it->second;
            const Tensor& want = expected.at(name);
            if (got.shape() != want.shape() || got.dtype() != want.dtype()) {
                inst_ok = false;
                inst_vf = 1.0;
                log << "output '" << name << "' has wrong shape or dtype\n";
                continue;
            }
            auto errors = elementwise_error(got, want, tol);
            auto stats = check_pass(errors, tol.tau(want.dtype()));
            inst_vf = std::max(inst_vf, stats.violation_fraction);
            inst_max = std::max(inst_max, stats.max_error);
            if (stats.result != GateResult::Pass) {
                inst_ok = false;
                log << "output '" << name << "': violation_fraction=" << stats.violation_fraction
                    << " max_error=" << stats.max_error << " over " << errors.size() << " elements\n";
            }
        }
        rec.passed = inst_ok;
        rec.violation_fraction = inst_vf;
        rec.max_error = inst_max;
        report.instantiations.push_back(std::move(rec));
        report.violation_fraction = std::max(report.violation_fraction, inst_vf);
        report.max_error = std::max(report.max_error, inst_max);
        all_passed = all_passed && inst_ok;
    }
    report.status = all_passed ? VerifyStatus::Pass : VerifyStatus::NumericFail;

    if (report.status == VerifyStatus::Pass && opts.profile &&
        backend.capabilities().profile && !insts.empty()) {
        // One backend instance profiles one kernel at a time.
        std::lock_guard<std::mutex> lease(backend.profiling_lease());
        const bool cost_model = backend.deterministic_timing();
        interp::Binding binding = make_binding(task, ref, insts.front());

        for (int w = 0; w < opts.warmup; ++w) {
            auto out = backend.run(*prep.kernel, binding, limits);
            if (out.status != VerifyStatus::Pass) break;
        }
        for (int r = 0; r < opts.reps; ++r) {
            auto out = backend.run(*prep.kernel, binding, limits);
            if (out.status != VerifyStatus::Pass) break;
            report.latency_gen_us.push_back(cost_model ? out.cost_units : out.wall_us);
        }
        // Baseline: the task reference on the interpreter, same measurement unit.
        for (int w = 0; w < opts.warmup; ++w) (void)ref.eval(binding);
        for (int r = 0; r < opts.reps; ++r) {
            std::uint64_t steps = 0;
            const auto t0 = std::chrono::steady_clock::now();
            (void)ref.eval(binding, &steps);
            const double wall =
                std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                    .count();
            report.latency_base_us.push_back(cost_model ? static_cast<double>(steps) : wall);
        }
    }

    report.diagnostics = log.str();
    util::write_file(scratch / "logs" / "verify.log",
                     report.summary() + "\n" + report.diagnostics);
    return report;
}

}  // namespace kgen::verify
