#include "kgen/verify/c_cpu_backend.hpp"

#include <chrono>
#include <cstdio>

#include "kgen/util/subprocess.hpp"
#include "kgen/util/text.hpp"
#include "kgen/verify/verify.hpp"

namespace kgen::verify {

namespace {

// C-side tensor I/O dropped next to every kernel before compiling. Kept as
// embedded sources so compiled candidates are self-contained in the scratch
// directory.
constexpr const char* kTenIoHeader = R"(#ifndef TEN_IO_H
#define TEN_IO_H
#include <stdint.h>

#define TEN_F16 0
#define TEN_F32 1
#define TEN_I32 2
#define TEN_MAX_RANK 8

typedef struct {
    int dtype;
    int rank;
    long long dims[TEN_MAX_RANK];
    long long numel;
    float* f32;    /* storage for f16 (widened) and f32 tensors */
    int32_t* i32;  /* storage for i32 tensors */
} ten_tensor;

ten_tensor ten_alloc(int dtype, int rank, const long long* dims);
void ten_free(ten_tensor* t);
int ten_read(const char* path, ten_tensor* t);        /* 0 on success */
int ten_write(const char* path, const ten_tensor* t); /* 0 on success */
uint16_t ten_f32_to_f16(float v);
float ten_f16_to_f32(uint16_t bits);

#endif
)";

constexpr const char* kTenIoSource = R"(#include "ten_io.h"
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

uint16_t ten_f32_to_f16(float v) {
    uint32_t bits;
    memcpy(&bits, &v, 4);
    uint32_t sign = (bits >> 16) & 0x8000u;
    uint32_t exp = (bits >> 23) & 0xFFu;
    uint32_t mant = bits & 0x7FFFFFu;
    if (exp == 0xFF) return (uint16_t)(sign | 0x7C00u | (mant ? 0x200u : 0));
    int new_exp = (int)exp - 127 + 15;
    if (new_exp >= 0x1F) return (uint16_t)(sign | 0x7C00u);
    if (new_exp <= 0) {
        if (new_exp < -10) return (uint16_t)sign;
        mant |= 0x800000u;
        int shift = 14 - new_exp;
        uint32_t half = mant >> shift;
        uint32_t rem = mant & ((1u << shift) - 1u);
        uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1u))) half++;
        return (uint16_t)(sign | half);
    }
    uint32_t half = mant >> 13;
    uint32_t rem = mant & 0x1FFFu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) {
        half++;
        if (half == 0x400u) {
            half = 0;
            new_exp++;
            if (new_exp >= 0x1F) return (uint16_t)(sign | 0x7C00u);
        }
    }
    return (uint16_t)(sign | ((uint32_t)new_exp << 10) | half);
}

float ten_f16_to_f32(uint16_t h) {
    uint32_t sign = ((uint32_t)h & 0x8000u) << 16;
    uint32_t exp = (h >> 10) & 0x1Fu;
    uint32_t mant = h & 0x3FFu;
    uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            int e = -1;
            uint32_t m = mant;
            do { e++; m <<= 1; } while (!(m & 0x400u));
            bits = sign | ((uint32_t)(127 - 15 - e) << 23) | ((m & 0x3FFu) << 13);
        }
    } else if (exp == 0x1F) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float out;
    memcpy(&out, &bits, 4);
    return out;
}

ten_tensor ten_alloc(int dtype, int rank, const long long* dims) {
    ten_tensor t;
    memset(&t, 0, sizeof(t));
    t.dtype = dtype;
    t.rank = rank;
    t.numel = 1;
    for (int d = 0; d < rank; d++) {
        t.dims[d] = dims[d];
        t.numel *= dims[d];
    }
    if (dtype == TEN_I32) {
        t.i32 = (int32_t*)calloc((size_t)t.numel, sizeof(int32_t));
    } else {
        t.f32 = (float*)calloc((size_t)t.numel, sizeof(float));
    }
    return t;
}

void ten_free(ten_tensor* t) {
    free(t->f32);
    free(t->i32);
    t->f32 = 0;
    t->i32 = 0;
}

int ten_read(const char* path, ten_tensor* t) {
    FILE* f = fopen(path, "rb");
    if (!f) return 1;
    char magic[4];
    if (fread(magic, 1, 4, f) != 4 || memcmp(magic, "TEN1", 4) != 0) { fclose(f); return 2; }
    uint8_t dtype, rank;
    uint16_t reserved;
    if (fread(&dtype, 1, 1, f) != 1 || fread(&rank, 1, 1, f) != 1 ||
        fread(&reserved, 2, 1, f) != 1 || rank > TEN_MAX_RANK) { fclose(f); return 3; }
    long long dims[TEN_MAX_RANK];
    for (int d = 0; d < rank; d++) {
        uint64_t v;
        if (fread(&v, 8, 1, f) != 1) { fclose(f); return 4; }
        dims[d] = (long long)v;
    }
    *t = ten_alloc(dtype, rank, dims);
    int rc = 0;
    for (long long i = 0; i < t->numel && rc == 0; i++) {
        if (dtype == TEN_F16) {
            uint16_t h;
            if (fread(&h, 2, 1, f) != 1) rc = 5;
            else t->f32[i] = ten_f16_to_f32(h);
        } else if (dtype == TEN_F32) {
            if (fread(&t->f32[i], 4, 1, f) != 1) rc = 5;
        } else {
            if (fread(&t->i32[i], 4, 1, f) != 1) rc = 5;
        }
    }
    fclose(f);
    return rc;
}

int ten_write(const char* path, const ten_tensor* t) {
    FILE* f = fopen(path, "wb");
    if (!f) return 1;
    fwrite("TEN1", 1, 4, f);
    uint8_t dtype = (uint8_t)t->dtype, rank = (uint8_t)t->rank;
    uint16_t reserved = 0;
    fwrite(&dtype, 1, 1, f);
    fwrite(&rank, 1, 1, f);
    fwrite(&reserved, 2, 1, f);
    for (int d = 0; d < t->rank; d++) {
        uint64_t v = (uint64_t)t->dims[d];
        fwrite(&v, 8, 1, f);
    }
    for (long long i = 0; i < t->numel; i++) {
        if (t->dtype == TEN_F16) {
            uint16_t h = ten_f32_to_f16(t->f32[i]);
            fwrite(&h, 2, 1, f);
        } else if (t->dtype == TEN_F32) {
            fwrite(&t->f32[i], 4, 1, f);
        } else {
            fwrite(&t->i32[i], 4, 1, f);
        }
    }
    int rc = ferror(f) ? 6 : 0;
    fclose(f);
    return rc;
}
)";

constexpr const char* kRunnerMain = R"(int kernel_main(int argc, char** argv);
int main(int argc, char** argv) { return kernel_main(argc, argv); }
)";

struct PreparedCKernel : PreparedKernel {
    std::filesystem::path binary;
    std::filesystem::path io_dir;
    std::filesystem::path logs_dir;
    IoSpec io;
    std::vector<TensorDeclSpec> output_decls;  // names + dtypes for readback
    std::map<std::string, DType> dtypes;
    int run_counter = 0;
};

std::string format_scalar(double v) {
    if (v == static_cast<double>(static_cast<long long>(v))) {
        return std::to_string(static_cast<long long>(v));
    }
    return util::format_double(v);
}

}  // namespace

PrepareOutcome CCpuBackend::prepare(const core::KernelCandidate& candidate,
                                    const core::OperatorSpec& task,
                                    const std::filesystem::path& scratch) {
    PrepareOutcome out;
    if (candidate.dsl != "c") {
        out.status = VerifyStatus::CompileFail;
        out.log = "c_cpu backend runs dsl 'c', got '" + candidate.dsl + "'";
        return out;
    }

    const auto src_dir = scratch / "src";
    const auto bin_dir = scratch / "bin";
    const auto io_dir = scratch / "io";
    const auto logs_dir = scratch / "logs";
    for (const auto& d : {src_dir, bin_dir, io_dir, logs_dir}) std::filesystem::create_directories(d);

    util::write_file(src_dir / "kernel.c", candidate.source);
    util::write_file(src_dir / "ten_io.h", kTenIoHeader);
    util::write_file(src_dir / "ten_io.c", kTenIoSource);
    util::write_file(src_dir / "runner_main.c", kRunnerMain);

    util::CommandSpec cmd;
    cmd.argv = {opts_.compiler, "-O2", "-std=c11"};
    if (opts_.sanitize) {
        cmd.argv.push_back("-fsanitize=address");
        cmd.argv.push_back("-g");
    }
    for (const auto& f : opts_.extra_flags) cmd.argv.push_back(f);
    const auto binary = bin_dir / "kernel";
    cmd.argv.insert(cmd.argv.end(),
                    {(src_dir / "kernel.c").string(), (src_dir / "ten_io.c").string(),
                     (src_dir / "runner_main.c").string(), "-o", binary.string(), "-lm"});
    cmd.timeout_ms = opts_.compile_timeout_ms;

    auto res = util::run_command(cmd);
    util::write_file(logs_dir / "compile.log", res.err + res.out);
    if (res.timed_out) {
        out.status = VerifyStatus::Timeout;
        out.log = "compiler timed out after " + std::to_string(opts_.compile_timeout_ms) + " ms";
        return out;
    }
    if (!res.ok()) {
        out.status = VerifyStatus::CompileFail;
        out.log = res.err.empty() ? res.out : res.err;
        return out;
    }

    auto prepared = std::make_unique<PreparedCKernel>();
    prepared->binary = binary;
    prepared->io_dir = io_dir;
    prepared->logs_dir = logs_dir;

    ReferenceEvaluator ref(task);
    prepared->io = ref.io();
    for (const auto& name : prepared->io.outputs) {
        prepared->output_decls.push_back({name, {}, ref.tensor_dtype(name)});
    }
    for (const auto& name : prepared->io.inputs) prepared->dtypes[name] = ref.tensor_dtype(name);

    out.kernel = std::move(prepared);
    return out;
}

RunOutcome CCpuBackend::run(PreparedKernel& kernel, const interp::Binding& inputs,
                            const RunLimits& limits) {
    auto& prep = static_cast<PreparedCKernel&>(kernel);
    RunOutcome out;
    const int run_id = prep.run_counter++;

    util::CommandSpec cmd;
    cmd.argv.push_back(prep.binary.string());
    cmd.timeout_ms = limits.timeout_ms;
    cmd.cwd = prep.io_dir;

    // Inputs: only input tensors are materialized in the io directory, so a
    // kernel cannot shortcut by reading expected outputs.
    for (const auto& name : prep.io.inputs) {
        auto it = inputs.tensor_values.find(name);
        if (it == inputs.tensor_values.end()) {
            out.status = VerifyStatus::RuntimeFail;
            out.log = "no tensor bound for input '" + name + "'";
            return out;
        }
        const auto path = prep.io_dir / ("in_" + name + ".ten");
        interp::write_ten(path, it->second);
        cmd.argv.push_back(path.filename().string());
    }
    std::vector<std::filesystem::path> out_paths;
    for (const auto& name : prep.io.outputs) {
        const auto path = prep.io_dir / ("out_" + name + ".ten");
        std::filesystem::remove(path);
        out_paths.push_back(path);
        cmd.argv.push_back(path.filename().string());
    }
    for (const auto& [name, value] : inputs.symbol_values) {
        cmd.argv.push_back(name + "=" + std::to_string(value));
    }
    for (const auto& [name, value] : inputs.constexpr_values) {
        cmd.argv.push_back(name + "=" + format_scalar(value));
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto res = util::run_command(cmd);
    out.wall_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    out.cost_units = out.wall_us;

    if (run_id == 0) util::write_file(prep.logs_dir / "run.log", res.err + res.out);
    if (res.timed_out) {
        out.status = VerifyStatus::Timeout;
        out.log = "kernel timed out after " + std::to_string(limits.timeout_ms) + " ms";
        return out;
    }
    if (!res.ok()) {
        out.status = VerifyStatus::RuntimeFail;
        out.log = "kernel exited with " +
                  (res.term_signal ? "signal " + std::to_string(res.term_signal)
                                   : "status " + std::to_string(res.exit_code)) +
                  "\n" + res.err;
        return out;
    }

    for (std::size_t i = 0; i < prep.io.outputs.size(); ++i) {
        try {
            out.outputs[prep.io.outputs[i]] = interp::read_ten(out_paths[i]);
        } catch (const std::exception& e) {
            out.status = VerifyStatus::RuntimeFail;
            out.log = "kernel did not produce output '" + prep.io.outputs[i] + "': " + e.what();
            return out;
        }
    }
    return out;
}

}  // namespace kgen::verify
