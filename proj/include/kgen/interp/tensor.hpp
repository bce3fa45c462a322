#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "kgen/sketch/ast.hpp"

namespace kgen::interp {

using sketch::DType;

float f16_round(float v);  // round-to-nearest-even to half precision
std::uint16_t f32_to_f16_bits(float v);
float f16_bits_to_f32(std::uint16_t bits);

/// Dense row-major tensor. f16 values are materialized at half precision
/// (kept widened to float in memory); i32 stores round to nearest.
class Tensor {
public:
    Tensor() = default;
    Tensor(DType dtype, std::vector<std::int64_t> shape);  // zero-filled
    static Tensor from_values(DType dtype, std::vector<std::int64_t> shape,
                              std::span<const double> values);

    DType dtype() const { return dtype_; }
    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t numel() const;
    std::size_t rank() const { return shape_.size(); }

    double get(std::int64_t flat) const;
    void set(std::int64_t flat, double v);

    std::int64_t flat_index(std::span<const std::int64_t> idx) const;

    const std::vector<float>& float_data() const { return f_; }
    const std::vector<std::int32_t>& int_data() const { return i_; }

    bool operator==(const Tensor& o) const;  // bit-exact

private:
    DType dtype_ = DType::F32;
    std::vector<std::int64_t> shape_;
    std::vector<float> f_;
    std::vector<std::int32_t> i_;
};

/// Binary tensor file (.ten): magic "TEN1", dtype byte, rank byte, two
/// reserved bytes, little-endian u64 dims, then raw little-endian values
/// (f16: 2-byte halfs, f32: 4-byte floats, i32: 4-byte ints).
void write_ten(const std::filesystem::path& path, const Tensor& t);
Tensor read_ten(const std::filesystem::path& path);

/// Text fixture form: `ten <dtype> [<d0> <d1> ...] v0 v1 ...`
Tensor parse_ten_text(std::string_view text);
std::string format_ten_text(const Tensor& t);

}  // namespace kgen::interp
