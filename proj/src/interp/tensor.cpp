#include "kgen/interp/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kgen/util/text.hpp"

namespace kgen::interp {

std::uint16_t f32_to_f16_bits(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    const std::uint32_t sign = (bits >> 16) & 0x8000u;
    const std::uint32_t exp = (bits >> 23) & 0xFFu;
    std::uint32_t mant = bits & 0x7FFFFFu;

    if (exp == 0xFF) {  // inf / nan
        return static_cast<std::uint16_t>(sign | 0x7C00u | (mant ? 0x200u : 0));
    }
    int new_exp = static_cast<int>(exp) - 127 + 15;
    if (new_exp >= 0x1F) {  // overflow -> inf
        return static_cast<std::uint16_t>(sign | 0x7C00u);
    }
    if (new_exp <= 0) {  // subnormal half or zero
        if (new_exp < -10) return static_cast<std::uint16_t>(sign);
        mant |= 0x800000u;  // implicit bit
        const int shift = 14 - new_exp;  // bits to drop from the 24-bit mantissa
        std::uint32_t half_mant = mant >> shift;
        const std::uint32_t rem = mant & ((1u << shift) - 1);
        const std::uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half_mant & 1))) ++half_mant;
        return static_cast<std::uint16_t>(sign | half_mant);
    }
    // Normal: keep 10 mantissa bits, round-to-nearest-even on the dropped 13.
    std::uint32_t half_mant = mant >> 13;
    const std::uint32_t rem = mant & 0x1FFFu;
    if (rem > 0x1000u || (rem == 0x1000u && (half_mant & 1))) {
        ++half_mant;
        if (half_mant == 0x400u) {  // mantissa carry bumps the exponent
            half_mant = 0;
            ++new_exp;
            if (new_exp >= 0x1F) return static_cast<std::uint16_t>(sign | 0x7C00u);
        }
    }
    return static_cast<std::uint16_t>(sign | (static_cast<std::uint32_t>(new_exp) << 10) | half_mant);
}

float f16_bits_to_f32(std::uint16_t h) {
    const std::uint32_t sign = (h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1Fu;
    const std::uint32_t mant = h & 0x3FFu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {  // subnormal
            int e = -1;
            std::uint32_t m = mant;
            do {
                ++e;
                m <<= 1;
            } while (!(m & 0x400u));
            bits = sign | static_cast<std::uint32_t>(127 - 15 - e) << 23 | ((m & 0x3FFu) << 13);
        }
    } else if (exp == 0x1F) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float out;
    std::memcpy(&out, &bits, 4);
    return out;
}

float f16_round(float v) { return f16_bits_to_f32(f32_to_f16_bits(v)); }

namespace {
std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}
}  // namespace

Tensor::Tensor(DType dtype, std::vector<std::int64_t> shape)
    : dtype_(dtype), shape_(std::move(shape)) {
    const std::int64_t n = shape_numel(shape_);
    if (dtype_ == DType::I32) {
        i_.assign(static_cast<std::size_t>(n), 0);
    } else {
        f_.assign(static_cast<std::size_t>(n), 0.0f);
    }
}

Tensor Tensor::from_values(DType dtype, std::vector<std::int64_t> shape,
                           std::span<const double> values) {
    Tensor t(dtype, std::move(shape));
    if (static_cast<std::int64_t>(values.size()) != t.numel()) {
        throw std::invalid_argument("value count does not match shape");
    }
    for (std::int64_t i = 0; i < t.numel(); ++i) t.set(i, values[static_cast<std::size_t>(i)]);
    return t;
}

std::int64_t Tensor::numel() const {
    return dtype_ == DType::I32 ? static_cast<std::int64_t>(i_.size())
                                : static_cast<std::int64_t>(f_.size());
}

double Tensor::get(std::int64_t flat) const {
    if (dtype_ == DType::I32) return i_[static_cast<std::size_t>(flat)];
    return f_[static_cast<std::size_t>(flat)];
}

void Tensor::set(std::int64_t flat, double v) {
    switch (dtype_) {
        case DType::F32:
            f_[static_cast<std::size_t>(flat)] = static_cast<float>(v);
            break;
        case DType::F16:
            f_[static_cast<std::size_t>(flat)] = f16_round(static_cast<float>(v));
            break;
        case DType::I32:
            i_[static_cast<std::size_t>(flat)] = static_cast<std::int32_t>(std::llround(v));
            break;
    }
}

std::int64_t Tensor::flat_index(std::span<const std::int64_t> idx) const {
    if (idx.size() != shape_.size()) throw std::invalid_argument("index rank mismatch");
    std::int64_t flat = 0;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
        flat = flat * shape_[d] + idx[d];
    }
    return flat;
}

bool Tensor::operator==(const Tensor& o) const {
    if (dtype_ != o.dtype_ || shape_ != o.shape_) return false;
    if (dtype_ == DType::I32) return i_ == o.i_;
    // Compare bit patterns so that -0.0 != 0.0 and NaN == NaN(same bits).
    return std::memcmp(f_.data(), o.f_.data(), f_.size() * sizeof(float)) == 0;
}

// --- .ten binary format -----------------------------------------------------

namespace {
constexpr char kMagic[4] = {'T', 'E', 'N', '1'};

std::uint8_t dtype_code(DType d) {
    switch (d) {
        case DType::F16: return 0;
        case DType::F32: return 1;
        case DType::I32: return 2;
    }
    return 1;
}

DType dtype_from_code(std::uint8_t c) {
    switch (c) {
        case 0: return DType::F16;
        case 1: return DType::F32;
        case 2: return DType::I32;
    }
    throw std::runtime_error("bad dtype code in .ten file");
}

template <typename T>
void write_le(std::ostream& os, T v) {
    // Little-endian hosts only (x86-64 / aarch64 little).
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void write_ten(const std::filesystem::path& path, const Tensor& t) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os.write(kMagic, 4);
    write_le<std::uint8_t>(os, dtype_code(t.dtype()));
    write_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
    write_le<std::uint16_t>(os, 0);
    for (std::int64_t d : t.shape()) write_le<std::uint64_t>(os, static_cast<std::uint64_t>(d));
    switch (t.dtype()) {
        case DType::F16:
            for (float v : t.float_data()) write_le<std::uint16_t>(os, f32_to_f16_bits(v));
            break;
        case DType::F32:
            for (float v : t.float_data()) write_le<float>(os, v);
            break;
        case DType::I32:
            for (std::int32_t v : t.int_data()) write_le<std::int32_t>(os, v);
            break;
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Tensor read_ten(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a .ten file: " + path.string());
    }
    const DType dtype = dtype_from_code(read_le<std::uint8_t>(is));
    const std::uint8_t rank = read_le<std::uint8_t>(is);
    read_le<std::uint16_t>(is);  // reserved
    std::vector<std::int64_t> shape;
    for (int d = 0; d < rank; ++d) shape.push_back(static_cast<std::int64_t>(read_le<std::uint64_t>(is)));
    Tensor t(dtype, shape);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        switch (dtype) {
            case DType::F16: t.set(i, f16_bits_to_f32(read_le<std::uint16_t>(is))); break;
            case DType::F32: t.set(i, read_le<float>(is)); break;
            case DType::I32: t.set(i, read_le<std::int32_t>(is)); break;
        }
    }
    if (!is) throw std::runtime_error("truncated .ten file: " + path.string());
    return t;
}

Tensor parse_ten_text(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string tag, dt;
    is >> tag >> dt;
    if (tag != "ten") throw std::runtime_error("text tensor must start with 'ten'");
    auto dtype = sketch::dtype_from(dt);
    if (!dtype) throw std::runtime_error("unknown dtype '" + dt + "'");
    std::string bracket;
    is >> bracket;
    if (bracket != "[") throw std::runtime_error("expected '[' before shape");
    std::vector<std::int64_t> shape;
    std::string item;
    while (is >> item && item != "]") shape.push_back(std::stoll(item));
    std::vector<double> values;
    double v;
    while (is >> v) values.push_back(v);
    return Tensor::from_values(*dtype, std::move(shape), values);
}

std::string format_ten_text(const Tensor& t) {
    std::ostringstream os;
    os << "ten " << sketch::dtype_name(t.dtype()) << " [";
    for (std::int64_t d : t.shape()) os << " " << d;
    os << " ]";
    for (std::int64_t i = 0; i < t.numel(); ++i) os << " " << util::format_double(t.get(i));
    return os.str();
}

}  // namespace kgen::interp
