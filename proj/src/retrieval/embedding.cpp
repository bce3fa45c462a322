#include "kgen/retrieval/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "kgen/util/hash.hpp"
#include "kgen/util/text.hpp"

namespace kgen::retrieval {

std::vector<float> HashedEmbedding::embed(std::string_view text) const {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& word : util::tokenize_words(text)) {
        const std::uint64_t h = util::fnv1a(word);
        const std::size_t bucket = h % dim_;
        const double sign = (h >> 63) ? -1.0 : 1.0;  // sign hashing reduces collision bias
        acc[bucket] += sign;
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    std::vector<float> out(dim_, 0.0f);
    if (norm == 0.0) {
        out[0] = 1.0f;  // canonical direction for empty/contentless text
        return out;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace kgen::retrieval
