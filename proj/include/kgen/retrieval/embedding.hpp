#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace kgen::retrieval {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual bool deterministic() const = 0;
    /// Unit-L2-norm vector for the given text.
    virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Network-free embedding with real geometry: lowercased word tokens are
/// feature-hashed into `dim` signed buckets and the result L2-normalized.
/// Identical text always maps to the identical vector.
class HashedEmbedding : public EmbeddingProvider {
public:
    explicit HashedEmbedding(std::size_t dim = 256) : dim_(dim) {}
    std::size_t dimension() const override { return dim_; }
    bool deterministic() const override { return true; }
    std::vector<float> embed(std::string_view text) const override;

private:
    std::size_t dim_;
};

/// Cosine similarity with double accumulation.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace kgen::retrieval
