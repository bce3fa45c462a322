#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgen::retrieval {

/// One stored kernel with its retrieval metadata.
struct DbRecord {
    std::string id;  // content digest assigned on insert when empty
    std::string features;
    std::vector<float> logic_embedding;
    std::vector<float> shape_embedding;
    std::string dsl;
    std::string backend;
    std::string op_type;
    std::string shape_info;
    std::string code;
    std::string sketch;
    std::optional<double> perf_latency_us;
};

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScanFilter {
    std::optional<std::string> dsl;
    std::optional<std::string> backend;
    std::optional<std::string> op_type;
};

/// Append-only line-delimited store (.kdb): one JSON record per line,
/// embeddings as decimal float lists. Writers serialize through an exclusive
/// flock on the file and append each record with a single write, so
/// concurrent inserts from separate handles never tear; readers see a
/// consistent prefix.
class KernelDatabase {
public:
    explicit KernelDatabase(std::filesystem::path file);

    /// Validates invariants (matching embedding dimensions, unit norms,
    /// non-empty dsl/backend/op_type), assigns a content-digest id when the
    /// record has none, appends durably, and returns the id.
    std::string insert(DbRecord record);

    std::vector<DbRecord> scan(const ScanFilter& filter = {}) const;  // insertion order
    std::size_t size() const;

    const std::filesystem::path& file() const { return file_; }

private:
    std::filesystem::path file_;
};

std::string record_to_json(const DbRecord& r);
DbRecord record_from_json(const std::string& line);

}  // namespace kgen::retrieval
