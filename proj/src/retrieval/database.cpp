#include "kgen/retrieval/database.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "kgen/util/hash.hpp"

namespace kgen::retrieval {

using nlohmann::json;

std::string record_to_json(const DbRecord& r) {
    json j;
    j["id"] = r.id;
    j["features"] = r.features;
    j["logic_embedding"] = r.logic_embedding;
    j["shape_embedding"] = r.shape_embedding;
    j["dsl"] = r.dsl;
    j["backend"] = r.backend;
    j["op_type"] = r.op_type;
    j["shape_info"] = r.shape_info;
    j["code"] = r.code;
    j["sketch"] = r.sketch;
    if (r.perf_latency_us) j["perf_latency_us"] = *r.perf_latency_us;
    return j.dump();
}

DbRecord record_from_json(const std::string& line) {
    json j = json::parse(line);
    DbRecord r;
    r.id = j.at("id").get<std::string>();
    r.features = j.at("features").get<std::string>();
    r.logic_embedding = j.at("logic_embedding").get<std::vector<float>>();
    r.shape_embedding = j.at("shape_embedding").get<std::vector<float>>();
    r.dsl = j.at("dsl").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    r.op_type = j.at("op_type").get<std::string>();
    r.shape_info = j.at("shape_info").get<std::string>();
    r.code = j.at("code").get<std::string>();
    r.sketch = j.at("sketch").get<std::string>();
    if (j.contains("perf_latency_us")) r.perf_latency_us = j["perf_latency_us"].get<double>();
    return r;
}

namespace {

void check_unit_norm(const std::vector<float>& v, const char* which) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * static_cast<double>(x);
    norm = std::sqrt(norm);
    if (std::fabs(norm - 1.0) > 1e-3) {
        throw StorageError(std::string(which) + " embedding is not unit norm");
    }
}

}  // namespace

KernelDatabase::KernelDatabase(std::filesystem::path file) : file_(std::move(file)) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    if (!std::filesystem::exists(file_)) {
        std::ofstream touch(file_, std::ios::app);
        if (!touch) throw StorageError("cannot create database file " + file_.string());
    }
}

std::string KernelDatabase::insert(DbRecord record) {
    if (record.dsl.empty() || record.backend.empty() || record.op_type.empty()) {
        throw StorageError("record needs non-empty dsl, backend and op_type");
    }
    if (record.logic_embedding.size() != record.shape_embedding.size() ||
        record.logic_embedding.empty()) {
        throw StorageError("record embeddings must share a non-zero dimension");
    }
    check_unit_norm(record.logic_embedding, "logic");
    check_unit_norm(record.shape_embedding, "shape");
    if (record.id.empty()) {
        record.id = util::digest_hex(record.features + "\x1f" + record.dsl + "\x1f" +
                                     record.backend + "\x1f" + record.op_type + "\x1f" +
                                     record.code + "\x1f" + record.sketch);
    }

    const std::string line = record_to_json(record) + "\n";

    const int fd = ::open(file_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw StorageError("cannot open database file " + file_.string());
    if (::flock(fd, LOCK_EX) != 0) {
        ::close(fd);
        throw StorageError("cannot acquire append lease on " + file_.string());
    }
    const ssize_t written = ::write(fd, line.data(), line.size());
    const bool ok = written == static_cast<ssize_t>(line.size()) && ::fdatasync(fd) == 0;
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (!ok) throw StorageError("append failed on " + file_.string());
    return record.id;
}

std::vector<DbRecord> KernelDatabase::scan(const ScanFilter& filter) const {
    std::ifstream in(file_);
    if (!in) throw StorageError("cannot read database file " + file_.string());
    std::vector<DbRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        DbRecord r;
        try {
            r = record_from_json(line);
        } catch (const std::exception& e) {
            throw StorageError("corrupt record at " + file_.string() + ":" +
                               std::to_string(lineno) + ": " + e.what());
        }
        if (filter.dsl && r.dsl != *filter.dsl) continue;
        if (filter.backend && r.backend != *filter.backend) continue;
        if (filter.op_type && r.op_type != *filter.op_type) continue;
        out.push_back(std::move(r));
    }
    return out;
}

std::size_t KernelDatabase::size() const { return scan().size(); }

}  // namespace kgen::retrieval
