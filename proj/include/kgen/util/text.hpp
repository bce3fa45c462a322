#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgen::util {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_lines(std::string_view text);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Lowercased alphanumeric/underscore runs, in order of appearance.
std::vector<std::string> tokenize_words(std::string_view text);

/// A fenced code block: ```tag\n body \n```
struct FencedBlock {
    std::string tag;
    std::string body;
};
std::vector<FencedBlock> extract_fenced_blocks(std::string_view text);

/// Shortest decimal form of `v` that parses back to the same double.
std::string format_double(double v);

}  // namespace kgen::util
