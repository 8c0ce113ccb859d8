#pragma once

// Line-delimited JSON records and small text helpers shared by every stage.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentcrowd {

using Json = nlohmann::json;

struct LineRecord {
    std::size_t line;  // 1-based
    Json value;
};

/// Parses one JSON value per non-blank line. Throws ParseError naming the line.
std::vector<LineRecord> read_jsonl(std::istream& in);
std::vector<LineRecord> read_jsonl_file(const std::filesystem::path& path);

/// Writes `value` compactly followed by '\n'. Object keys come out sorted,
/// which keeps every artifact byte-stable.
void write_jsonl(std::ostream& out, const Json& value);

/// Reads a JSON document that may contain // and /* */ comments.
Json load_config_json(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a torn file.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal text that round-trips `value`.
std::string format_shortest(double value);

/// Fixed notation with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

}  // namespace agentcrowd
