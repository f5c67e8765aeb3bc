#pragma once

// Internal helpers for line-delimited JSON files. Not installed.

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "stars/error.hpp"

namespace stars::jsonl {

/// Invoke `fn(line_number, parsed_object)` for every non-blank line.
/// Line numbers are 1-based. Parse failures raise ParseError naming the file
/// and line.
inline void for_each_record(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": invalid JSON record: " + e.what());
        }
        if (!record.is_object()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected a JSON object per line");
        }
        fn(line_no, record);
    }
}

/// Fetch a required string field, with file/line context on failure.
inline std::string require_string(const nlohmann::json& record,
                                  const std::string& field,
                                  const std::filesystem::path& path,
                                  std::size_t line_no) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": missing or non-string field '" + field + "'");
    }
    return it->get<std::string>();
}

}  // namespace stars::jsonl
