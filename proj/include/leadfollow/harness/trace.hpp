#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadfollow/harness/episode.hpp"

namespace leadfollow::harness {

inline constexpr int kTraceSchemaVersion = 1;

/// JSONL text: a schema header line, then per episode an "episode" line
/// followed by its "tick", "transition" and "snapshot" lines.
std::string trace_to_string(std::span<const RunRecord> records);
std::vector<RunRecord> trace_from_string(const std::string& text);

/// Throws IoError if the file cannot be written or read, ConfigError if the
/// content does not follow the schema.
void emit_trace(std::span<const RunRecord> records, const std::filesystem::path& path);
std::vector<RunRecord> parse_trace(const std::filesystem::path& path);

/// Every *.jsonl trace in a directory, in file-name order.
std::vector<RunRecord> load_traces(const std::filesystem::path& dir);

nlohmann::json to_json(const TickRecord& t);
TickRecord tick_from_json(const nlohmann::json& j);

}  // namespace leadfollow::harness
