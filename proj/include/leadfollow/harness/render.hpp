#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "leadfollow/harness/episode.hpp"

namespace leadfollow::harness {

/// SVG of one episode: arena, obstacles, robot and leader paths, and for one
/// planner snapshot its hulls, goal sets and candidates (class "candidate",
/// one polyline each) with the executed one highlighted (class "selected").
/// A strip along the bottom colors each tick by its state. snapshot defaults
/// to the snapshot with the most candidates.
std::string render_svg(const RunRecord& record,
                       std::optional<std::size_t> snapshot = std::nullopt);

/// Throws IoError if the file cannot be written.
void render_svg(const RunRecord& record, const std::filesystem::path& path,
                std::optional<std::size_t> snapshot = std::nullopt);

}  // namespace leadfollow::harness
