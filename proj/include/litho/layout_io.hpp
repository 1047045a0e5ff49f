#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litho/layout.hpp"

namespace litho {

// Layout JSON:
//   {"bbox":[x0,y0,x1,y1], "rects":[[x0,y0,x1,y1],...],
//    "defects":[{"x":..,"y":..,"kind":"epe|bridge|neck|synthetic"},...]}
nlohmann::json layout_to_json(const Layout& layout);
Layout layout_from_json(const nlohmann::json& j);

Layout load_layout(const std::filesystem::path& path);
void save_layout(const std::filesystem::path& path, const Layout& layout);

// Clip-set JSON, also the ingestion format for pre-cut labeled clips:
//   {"clips":[{"id":0,"window":[..],"core":[..],"label":"hotspot"},...]}
nlohmann::json clips_to_json(const std::vector<Clip>& clips);
std::vector<Clip> clips_from_json(const nlohmann::json& j);

/// Reads a whole file, throwing Error{io} when it cannot be opened.
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace litho
