#include "litho/layout_io.hpp"

#include <fstream>
#include <sstream>

#include "litho/error.hpp"

namespace litho {
namespace {

using nlohmann::json;

json rect_to_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorKind::format, "layout", "parse", "rect must be [x0,y0,x1,y1]");
  }
  return {j[0].get<Coord>(), j[1].get<Coord>(), j[2].get<Coord>(), j[3].get<Coord>()};
}

}  // namespace

json layout_to_json(const Layout& layout) {
  json rects = json::array();
  for (const auto& r : layout.rects) rects.push_back(rect_to_json(r));
  json defects = json::array();
  for (const auto& d : layout.defects) {
    defects.push_back({{"x", d.x}, {"y", d.y}, {"kind", std::string(to_string(d.kind))}});
  }
  return {{"bbox", rect_to_json(layout.bbox)}, {"rects", rects}, {"defects", defects}};
}

Layout layout_from_json(const json& j) {
  try {
    Layout layout;
    layout.bbox = rect_from_json(j.at("bbox"));
    for (const auto& r : j.value("rects", json::array())) layout.rects.push_back(rect_from_json(r));
    for (const auto& d : j.value("defects", json::array())) {
      layout.defects.push_back({d.at("x").get<Coord>(), d.at("y").get<Coord>(),
                                defect_kind_from_string(d.value("kind", std::string("synthetic")))});
    }
    layout.validate();
    return layout;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "layout", "parse", e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "io", "read", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "io", "write", "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "io", "write", "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "io", "write", "cannot rename onto " + path.string());
}

Layout load_layout(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "layout", "load", path.string() + ": " + e.what());
  }
  return layout_from_json(j);
}

void save_layout(const std::filesystem::path& path, const Layout& layout) {
  write_atomic(path, layout_to_json(layout).dump() + "\n");
}

json clips_to_json(const std::vector<Clip>& clips) {
  json arr = json::array();
  for (const auto& c : clips) {
    json item = {{"id", c.id}, {"window", rect_to_json(c.window)}, {"core", rect_to_json(c.core)}};
    if (c.label) item["label"] = std::string(to_string(*c.label));
    arr.push_back(std::move(item));
  }
  return {{"clips", arr}};
}

std::vector<Clip> clips_from_json(const json& j) {
  try {
    std::vector<Clip> clips;
    for (const auto& item : j.at("clips")) {
      Clip c;
      c.id = item.at("id").get<ClipId>();
      c.window = rect_from_json(item.at("window"));
      c.core = rect_from_json(item.at("core"));
      if (item.contains("label")) c.label = label_from_string(item.at("label").get<std::string>());
      clips.push_back(c);
    }
    return clips;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, "layout", "parse_clips", e.what());
  }
}

}  // namespace litho
