#include "litho/layout.hpp"

#include <algorithm>
#include <string>

#include "litho/error.hpp"

namespace litho {
namespace {

Coord ceil_div(Coord a, Coord b) { return (a + b - 1) / b; }

Coord floor_div(Coord a, Coord b) {
  const Coord q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// First index c >= 0 whose pixel center origin + (c + 1/2) p is >= edge,
// computed in doubled coordinates to stay integral.
Coord first_center_at_or_after(Coord edge, Coord origin, Coord pixel) {
  // 2*origin + (2c+1)p >= 2*edge  <=>  c >= (2(edge-origin) - p) / (2p)
  const Coord num = 2 * (edge - origin) - pixel;
  const Coord den = 2 * pixel;
  return -floor_div(-num, den);
}

void paint(Bitmap& bitmap, const Rect& window, const Rect& r, Coord pixel) {
  const Coord n = bitmap.cols();
  const Coord c0 = std::clamp<Coord>(first_center_at_or_after(r.x0, window.x0, pixel), 0, n);
  const Coord c1 = std::clamp<Coord>(first_center_at_or_after(r.x1, window.x0, pixel), 0, n);
  const Coord r0 = std::clamp<Coord>(first_center_at_or_after(r.y0, window.y0, pixel), 0, n);
  const Coord r1 = std::clamp<Coord>(first_center_at_or_after(r.y1, window.y0, pixel), 0, n);
  if (c0 >= c1 || r0 >= r1) return;
  bitmap.block(r0, c0, r1 - r0, c1 - c0).setConstant(1);
}

Bitmap blank_bitmap(const Clip& clip, Coord pixel_nm) {
  if (pixel_nm <= 0 || clip.window.width() % pixel_nm != 0 ||
      clip.window.height() != clip.window.width()) {
    throw Error(ErrorKind::config, "layout", "rasterize",
                "clip side " + std::to_string(clip.window.width()) +
                    " is not divisible by pixel size " + std::to_string(pixel_nm),
                {clip.id});
  }
  const Coord side = clip.window.width() / pixel_nm;
  return Bitmap::Zero(side, side);
}

}  // namespace

std::string_view to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::epe: return "epe";
    case DefectKind::bridge: return "bridge";
    case DefectKind::neck: return "neck";
    case DefectKind::synthetic: return "synthetic";
  }
  return "synthetic";
}

DefectKind defect_kind_from_string(std::string_view name) {
  if (name == "epe") return DefectKind::epe;
  if (name == "bridge") return DefectKind::bridge;
  if (name == "neck") return DefectKind::neck;
  if (name == "synthetic") return DefectKind::synthetic;
  throw Error(ErrorKind::format, "layout", "defect_kind", "unknown defect kind '" + std::string(name) + "'");
}

std::string_view to_string(Label label) {
  return label == Label::hotspot ? "hotspot" : "non_hotspot";
}

Label label_from_string(std::string_view name) {
  if (name == "hotspot") return Label::hotspot;
  if (name == "non_hotspot") return Label::non_hotspot;
  throw Error(ErrorKind::format, "layout", "label", "unknown label '" + std::string(name) + "'");
}

void Layout::validate() const {
  if (!bbox.valid()) throw Error(ErrorKind::format, "layout", "validate", "degenerate bbox");
  for (std::size_t i = 0; i < rects.size(); ++i) {
    if (!rects[i].valid() || !bbox.contains(rects[i])) {
      throw Error(ErrorKind::format, "layout", "validate", "rect is degenerate or outside bbox",
                  {static_cast<long>(i)});
    }
  }
  for (std::size_t i = 0; i < defects.size(); ++i) {
    if (!bbox.contains(defects[i].x, defects[i].y)) {
      throw Error(ErrorKind::format, "layout", "validate", "defect outside bbox",
                  {static_cast<long>(i)});
    }
  }
}

void ClipGeometry::validate() const {
  if (clip_nm <= 0 || stride_nm <= 0 || core_nm <= 0) {
    throw Error(ErrorKind::config, "layout", "dispatch", "clip, stride and core must be positive");
  }
  if (core_nm != stride_nm) {
    throw Error(ErrorKind::config, "layout", "dispatch",
                "core size must equal stride for cores to tile the layout");
  }
  if (clip_nm % stride_nm != 0) {
    throw Error(ErrorKind::config, "layout", "dispatch", "stride must divide the clip size");
  }
  if (clip_nm < core_nm || (clip_nm - core_nm) % 2 != 0) {
    throw Error(ErrorKind::config, "layout", "dispatch", "core must be centered in the clip");
  }
  if (margin() < min_margin_nm) {
    throw Error(ErrorKind::config, "layout", "dispatch",
                "core-to-window margin " + std::to_string(margin()) + " nm is below the minimum " +
                    std::to_string(min_margin_nm) + " nm");
  }
}

Rect core_extent(const Layout& layout, const ClipGeometry& geom) {
  const Rect& b = layout.bbox;
  return {b.x0, b.y0, b.x0 + ceil_div(b.width(), geom.stride_nm) * geom.stride_nm,
          b.y0 + ceil_div(b.height(), geom.stride_nm) * geom.stride_nm};
}

std::vector<Clip> dispatch(const Layout& layout, const ClipGeometry& geom) {
  geom.validate();
  if (!layout.bbox.valid()) throw Error(ErrorKind::config, "layout", "dispatch", "degenerate bbox");
  const Rect extent = core_extent(layout, geom);
  const Coord nx = extent.width() / geom.stride_nm;
  const Coord ny = extent.height() / geom.stride_nm;
  const Coord margin = geom.margin();

  std::vector<Clip> clips;
  clips.reserve(static_cast<std::size_t>(nx * ny));
  for (Coord ty = 0; ty < ny; ++ty) {
    for (Coord tx = 0; tx < nx; ++tx) {
      Clip clip;
      clip.id = static_cast<ClipId>(ty * nx + tx);
      clip.core = {extent.x0 + tx * geom.stride_nm, extent.y0 + ty * geom.stride_nm,
                   extent.x0 + tx * geom.stride_nm + geom.core_nm,
                   extent.y0 + ty * geom.stride_nm + geom.core_nm};
      clip.window = {clip.core.x0 - margin, clip.core.y0 - margin, clip.core.x1 + margin,
                     clip.core.y1 + margin};
      clips.push_back(clip);
    }
  }
  return clips;
}

Label label_clip(const Clip& clip, std::span<const DefectMarker> defects) {
  const bool hit = std::any_of(defects.begin(), defects.end(), [&](const DefectMarker& d) {
    return clip.core.contains(d.x, d.y);
  });
  return hit ? Label::hotspot : Label::non_hotspot;
}

void label_all(std::vector<Clip>& clips, const Layout& layout, const ClipGeometry& geom) {
  for (auto& clip : clips) clip.label = Label::non_hotspot;
  if (clips.empty()) return;
  const Rect extent = core_extent(layout, geom);
  const Coord nx = extent.width() / geom.stride_nm;
  const Coord ny = extent.height() / geom.stride_nm;
  if (static_cast<Coord>(clips.size()) != nx * ny) {
    throw Error(ErrorKind::config, "layout", "label_all", "clip list does not match the geometry");
  }
  for (const auto& d : layout.defects) {
    const Coord tx = floor_div(d.x - extent.x0, geom.stride_nm);
    const Coord ty = floor_div(d.y - extent.y0, geom.stride_nm);
    if (tx < 0 || ty < 0 || tx >= nx || ty >= ny) continue;
    clips[static_cast<std::size_t>(ty * nx + tx)].label = Label::hotspot;
  }
}

RectIndex::RectIndex(const Layout& layout, Coord bucket_nm)
    : rects_(&layout.rects), bbox_(layout.bbox), bucket_(bucket_nm) {
  if (bucket_nm <= 0) throw Error(ErrorKind::config, "layout", "RectIndex", "bucket must be positive");
  nx_ = std::max<Coord>(1, ceil_div(bbox_.width(), bucket_));
  ny_ = std::max<Coord>(1, ceil_div(bbox_.height(), bucket_));
  buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
  for (std::size_t i = 0; i < rects_->size(); ++i) {
    const auto [bx0, by0, bx1, by1] = bucket_range((*rects_)[i]);
    for (Coord by = by0; by <= by1; ++by) {
      for (Coord bx = bx0; bx <= bx1; ++bx) buckets_[static_cast<std::size_t>(by * nx_ + bx)].push_back(i);
    }
  }
}

RectIndex::Range RectIndex::bucket_range(const Rect& r) const {
  auto clampx = [&](Coord v) { return std::clamp<Coord>(v, 0, nx_ - 1); };
  auto clampy = [&](Coord v) { return std::clamp<Coord>(v, 0, ny_ - 1); };
  return {clampx(floor_div(r.x0 - bbox_.x0, bucket_)), clampy(floor_div(r.y0 - bbox_.y0, bucket_)),
          clampx(floor_div(r.x1 - 1 - bbox_.x0, bucket_)), clampy(floor_div(r.y1 - 1 - bbox_.y0, bucket_))};
}

Bitmap rasterize(const Layout& layout, const Clip& clip, Coord pixel_nm) {
  Bitmap bitmap = blank_bitmap(clip, pixel_nm);
  for (const auto& r : layout.rects) {
    if (r.overlaps(clip.window)) paint(bitmap, clip.window, r, pixel_nm);
  }
  return bitmap;
}

Bitmap rasterize(const RectIndex& index, const Clip& clip, Coord pixel_nm) {
  Bitmap bitmap = blank_bitmap(clip, pixel_nm);
  index.for_each_overlapping(clip.window, [&](const Rect& r) { paint(bitmap, clip.window, r, pixel_nm); });
  return bitmap;
}

}  // namespace litho
