#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace litho {

using Coord = std::int64_t;  // integer nanometers
using ClipId = long;

/// Axis-aligned rectangle [x0, x1) x [y0, y1) in integer nanometers.
struct Rect {
  Coord x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  Coord width() const { return x1 - x0; }
  Coord height() const { return y1 - y0; }
  Coord area() const { return width() * height(); }
  bool valid() const { return x0 < x1 && y0 < y1; }

  /// Half-open containment: low edges inside, high edges outside.
  bool contains(Coord x, Coord y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  /// Closed containment, used for "lies within the bbox" checks.
  bool contains_closed(Coord x, Coord y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool contains(const Rect& r) const { return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1; }
  bool overlaps(const Rect& r) const { return x0 < r.x1 && r.x0 < x1 && y0 < r.y1 && r.y0 < y1; }

  bool operator==(const Rect&) const = default;
};

enum class DefectKind : std::uint8_t { epe, bridge, neck, synthetic };

std::string_view to_string(DefectKind kind);
DefectKind defect_kind_from_string(std::string_view name);

struct DefectMarker {
  Coord x = 0, y = 0;
  DefectKind kind = DefectKind::synthetic;
  bool operator==(const DefectMarker&) const = default;
};

struct Layout {
  Rect bbox;
  std::vector<Rect> rects;
  std::vector<DefectMarker> defects;

  /// Throws Error{format} if a rect or defect leaves the bbox or is degenerate.
  void validate() const;
};

enum class Label : std::uint8_t { non_hotspot = 0, hotspot = 1 };

std::string_view to_string(Label label);
Label label_from_string(std::string_view name);

struct Clip {
  ClipId id = 0;
  Rect window;
  Rect core;
  std::optional<Label> label;
};

/// Sliding-window geometry: clip side, scan stride and core side.
struct ClipGeometry {
  Coord clip_nm = 690;
  Coord stride_nm = 230;
  Coord core_nm = 230;
  Coord min_margin_nm = 230;

  Coord margin() const { return (clip_nm - core_nm) / 2; }
  void validate() const;
};

/// Region tiled by the clip cores: the bbox grown on its high sides to a whole
/// number of strides.
Rect core_extent(const Layout& layout, const ClipGeometry& geom);

/// Scans the layout with a clip_nm window moving by stride_nm. Cores tile
/// core_extent() exactly; windows reach margin() past it into empty padding.
/// Clips are numbered row-major from the low-left corner.
std::vector<Clip> dispatch(const Layout& layout, const ClipGeometry& geom);

/// Hotspot iff at least one defect lies in the half-open core.
Label label_clip(const Clip& clip, std::span<const DefectMarker> defects);

/// Labels every clip in place from the layout's defect markers.
void label_all(std::vector<Clip>& clips, const Layout& layout, const ClipGeometry& geom);

/// Row-major binary raster; row index grows with y.
using Bitmap = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform bucket grid over the layout rects for window queries.
class RectIndex {
 public:
  RectIndex(const Layout& layout, Coord bucket_nm);

  template <typename Fn>
  void for_each_overlapping(const Rect& query, Fn&& fn) const {
    const auto [bx0, by0, bx1, by1] = bucket_range(query);
    for (Coord by = by0; by <= by1; ++by) {
      for (Coord bx = bx0; bx <= bx1; ++bx) {
        for (const std::size_t i : buckets_[static_cast<std::size_t>(by * nx_ + bx)]) {
          const Rect& r = (*rects_)[i];
          if (r.overlaps(query)) fn(r);
        }
      }
    }
  }

 private:
  struct Range { Coord x0, y0, x1, y1; };
  Range bucket_range(const Rect& r) const;

  const std::vector<Rect>* rects_;
  Rect bbox_;
  Coord bucket_;
  Coord nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
};

/// Pixel (r, c) is set iff its center lies inside some layout rect
/// (half-open containment). The grid side is window side / pixel_nm.
Bitmap rasterize(const Layout& layout, const Clip& clip, Coord pixel_nm);
Bitmap rasterize(const RectIndex& index, const Clip& clip, Coord pixel_nm);

}  // namespace litho
