#include "seco/components.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "seco/error.hpp"
#include "seco/rle.hpp"

namespace seco {
namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // root is always the smallest index
  }

 private:
  std::vector<std::size_t> parent_;
};

// Returns p if it is one of the (column-major) pixels, else the nearest one;
// ties go to the first pixel in row-major order.
Point snap_to_pixels(Point p, const std::vector<std::uint64_t>& colmajor, int height) {
  const std::uint64_t key = static_cast<std::uint64_t>(p.x) * height + p.y;
  if (std::binary_search(colmajor.begin(), colmajor.end(), key)) return p;
  Point best = p;
  std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
  for (std::uint64_t idx : colmajor) {
    const int x = static_cast<int>(idx / height), y = static_cast<int>(idx % height);
    const std::int64_t dx = x - p.x, dy = y - p.y;
    const std::int64_t d = dx * dx + dy * dy;
    if (d < best_d || (d == best_d && (y < best.y || (y == best.y && x < best.x)))) {
      best_d = d;
      best = {x, y};
    }
  }
  return best;
}

}  // namespace

Point mask_center(const BinaryMask& mask) {
  double sx = 0.0, sy = 0.0;
  std::vector<std::uint64_t> pixels;
  for (int x = 0; x < mask.width; ++x)
    for (int y = 0; y < mask.height; ++y)
      if (mask.at(x, y)) {
        sx += x;
        sy += y;
        pixels.push_back(static_cast<std::uint64_t>(x) * mask.height + y);
      }
  if (pixels.empty()) throw Error(ErrorCode::EmptyMask, "cannot take the center of an empty mask");
  const double n = static_cast<double>(pixels.size());
  return snap_to_pixels(Point{static_cast<int>(std::lround(sx / n)), static_cast<int>(std::lround(sy / n))}, pixels,
                        mask.height);
}

std::vector<Component> connected_components(const LabelMap& map, Adjacency scheme,
                                            const std::optional<std::set<int>>& class_filter) {
  const int w = map.width, h = map.height;
  const std::size_t n = map.size();
  auto selected = [&](std::uint8_t v) {
    if (v == kVoid) return false;
    return !class_filter || class_filter->count(v) > 0;
  };

  // Two-pass labeling: union with already-visited neighbours, then resolve roots.
  DisjointSet sets(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v = map.at(x, y);
      if (!selected(v)) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      auto link = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        if (map.at(nx, ny) == v) sets.unite(idx, static_cast<std::size_t>(ny) * w + nx);
      };
      link(x - 1, y);
      link(x, y - 1);
      if (scheme == Adjacency::Eight) {
        link(x - 1, y - 1);
        link(x + 1, y - 1);
      }
    }
  }

  struct Accum {
    std::int64_t area = 0;
    double sx = 0, sy = 0;
    BBox box{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
  };
  std::vector<std::int64_t> slot(n, -1);
  std::vector<std::size_t> roots;
  std::vector<Accum> acc;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!selected(map.data[idx])) continue;
      const std::size_t root = sets.find(idx);
      if (slot[root] < 0) {
        slot[root] = static_cast<std::int64_t>(roots.size());
        roots.push_back(root);
        acc.emplace_back();
      }
      Accum& a = acc[static_cast<std::size_t>(slot[root])];
      ++a.area;
      a.sx += x;
      a.sy += y;
      a.box.x0 = std::min(a.box.x0, x);
      a.box.y0 = std::min(a.box.y0, y);
      a.box.x1 = std::max(a.box.x1, x);
      a.box.y1 = std::max(a.box.y1, y);
    }
  }

  std::vector<std::vector<std::uint64_t>> pixels(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) pixels[k].reserve(static_cast<std::size_t>(acc[k].area));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!selected(map.data[idx])) continue;
      pixels[static_cast<std::size_t>(slot[sets.find(idx)])].push_back(static_cast<std::uint64_t>(x) * h + y);
    }
  }

  std::vector<Component> out(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    Component& c = out[k];
    c.cls = map.data[roots[k]];
    c.area = acc[k].area;
    c.bbox = acc[k].box;
    c.first_pixel = static_cast<std::int64_t>(roots[k]);
    c.mask = rle_from_sorted_indices(h, w, pixels[k]);
    c.centroid = snap_to_pixels(Point{static_cast<int>(std::lround(acc[k].sx / c.area)),
                                      static_cast<int>(std::lround(acc[k].sy / c.area))},
                                pixels[k], h);
  }

  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.area != b.area) return a.area > b.area;
    return a.first_pixel < b.first_pixel;
  });
  return out;
}

BBox enlarge_box(const BBox& box, double area_factor, int width, int height) {
  if (area_factor < 1.0) throw Error(ErrorCode::InvalidArgument, "area_factor must be >= 1");
  const double scale = std::sqrt(area_factor);
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  const double hw = 0.5 * (box.x1 - box.x0) * scale;
  const double hh = 0.5 * (box.y1 - box.y0) * scale;
  BBox out;
  out.x0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
  out.y0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
  out.x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + hw)));
  out.y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + hh)));
  return out;
}

double mask_iou(const MaskRLE& a, const MaskRLE& b) {
  const std::uint64_t inter = rle_intersection_area(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  if (uni == 0) throw Error(ErrorCode::BothEmpty, "IoU of two empty masks is undefined");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace seco
