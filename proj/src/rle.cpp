#include "seco/rle.hpp"

#include <algorithm>

#include "seco/error.hpp"

namespace seco {
namespace {

void require_same_dims(const MaskRLE& a, const MaskRLE& b) {
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorCode::DimMismatch, "masks have different dims");
}

template <typename Op>
MaskRLE combine(const MaskRLE& a, const MaskRLE& b, Op op) {
  require_same_dims(a, b);
  BinaryMask ma = rle_decode(a);
  const BinaryMask mb = rle_decode(b);
  for (std::size_t i = 0; i < ma.data.size(); ++i) ma.data[i] = op(ma.data[i] != 0, mb.data[i] != 0) ? 1 : 0;
  return rle_encode(ma);
}

}  // namespace

MaskRLE rle_encode(const BinaryMask& mask) {
  if (mask.width <= 0 || mask.height <= 0)
    throw Error(ErrorCode::InvalidArgument, "mask dims must be positive");
  MaskRLE rle;
  rle.height = mask.height;
  rle.width = mask.width;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) {
      const std::uint8_t v = mask.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const MaskRLE& rle) {
  rle.validate();
  BinaryMask mask(rle.width, rle.height);
  std::size_t pos = 0;
  std::uint8_t v = 0;
  for (std::uint32_t run : rle.counts) {
    for (std::uint32_t j = 0; j < run; ++j, ++pos) {
      if (v) {
        const int x = static_cast<int>(pos / rle.height);
        const int y = static_cast<int>(pos % rle.height);
        mask.at(x, y) = 1;
      }
    }
    v ^= 1;
  }
  return mask;
}

bool rle_contains(const MaskRLE& rle, int x, int y) {
  if (x < 0 || y < 0 || x >= rle.width || y >= rle.height) return false;
  const std::uint64_t target = static_cast<std::uint64_t>(x) * rle.height + y;
  std::uint64_t start = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    const std::uint64_t end = start + rle.counts[i];
    if (target < end) return (i % 2) == 1;
    start = end;
  }
  return false;
}

std::uint64_t rle_intersection_area(const MaskRLE& a, const MaskRLE& b) {
  require_same_dims(a, b);
  std::uint64_t total = 0;
  std::size_t ia = 0, ib = 0;
  std::uint64_t a_start = 0, b_start = 0;
  while (ia < a.counts.size() && ib < b.counts.size()) {
    const std::uint64_t a_end = a_start + a.counts[ia];
    const std::uint64_t b_end = b_start + b.counts[ib];
    if ((ia % 2) == 1 && (ib % 2) == 1) {
      const std::uint64_t lo = std::max(a_start, b_start);
      const std::uint64_t hi = std::min(a_end, b_end);
      if (hi > lo) total += hi - lo;
    }
    if (a_end <= b_end) {
      a_start = a_end;
      ++ia;
    } else {
      b_start = b_end;
      ++ib;
    }
  }
  return total;
}

MaskRLE rle_union(const MaskRLE& a, const MaskRLE& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

MaskRLE rle_difference(const MaskRLE& a, const MaskRLE& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; });
}

MaskRLE rle_from_box(int height, int width, const BBox& box) {
  BinaryMask mask(width, height);
  for (int y = std::max(0, box.y0); y <= std::min(height - 1, box.y1); ++y)
    for (int x = std::max(0, box.x0); x <= std::min(width - 1, box.x1); ++x) mask.at(x, y) = 1;
  return rle_encode(mask);
}

std::optional<BBox> rle_bbox(const MaskRLE& rle) {
  if (rle.area() == 0) return std::nullopt;
  BBox box{rle.width, rle.height, -1, -1};
  std::uint64_t start = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    const std::uint64_t end = start + rle.counts[i];
    if (i % 2 == 1 && end > start) {
      // A run may wrap across several columns.
      const int first_x = static_cast<int>(start / rle.height);
      const int last_x = static_cast<int>((end - 1) / rle.height);
      box.x0 = std::min(box.x0, first_x);
      box.x1 = std::max(box.x1, last_x);
      if (first_x != last_x) {
        box.y0 = 0;
        box.y1 = rle.height - 1;
      } else {
        box.y0 = std::min(box.y0, static_cast<int>(start % rle.height));
        box.y1 = std::max(box.y1, static_cast<int>((end - 1) % rle.height));
      }
    }
    start = end;
  }
  return box;
}

}  // namespace seco

namespace seco {

MaskRLE rle_from_sorted_indices(int height, int width, const std::vector<std::uint64_t>& indices) {
  MaskRLE rle;
  rle.height = height;
  rle.width = width;
  const std::uint64_t total = static_cast<std::uint64_t>(height) * width;
  std::uint64_t pos = 0;
  std::size_t i = 0;
  while (i < indices.size()) {
    const std::uint64_t start = indices[i];
    std::size_t j = i + 1;
    while (j < indices.size() && indices[j] == indices[j - 1] + 1) ++j;
    const std::uint64_t len = j - i;
    rle.counts.push_back(static_cast<std::uint32_t>(start - pos));
    rle.counts.push_back(static_cast<std::uint32_t>(len));
    pos = start + len;
    i = j;
  }
  if (rle.counts.empty() || pos < total) rle.counts.push_back(static_cast<std::uint32_t>(total - pos));
  return rle;
}

}  // namespace seco
