#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seco/types.hpp"

namespace seco {

/// Column-major run-length encoding. The first run always counts zeros, so a
/// mask whose top-left pixel is set starts with a 0-length run.
MaskRLE rle_encode(const BinaryMask& mask);

/// Exact inverse of rle_encode. Throws SumMismatch when the runs do not cover
/// height * width pixels.
BinaryMask rle_decode(const MaskRLE& rle);

bool rle_contains(const MaskRLE& rle, int x, int y);

/// |a & b| computed on the runs directly. Throws DimMismatch.
std::uint64_t rle_intersection_area(const MaskRLE& a, const MaskRLE& b);

MaskRLE rle_union(const MaskRLE& a, const MaskRLE& b);
/// Pixels of a that are not in b.
MaskRLE rle_difference(const MaskRLE& a, const MaskRLE& b);

/// Mask of the box interior (inclusive) at the given dims.
MaskRLE rle_from_box(int height, int width, const BBox& box);

/// Tight bounding box, or nullopt for an empty mask.
std::optional<BBox> rle_bbox(const MaskRLE& rle);

}  // namespace seco

namespace seco {

/// Calls fn(x, y) for every foreground pixel, in column-major order.
template <typename Fn>
void for_each_set_pixel(const MaskRLE& rle, Fn&& fn) {
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    const std::uint64_t end = pos + rle.counts[i];
    if (i % 2 == 1)
      for (std::uint64_t p = pos; p < end; ++p) fn(static_cast<int>(p / rle.height), static_cast<int>(p % rle.height));
    pos = end;
  }
}

/// Builds a mask from strictly increasing column-major pixel indices (x * height + y).
MaskRLE rle_from_sorted_indices(int height, int width, const std::vector<std::uint64_t>& indices);

}  // namespace seco
