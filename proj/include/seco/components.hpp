#pragma once

#include <optional>
#include <set>
#include <vector>

#include "seco/types.hpp"

namespace seco {

enum class Adjacency { Four = 4, Eight = 8 };

/// A maximal same-class region of a label map.
struct Component {
  int cls = 0;
  MaskRLE mask;
  std::int64_t area = 0;
  BBox bbox;
  // Rounded mean of the pixel coordinates, snapped onto the mask when the
  // mean falls outside it.
  Point centroid;
  // Row-major index of the first pixel in scan order; used for ordering.
  std::int64_t first_pixel = 0;
};

/// Components sorted by (class, area descending, first pixel). Void pixels
/// never form components.
std::vector<Component> connected_components(const LabelMap& map, Adjacency scheme = Adjacency::Eight,
                                            const std::optional<std::set<int>>& class_filter = std::nullopt);

/// Scales the half-extents by sqrt(area_factor) about the box center, rounds
/// outward and clamps to [0, width-1] x [0, height-1].
BBox enlarge_box(const BBox& box, double area_factor, int width, int height);

/// |a & b| / |a | b|. Throws DimMismatch, or BothEmpty when the union is empty.
double mask_iou(const MaskRLE& a, const MaskRLE& b);

/// Rounded coordinate mean of the mask, snapped to the nearest mask pixel
/// (ties: first in row-major order) if it lands outside. Throws EmptyMask.
Point mask_center(const BinaryMask& mask);

}  // namespace seco
