#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "seco/types.hpp"

namespace seco {

struct RefinedImage {
  std::string image_ref;
  RefinedSet refined;
};

struct PoolEntry {
  std::string image_ref;
  Connectivity conn;
};

/// Minority-class connectivities drawn from the clean + corrected sets.
struct ResamplePool {
  std::map<int, std::vector<PoolEntry>> by_class;
  std::vector<std::int64_t> class_pixels;  // per class over all kept connectivities
  double median_pixels = 0.0;
  std::vector<int> minority_classes;

  bool empty() const { return by_class.empty(); }
};

/// A class is a minority when its pixel count is strictly below the median
/// over the classes that occur at all. Throws EmptyInput.
ResamplePool build_resample_pool(const std::vector<RefinedImage>& images, const Taxonomy& tax);

enum class Placement { Original, UniformRandom };

struct CopyPasteConfig {
  int n_paste = 1;
  Placement placement = Placement::Original;
};

struct PasteRecord {
  std::string image_ref;
  int conn_id = 0;
  int cls = 0;
  int dx = 0;  // translation applied to the source mask
  int dy = 0;
};

struct CopyPasteResult {
  RgbImage image;
  LabelMap label;
  std::vector<PasteRecord> pastes;
};

using ImageLoader = std::function<RgbImage(const std::string& image_ref)>;

/// Pastes n_paste pool connectivities (class uniformly, then item uniformly)
/// as rigid translations; later pastes overwrite earlier ones. Throws
/// PoolEmpty, DoesNotFit or DimMismatch.
CopyPasteResult copy_paste(const ResamplePool& pool, const RgbImage& dst_image, const LabelMap& dst_label,
                           std::uint64_t seed, const CopyPasteConfig& cfg, const ImageLoader& load_source);

}  // namespace seco
