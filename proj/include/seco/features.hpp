#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "seco/types.hpp"

namespace seco {

inline constexpr int kHandcraftedDepth = 7;

/// Per-pixel channels: x/W, y/H, R, G, B, gray (all in [0,1]) and the
/// standard deviation of gray over the 3x3 window clipped to the image.
FeatureMap extract_handcrafted_features(const RgbImage& image);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract() const = 0;
};

class HandcraftedExtractor final : public FeatureExtractor {
 public:
  explicit HandcraftedExtractor(std::filesystem::path image) : image_(std::move(image)) {}
  FeatureMap extract() const override;

 private:
  std::filesystem::path image_;
};

/// Loads a SECOFM1 dump produced offline, e.g. by a deep backbone.
class PrecomputedExtractor final : public FeatureExtractor {
 public:
  explicit PrecomputedExtractor(std::filesystem::path file) : file_(std::move(file)) {}
  FeatureMap extract() const override;

 private:
  std::filesystem::path file_;
};

/// "handcrafted:IMAGE" or "file:PATH".
std::unique_ptr<FeatureExtractor> make_feature_extractor(const std::string& spec);

/// Mean feature vector over the mask pixels, accumulated in double.
/// Throws EmptyMask or DimMismatch.
std::vector<double> pool_features(const FeatureMap& fm, const MaskRLE& mask);

}  // namespace seco
