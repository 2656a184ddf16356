#include "seco/features.hpp"

#include <cmath>

#include "seco/error.hpp"
#include "seco/io.hpp"
#include "seco/rle.hpp"

namespace seco {

FeatureMap extract_handcrafted_features(const RgbImage& image) {
  const int w = image.width, h = image.height;
  FeatureMap fm(h, w, kHandcraftedDepth);
  std::vector<double> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* px = image.pixel(x, y);
      gray[static_cast<std::size_t>(y) * w + x] = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
    }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* px = image.pixel(x, y);
      double sum = 0.0, sum_sq = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const double g = gray[static_cast<std::size_t>(ny) * w + nx];
          sum += g;
          sum_sq += g * g;
          ++n;
        }
      const double mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - mean * mean);

      auto f = fm.at(x, y);
      f[0] = static_cast<float>(static_cast<double>(x) / w);
      f[1] = static_cast<float>(static_cast<double>(y) / h);
      f[2] = static_cast<float>(px[0] / 255.0);
      f[3] = static_cast<float>(px[1] / 255.0);
      f[4] = static_cast<float>(px[2] / 255.0);
      f[5] = static_cast<float>(gray[static_cast<std::size_t>(y) * w + x]);
      f[6] = static_cast<float>(std::sqrt(var));
    }
  }
  return fm;
}

FeatureMap HandcraftedExtractor::extract() const { return extract_handcrafted_features(load_rgb(image_)); }

FeatureMap PrecomputedExtractor::extract() const {
  if (!std::filesystem::exists(file_)) throw Error(ErrorCode::FileError, "feature file " + file_.string() + " not found");
  return load_feature_map(file_);
}

std::unique_ptr<FeatureExtractor> make_feature_extractor(const std::string& spec) {
  if (spec.rfind("handcrafted:", 0) == 0) return std::make_unique<HandcraftedExtractor>(spec.substr(12));
  if (spec.rfind("file:", 0) == 0) return std::make_unique<PrecomputedExtractor>(spec.substr(5));
  throw Error(ErrorCode::InvalidArgument, "features must be handcrafted:IMAGE or file:PATH, got '" + spec + "'");
}

std::vector<double> pool_features(const FeatureMap& fm, const MaskRLE& mask) {
  if (mask.height != fm.height || mask.width != fm.width)
    throw Error(ErrorCode::DimMismatch, "mask dims differ from the feature map");
  std::vector<double> acc(static_cast<std::size_t>(fm.depth), 0.0);
  std::uint64_t n = 0;
  for_each_set_pixel(mask, [&](int x, int y) {
    const auto f = fm.at(x, y);
    for (int d = 0; d < fm.depth; ++d) acc[static_cast<std::size_t>(d)] += f[static_cast<std::size_t>(d)];
    ++n;
  });
  if (n == 0) throw Error(ErrorCode::EmptyMask, "cannot pool over an empty mask");
  for (double& v : acc) v /= static_cast<double>(n);
  return acc;
}

}  // namespace seco
