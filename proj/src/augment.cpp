#include "seco/augment.hpp"

#include <algorithm>
#include <random>

#include "seco/error.hpp"
#include "seco/rle.hpp"

namespace seco {

ResamplePool build_resample_pool(const std::vector<RefinedImage>& images, const Taxonomy& tax) {
  if (images.empty()) throw Error(ErrorCode::EmptyInput, "no refined sets to pool from");
  ResamplePool pool;
  pool.class_pixels.assign(static_cast<std::size_t>(tax.size()), 0);
  for (const auto& img : images)
    for (const auto& c : img.refined.all()) {
      if (c.label < 0 || c.label >= tax.size())
        throw Error(ErrorCode::ClassOutOfRange, "connectivity label " + std::to_string(c.label));
      pool.class_pixels[static_cast<std::size_t>(c.label)] += c.area;
    }

  std::vector<std::int64_t> present;
  for (auto v : pool.class_pixels)
    if (v > 0) present.push_back(v);
  if (present.empty()) return pool;
  std::sort(present.begin(), present.end());
  const std::size_t m = present.size();
  pool.median_pixels = m % 2 == 1 ? static_cast<double>(present[m / 2])
                                  : 0.5 * static_cast<double>(present[m / 2 - 1] + present[m / 2]);

  for (int c = 0; c < tax.size(); ++c) {
    const auto px = pool.class_pixels[static_cast<std::size_t>(c)];
    if (px > 0 && static_cast<double>(px) < pool.median_pixels) pool.minority_classes.push_back(c);
  }
  for (const auto& img : images)
    for (const auto& c : img.refined.all())
      if (std::binary_search(pool.minority_classes.begin(), pool.minority_classes.end(), c.label))
        pool.by_class[c.label].push_back({img.image_ref, c});
  return pool;
}

CopyPasteResult copy_paste(const ResamplePool& pool, const RgbImage& dst_image, const LabelMap& dst_label,
                           std::uint64_t seed, const CopyPasteConfig& cfg, const ImageLoader& load_source) {
  if (pool.empty()) throw Error(ErrorCode::PoolEmpty, "resample pool is empty");
  if (dst_image.width != dst_label.width || dst_image.height != dst_label.height)
    throw Error(ErrorCode::DimMismatch, "destination image and label dims differ");

  CopyPasteResult out{dst_image, dst_label, {}};
  std::vector<int> classes;
  for (const auto& [cls, entries] : pool.by_class)
    if (!entries.empty()) classes.push_back(cls);
  if (classes.empty()) throw Error(ErrorCode::PoolEmpty, "resample pool is empty");

  std::mt19937_64 rng(seed);
  std::map<std::string, RgbImage> sources;
  for (int p = 0; p < cfg.n_paste; ++p) {
    const int cls = classes[std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng)];
    const auto& entries = pool.by_class.at(cls);
    const PoolEntry& entry = entries[std::uniform_int_distribution<std::size_t>(0, entries.size() - 1)(rng)];
    const auto box = rle_bbox(entry.conn.mask);
    if (!box) continue;
    if (box->width() > dst_label.width || box->height() > dst_label.height)
      throw Error(ErrorCode::DoesNotFit, "connectivity " + std::to_string(entry.conn.id) + " is larger than the destination");

    int dx = 0, dy = 0;
    if (cfg.placement == Placement::UniformRandom) {
      dx = std::uniform_int_distribution<int>(0, dst_label.width - box->width())(rng) - box->x0;
      dy = std::uniform_int_distribution<int>(0, dst_label.height - box->height())(rng) - box->y0;
    } else if (box->x1 >= dst_label.width || box->y1 >= dst_label.height) {
      throw Error(ErrorCode::DoesNotFit, "connectivity " + std::to_string(entry.conn.id) +
                                             " lies outside the destination at its original position");
    }

    auto it = sources.find(entry.image_ref);
    if (it == sources.end()) it = sources.emplace(entry.image_ref, load_source(entry.image_ref)).first;
    const RgbImage& src = it->second;
    if (src.width != entry.conn.mask.width || src.height != entry.conn.mask.height)
      throw Error(ErrorCode::DimMismatch, "source image dims differ from its connectivity mask");

    for_each_set_pixel(entry.conn.mask, [&](int x, int y) {
      const int tx = x + dx, ty = y + dy;
      std::copy_n(src.pixel(x, y), 3, out.image.pixel(tx, ty));
      out.label.at(tx, ty) = static_cast<std::uint8_t>(entry.conn.label);
    });
    out.pastes.push_back({entry.image_ref, entry.conn.id, cls, dx, dy});
  }
  return out;
}

}  // namespace seco
