#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "seco/types.hpp"

namespace seco {

/// Reads an 8-bit single-channel PNG. Values 0..254 are class indices, 255 is
/// void. With a taxonomy, values in [K, 254] raise ClassOutOfRange.
LabelMap load_label_map(const std::filesystem::path& path, const Taxonomy* validate_against = nullptr);
void save_label_map(const LabelMap& map, const std::filesystem::path& path);

/// Reads any 8-bit PNG and converts it to RGB.
RgbImage load_rgb(const std::filesystem::path& path);
void save_rgb(const RgbImage& image, const std::filesystem::path& path);

// Feature file layout: "SECOFM1\0", little-endian u32 H, W, D, then H*W*D
// little-endian f32, pixel-major then channel.
FeatureMap load_feature_map(const std::filesystem::path& path);
FeatureMap parse_feature_map(const std::string& bytes);
void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path);
std::string serialize_feature_map(const FeatureMap& fm);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace seco
