#include "seco/io.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "seco/error.hpp"

namespace seco {
namespace {

constexpr std::array<char, 8> kFeatureMagic = {'S', 'E', 'C', 'O', 'F', 'M', '1', '\0'};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const std::uint8_t* pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::FileError, "cannot write " + path.string() + ": " + msg);
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::FileError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::FileError, "short write to " + path.string());
}

namespace {

enum class GrayRead { Ok, NotGray8, Failed };

// All C++ state lives in the caller so a longjmp out of libpng skips no destructors.
GrayRead read_gray8(std::FILE* file, std::string& message, std::vector<std::uint8_t>& pixels,
                    std::vector<png_bytep>& rows, png_uint_32& width, png_uint_32& height) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) return GrayRead::Failed;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return GrayRead::Failed;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return GrayRead::Failed;
  }
  png_init_io(png, file);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    return GrayRead::NotGray8;
  }
  pixels.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return GrayRead::Ok;
}

}  // namespace

LabelMap load_label_map(const std::filesystem::path& path, const Taxonomy* validate_against) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::FileError, "cannot open " + path.string());

  std::array<png_byte, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() || png_sig_cmp(sig.data(), 0, sig.size()) != 0)
    throw Error(ErrorCode::FormatError, path.string() + " is not a PNG file");

  std::string message;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  switch (read_gray8(file.get(), message, pixels, rows, width, height)) {
    case GrayRead::Ok: break;
    case GrayRead::NotGray8: throw Error(ErrorCode::FormatError, path.string() + " is not an 8-bit grayscale PNG");
    case GrayRead::Failed: throw Error(ErrorCode::FormatError, path.string() + ": " + message);
  }
  LabelMap map;
  map.width = static_cast<int>(width);
  map.height = static_cast<int>(height);
  map.data = std::move(pixels);
  if (validate_against) map.validate(validate_against->size());
  return map;
}

void save_label_map(const LabelMap& map, const std::filesystem::path& path) {
  if (map.data.size() != static_cast<std::size_t>(map.width) * map.height || map.width <= 0)
    throw Error(ErrorCode::InvalidArgument, "label map has inconsistent dims");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_png(path, map.width, map.height, PNG_FORMAT_GRAY, map.data.data());
}

RgbImage load_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::ImageNotFound, path.string());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::FormatError, path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::FormatError, path.string() + ": " + msg);
  }
  return out;
}

void save_rgb(const RgbImage& image, const std::filesystem::path& path) {
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * 3 || image.width <= 0)
    throw Error(ErrorCode::InvalidArgument, "rgb image has inconsistent dims");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_png(path, image.width, image.height, PNG_FORMAT_RGB, image.data.data());
}

FeatureMap parse_feature_map(const std::string& bytes) {
  constexpr std::size_t kHeader = 8 + 12;
  if (bytes.size() < kFeatureMagic.size() ||
      std::memcmp(bytes.data(), kFeatureMagic.data(), kFeatureMagic.size()) != 0)
    throw Error(ErrorCode::BadMagic, "feature file does not start with SECOFM1");
  if (bytes.size() < kHeader) throw Error(ErrorCode::TruncatedFile, "feature header is incomplete");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t h = read_u32_le(p + 8);
  const std::uint32_t w = read_u32_le(p + 12);
  const std::uint32_t d = read_u32_le(p + 16);
  const std::uint64_t n = static_cast<std::uint64_t>(h) * w * d;
  if (bytes.size() < kHeader + n * 4) throw Error(ErrorCode::TruncatedFile, "feature payload is incomplete");
  if (bytes.size() > kHeader + n * 4) throw Error(ErrorCode::FormatError, "trailing bytes after feature payload");

  FeatureMap fm(static_cast<int>(h), static_cast<int>(w), static_cast<int>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t bits = read_u32_le(p + kHeader + i * 4);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "feature value " + std::to_string(i) + " is not finite");
    fm.data[i] = v;
  }
  return fm;
}

FeatureMap load_feature_map(const std::filesystem::path& path) { return parse_feature_map(read_file(path)); }

std::string serialize_feature_map(const FeatureMap& fm) {
  std::string out(kFeatureMagic.begin(), kFeatureMagic.end());
  write_u32_le(out, static_cast<std::uint32_t>(fm.height));
  write_u32_le(out, static_cast<std::uint32_t>(fm.width));
  write_u32_le(out, static_cast<std::uint32_t>(fm.depth));
  out.reserve(out.size() + fm.data.size() * 4);
  for (float v : fm.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    write_u32_le(out, bits);
  }
  return out;
}

void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path) {
  write_file(path, serialize_feature_map(fm));
}

}  // namespace seco
