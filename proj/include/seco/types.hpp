#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seco {

inline constexpr std::uint8_t kVoid = 255;
inline constexpr int kMaxClasses = 254;

/// H x W raster of class indices, row-major. 255 marks void.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  LabelMap(int w, int h, std::uint8_t fill = kVoid)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  /// Throws ClassOutOfRange if any non-void value is >= num_classes.
  void validate(int num_classes) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// 8-bit RGB raster, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* pixel(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &data[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

enum class ClassKind { Stuff, Things };

struct ClassInfo {
  std::string name;
  ClassKind kind = ClassKind::Stuff;
};

class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<ClassInfo> classes);

  int size() const noexcept { return static_cast<int>(classes_.size()); }
  const ClassInfo& operator[](int c) const { return classes_.at(static_cast<std::size_t>(c)); }
  bool is_things(int c) const { return (*this)[c].kind == ClassKind::Things; }
  bool is_stuff(int c) const { return (*this)[c].kind == ClassKind::Stuff; }
  const std::vector<ClassInfo>& classes() const noexcept { return classes_; }

 private:
  std::vector<ClassInfo> classes_;
};

/// Uncompressed binary raster (0/1), row-major.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Column-major run lengths; counts[0] is the leading zero run and may be 0.
struct MaskRLE {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  /// Number of foreground pixels (sum of odd-indexed runs).
  std::uint64_t area() const noexcept;
  /// Throws SumMismatch or FormatError when the run list is inconsistent with the dims.
  void validate() const;

  friend bool operator==(const MaskRLE&, const MaskRLE&) = default;
};

enum class MaskSource { Auto, Prompt };

struct MaskEntry {
  int id = 0;
  MaskRLE rle;
  MaskSource source = MaskSource::Auto;
};

struct MaskSet {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<MaskEntry> masks;

  void validate() const;
};

/// Inclusive pixel rectangle.
struct BBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool contains(const BBox& o) const noexcept {
    return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Dense per-pixel features, pixel-major then channel.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int depth = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int d)
      : height(h), width(w), depth(d), data(static_cast<std::size_t>(h) * w * d, 0.0f) {}

  std::span<const float> at(int x, int y) const {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * depth,
            static_cast<std::size_t>(depth)};
  }
  std::span<float> at(int x, int y) {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * depth,
            static_cast<std::size_t>(depth)};
  }
};

enum class Provenance { ThingsPrompt, StuffAlign, Corrected };

/// One aggregated region with its connectivity-level label and, after
/// correction, its classifier statistics.
struct Connectivity {
  int id = 0;
  MaskRLE mask;
  int label = 0;
  Provenance provenance = Provenance::StuffAlign;
  std::int64_t area = 0;
  // Area of the pseudo-label component that prompted a things connectivity; 0 for stuff.
  std::int64_t seed_area = 0;
  std::optional<double> loss;
  std::optional<double> eta;
  std::optional<std::vector<double>> probs;
  // Label before correction, set only on corrected connectivities.
  std::optional<int> original_label;

  double max_prob() const;
  int argmax_prob() const;
};

struct GmmComponent {
  double weight = 0.5;
  double mean = 0.0;
  double variance = 1.0;
};

struct GmmFit {
  GmmComponent low;
  GmmComponent high;
  double log_likelihood = 0.0;
  int iterations = 0;
  // Log-likelihood evaluated at the parameters entering each EM iteration,
  // followed by the final value.
  std::vector<double> log_likelihood_trace;
};

enum class Partition { Clean, Corrected, Dropped };

struct RefinedSet {
  std::vector<Connectivity> clean;
  std::vector<Connectivity> corrected;
  std::vector<Connectivity> dropped;
  double tau_ns = 0.60;
  double tau_cr = 0.95;

  /// Union of clean and corrected connectivities.
  std::vector<Connectivity> all() const;
};

struct SccConfig {
  double tau_ns = 0.60;
  double tau_cr = 0.95;
  int warmup_iters = 5000;
  int batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int em_max_iters = 100;
  double em_tol = 1e-6;

  void validate() const;
};

std::string_view to_string(ClassKind kind);
std::string_view to_string(MaskSource source);
std::string_view to_string(Provenance provenance);
std::string_view to_string(Partition partition);
ClassKind parse_class_kind(std::string_view s);
MaskSource parse_mask_source(std::string_view s);
Provenance parse_provenance(std::string_view s);
Partition parse_partition(std::string_view s);

}  // namespace seco
