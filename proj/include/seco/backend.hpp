#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include "seco/types.hpp"

namespace seco {

/// An image as seen by a backend: where it lives and its dims.
struct ImageRef {
  std::filesystem::path path;
  std::string id;
  int height = 0;
  int width = 0;

  /// Id is the file stem; dims come from the PNG itself.
  static ImageRef from_file(const std::filesystem::path& path);
};

/// Promptable mask source. Implementations must be safe for concurrent queries.
class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;

  virtual bool supports_auto() const = 0;
  virtual bool supports_prompt() const = 0;

  /// Class-agnostic proposals for the whole image.
  virtual MaskSet auto_masks(const ImageRef& image) const = 0;
  /// One mask for a box + point prompt. Throws EmptyResult for an all-zero answer.
  virtual MaskRLE prompt_segment(const ImageRef& image, const BBox& box, const Point& point) const = 0;
};

/// Emulates a box + point prompt against a fixed pool of masks.
///
/// Candidates are the masks containing `point`; if there are none, the whole
/// pool. The winner maximises IoU with the box interior, ties going to the
/// smaller area and then the lower id, so the result does not depend on pool
/// order. Throws EmptyPool.
MaskRLE resolve_prompt(const MaskSet& pool, const BBox& box, const Point& point);

/// Serves precomputed MaskSet JSON files.
///
/// With a directory, image `foo.png` maps to `DIR/foo.json`. With an empty
/// directory the set is read from `masks.json` next to the image. Masks tagged
/// `auto` are the automatic proposals; prompting searches every mask.
class FileBackend final : public SegmenterBackend {
 public:
  explicit FileBackend(std::filesystem::path dir);
  /// In-memory pools keyed by image id.
  explicit FileBackend(std::map<std::string, MaskSet> sets);

  bool supports_auto() const override { return true; }
  bool supports_prompt() const override { return true; }
  MaskSet auto_masks(const ImageRef& image) const override;
  MaskRLE prompt_segment(const ImageRef& image, const BBox& box, const Point& point) const override;

 private:
  std::shared_ptr<const MaskSet> pool_for(const ImageRef& image) const;

  std::filesystem::path dir_;
  bool in_memory_ = false;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const MaskSet>> cache_;
};

struct HttpBackendOptions {
  int max_in_flight = 4;
  std::chrono::seconds timeout{30};
};

/// Client for the /v1/auto_masks and /v1/segment JSON protocol.
class HttpBackend final : public SegmenterBackend {
 public:
  HttpBackend(std::string host, int port, HttpBackendOptions options = {});

  bool supports_auto() const override { return true; }
  bool supports_prompt() const override { return true; }
  MaskSet auto_masks(const ImageRef& image) const override;
  MaskRLE prompt_segment(const ImageRef& image, const BBox& box, const Point& point) const override;

 private:
  std::string post(const std::string& route, const std::string& body) const;

  std::string host_;
  int port_;
  HttpBackendOptions options_;
  mutable std::counting_semaphore<1024> in_flight_;
};

/// "file:DIR", "file:" or "http://HOST:PORT".
std::unique_ptr<SegmenterBackend> make_backend(const std::string& spec);

}  // namespace seco
