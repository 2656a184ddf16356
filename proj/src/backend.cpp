#include "seco/backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <tuple>

#include "seco/components.hpp"
#include "seco/error.hpp"
#include "seco/io.hpp"
#include "seco/json_io.hpp"
#include "seco/rle.hpp"

namespace seco {

ImageRef ImageRef::from_file(const std::filesystem::path& path) {
  const RgbImage img = load_rgb(path);
  return ImageRef{path, path.stem().string(), img.height, img.width};
}

MaskRLE resolve_prompt(const MaskSet& pool, const BBox& box, const Point& point) {
  if (pool.masks.empty()) throw Error(ErrorCode::EmptyPool, "prompt pool is empty");
  const MaskRLE box_mask = rle_from_box(pool.height, pool.width, box);

  std::vector<const MaskEntry*> candidates;
  for (const auto& m : pool.masks)
    if (rle_contains(m.rle, point.x, point.y)) candidates.push_back(&m);
  if (candidates.empty())
    for (const auto& m : pool.masks) candidates.push_back(&m);

  const MaskEntry* best = nullptr;
  std::tuple<double, std::uint64_t, int> best_key{};
  for (const MaskEntry* m : candidates) {
    const double iou = mask_iou(m->rle, box_mask);
    // Larger IoU first, then smaller area, then lower id.
    const std::tuple<double, std::uint64_t, int> key{-iou, m->rle.area(), m->id};
    if (!best || key < best_key) {
      best = m;
      best_key = key;
    }
  }
  return best->rle;
}

FileBackend::FileBackend(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty() && !std::filesystem::is_directory(dir_))
    throw Error(ErrorCode::BackendUnavailable, "mask directory " + dir_.string() + " does not exist");
}

FileBackend::FileBackend(std::map<std::string, MaskSet> sets) : in_memory_(true) {
  for (auto& [id, set] : sets) {
    set.validate();
    cache_.emplace(id, std::make_shared<const MaskSet>(std::move(set)));
  }
}

std::shared_ptr<const MaskSet> FileBackend::pool_for(const ImageRef& image) const {
  std::filesystem::path path;
  std::string key = image.id;
  if (!in_memory_) {
    path = dir_.empty() ? image.path.parent_path() / "masks.json" : dir_ / (image.id + ".json");
    key = path.string();
  }
  std::shared_ptr<const MaskSet> pool;
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) pool = it->second;
  }
  if (!pool) {
    if (in_memory_) throw Error(ErrorCode::ImageNotFound, "no mask set for image '" + image.id + "'");
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::ImageNotFound, "no mask set at " + path.string());
    auto loaded = std::make_shared<const MaskSet>(load_mask_set(path));
    std::lock_guard lock(mutex_);
    pool = cache_.emplace(key, std::move(loaded)).first->second;
  }
  if ((image.height > 0 && pool->height != image.height) || (image.width > 0 && pool->width != image.width))
    throw Error(ErrorCode::DimMismatch, "stored masks for '" + image.id + "' do not match the image dims");
  return pool;
}

MaskSet FileBackend::auto_masks(const ImageRef& image) const {
  const auto pool = pool_for(image);
  MaskSet out{pool->image_id, pool->height, pool->width, {}};
  for (const auto& m : pool->masks)
    if (m.source == MaskSource::Auto) out.masks.push_back(m);
  return out;
}

MaskRLE FileBackend::prompt_segment(const ImageRef& image, const BBox& box, const Point& point) const {
  MaskRLE mask = resolve_prompt(*pool_for(image), box, point);
  if (mask.area() == 0) throw Error(ErrorCode::EmptyResult, "prompt resolved to an empty mask");
  return mask;
}

HttpBackend::HttpBackend(std::string host, int port, HttpBackendOptions options)
    : host_(std::move(host)), port_(port), options_(options), in_flight_(std::clamp(options.max_in_flight, 1, 1024)) {}

std::string HttpBackend::post(const std::string& route, const std::string& body) const {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(host_, port_);
  const auto secs = static_cast<time_t>(options_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  auto res = client.Post(route, body, "application/json");
  if (!res) throw Error(ErrorCode::BackendUnavailable, "no response from " + host_ + ":" + std::to_string(port_) + route);
  switch (res->status) {
    case 200: return res->body;
    case 400: throw Error(ErrorCode::FormatError, "backend rejected request: " + res->body);
    case 404: throw Error(ErrorCode::ImageNotFound, "backend: " + res->body);
    case 503: throw Error(ErrorCode::BackendUnavailable, "backend model not loaded");
    default: throw Error(ErrorCode::BackendUnavailable, "backend answered HTTP " + std::to_string(res->status));
  }
}

namespace {

Json parse_response(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed backend response: ") + e.what());
  }
}

Json image_field(const ImageRef& image) {
  return Json{{"image_path", std::filesystem::absolute(image.path).string()}};
}

void check_dims(const ImageRef& image, int height, int width) {
  if ((image.height > 0 && height != image.height) || (image.width > 0 && width != image.width))
    throw Error(ErrorCode::DimMismatch, "backend masks do not match the image dims");
}

}  // namespace

MaskSet HttpBackend::auto_masks(const ImageRef& image) const {
  MaskSet set = mask_set_from_json(parse_response(post("/v1/auto_masks", image_field(image).dump())));
  check_dims(image, set.height, set.width);
  return set;
}

MaskRLE HttpBackend::prompt_segment(const ImageRef& image, const BBox& box, const Point& point) const {
  Json body = image_field(image);
  body["box"] = {box.x0, box.y0, box.x1, box.y1};
  body["point"] = {point.x, point.y};
  MaskRLE rle = rle_from_json(parse_response(post("/v1/segment", body.dump())));
  check_dims(image, rle.height, rle.width);
  if (rle.area() == 0) throw Error(ErrorCode::EmptyResult, "backend returned an empty mask");
  return rle;
}

std::unique_ptr<SegmenterBackend> make_backend(const std::string& spec) {
  if (spec.rfind("file:", 0) == 0) return std::make_unique<FileBackend>(spec.substr(5));
  if (spec.rfind("http://", 0) == 0) {
    std::string rest = spec.substr(7);
    while (!rest.empty() && rest.back() == '/') rest.pop_back();
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) return std::make_unique<HttpBackend>(rest, 80);
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad port in backend '" + spec + "'");
    }
    return std::make_unique<HttpBackend>(rest.substr(0, colon), port);
  }
  throw Error(ErrorCode::InvalidArgument, "backend must be file:DIR or http://HOST:PORT, got '" + spec + "'");
}

}  // namespace seco
