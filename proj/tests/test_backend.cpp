#include <algorithm>
#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "oracles.hpp"
#include "seco/backend.hpp"
#include "seco/error.hpp"
#include "seco/io.hpp"
#include "seco/json_io.hpp"
#include "seco/rle.hpp"

using namespace seco;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

MaskEntry entry(int id, MaskRLE rle, MaskSource src = MaskSource::Auto) { return MaskEntry{id, std::move(rle), src}; }

/// Scores every pool mask by the stated key and returns the winner's id.
int exhaustive_winner(const MaskSet& pool, const BBox& box, const Point& pt) {
  BinaryMask boxm(pool.width, pool.height);
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) boxm.at(x, y) = 1;
  bool any_contains = false;
  for (const auto& m : pool.masks) any_contains |= rle_decode(m.rle).at(pt.x, pt.y) != 0;
  int best = -1;
  double best_iou = -1;
  std::size_t best_area = 0;
  for (const auto& m : pool.masks) {
    const BinaryMask mm = rle_decode(m.rle);
    if (any_contains && !mm.at(pt.x, pt.y)) continue;
    const double iou = oracle::iou(mm, boxm);
    const std::size_t area = mm.count();
    const bool better = best < 0 || iou > best_iou || (iou == best_iou && area < best_area) ||
                        (iou == best_iou && area == best_area && m.id < best);
    if (better) {
      best = m.id;
      best_iou = iou;
      best_area = area;
    }
  }
  return best;
}

int id_of(const MaskSet& pool, const MaskRLE& rle) {
  for (const auto& m : pool.masks)
    if (m.rle == rle) return m.id;
  return -1;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "seco_test_backend" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("resolve_prompt prefers the exact box mask") {
  MaskSet pool{"i", 20, 20, {entry(0, rle_from_box(20, 20, BBox{15, 15, 19, 19})), entry(1, rle_from_box(20, 20, BBox{2, 2, 8, 8}))}};
  CHECK(resolve_prompt(pool, BBox{2, 2, 8, 8}, Point{5, 5}) == pool.masks[1].rle);
}

TEST_CASE("resolve_prompt nested masks follow exhaustive scoring") {
  const MaskRLE inner = rle_from_box(30, 30, BBox{10, 10, 14, 14});
  const MaskRLE outer = rle_from_box(30, 30, BBox{5, 5, 20, 20});
  MaskSet pool{"i", 30, 30, {entry(0, outer), entry(1, inner)}};
  CHECK(resolve_prompt(pool, BBox{9, 9, 15, 15}, Point{12, 12}) == inner);
  CHECK(resolve_prompt(pool, BBox{4, 4, 21, 21}, Point{12, 12}) == outer);
  CHECK(exhaustive_winner(pool, BBox{9, 9, 15, 15}, Point{12, 12}) == 1);
}

TEST_CASE("resolve_prompt falls back to the whole pool") {
  MaskSet pool{"i", 30, 30,
               {entry(0, rle_from_box(30, 30, BBox{0, 0, 4, 4})), entry(1, rle_from_box(30, 30, BBox{20, 20, 25, 25}))}};
  CHECK(resolve_prompt(pool, BBox{19, 19, 26, 26}, Point{12, 12}) == pool.masks[1].rle);
  CHECK(code_of([] { resolve_prompt(MaskSet{"i", 4, 4, {}}, BBox{0, 0, 1, 1}, Point{0, 0}); }) == ErrorCode::EmptyPool);
}

TEST_CASE("resolve_prompt matches the exhaustive oracle and ignores pool order") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> c(0, 23);
  for (int trial = 0; trial < 300; ++trial) {
    MaskSet pool{"i", 24, 24, {}};
    const int n = 2 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) {
      int x0 = c(rng), x1 = c(rng), y0 = c(rng), y1 = c(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      // Occasional duplicates exercise the id tie-break.
      if (k > 0 && rng() % 5 == 0)
        pool.masks.push_back(entry(k, pool.masks[0].rle));
      else
        pool.masks.push_back(entry(k, rle_from_box(24, 24, BBox{x0, y0, x1, y1})));
    }
    int x0 = c(rng), x1 = c(rng), y0 = c(rng), y1 = c(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const BBox box{x0, y0, x1, y1};
    const Point pt{c(rng), c(rng)};
    const int want = exhaustive_winner(pool, box, pt);
    const MaskRLE got = resolve_prompt(pool, box, pt);
    CHECK(got == pool.masks[static_cast<std::size_t>(want)].rle);
    MaskSet shuffled = pool;
    std::shuffle(shuffled.masks.begin(), shuffled.masks.end(), rng);
    CHECK(resolve_prompt(shuffled, box, pt) == got);
  }
}

TEST_CASE("file backend serves stored sets per image") {
  const fs::path dir = scratch_dir("dir");
  MaskSet set{"photo", 6, 5,
              {entry(0, rle_from_box(6, 5, BBox{0, 0, 1, 1})), entry(1, rle_from_box(6, 5, BBox{2, 2, 4, 5}), MaskSource::Prompt)}};
  write_json_file(dir / "photo.json", to_json(set));
  FileBackend backend(dir);
  const ImageRef ref{dir / "photo.png", "photo", 6, 5};
  const MaskSet autos = backend.auto_masks(ref);
  REQUIRE(autos.masks.size() == 1);
  CHECK(autos.masks[0].rle == set.masks[0].rle);
  CHECK(backend.prompt_segment(ref, BBox{2, 2, 4, 5}, Point{3, 3}) == set.masks[1].rle);
  CHECK(code_of([&] { backend.auto_masks(ImageRef{dir / "photo.png", "photo", 7, 5}); }) == ErrorCode::DimMismatch);
  CHECK(code_of([&] { backend.auto_masks(ImageRef{dir / "other.png", "other", 6, 5}); }) == ErrorCode::ImageNotFound);
}

TEST_CASE("file backend with no directory reads sibling masks.json") {
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  write_json_file(a / "masks.json", to_json(MaskSet{"image", 4, 4, {entry(0, rle_from_box(4, 4, BBox{0, 0, 1, 1}))}}));
  write_json_file(b / "masks.json", to_json(MaskSet{"image", 4, 4, {entry(0, rle_from_box(4, 4, BBox{2, 2, 3, 3}))}}));
  const auto backend = make_backend("file:");
  const MaskSet sa = backend->auto_masks(ImageRef{a / "image.png", "image", 4, 4});
  const MaskSet sb = backend->auto_masks(ImageRef{b / "image.png", "image", 4, 4});
  CHECK(sa.masks[0].rle != sb.masks[0].rle);
}

TEST_CASE("prompting an empty answer is an error") {
  FileBackend backend(std::map<std::string, MaskSet>{{"x", MaskSet{"x", 3, 3, {entry(0, MaskRLE{3, 3, {9}})}}}});
  CHECK(code_of([&] { backend.prompt_segment(ImageRef{"x.png", "x", 3, 3}, BBox{0, 0, 1, 1}, Point{0, 0}); }) ==
        ErrorCode::EmptyResult);
}

TEST_CASE("backend specs") {
  CHECK(code_of([] { make_backend("ftp://x"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { make_backend("file:/definitely/not/here"); }) == ErrorCode::BackendUnavailable);
  CHECK(make_backend("http://127.0.0.1:1/") != nullptr);
}

namespace {

/// In-process mock of the segmentation server: /segment echoes the box
/// interior, /auto_masks answers with two masks.
struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> concurrent{0}, peak{0};
  int force_status = 0;

  MockServer() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res, bool segment) {
      const int now = ++concurrent;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {}
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --concurrent;
      if (force_status) {
        res.status = force_status;
        res.set_content("{\"error\":\"forced\"}", "application/json");
        return;
      }
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (...) {
        res.status = 400;
        return;
      }
      if (!body.contains("image_path")) {
        res.status = 400;
        return;
      }
      if (body["image_path"].get<std::string>().find("missing") != std::string::npos) {
        res.status = 404;
        return;
      }
      if (segment) {
        const auto b = body["box"];
        const BBox box{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
        res.set_content(to_json(rle_from_box(4, 4, box)).dump(), "application/json");
      } else {
        MaskSet set{"img", 4, 4, {entry(0, rle_from_box(4, 4, BBox{0, 0, 1, 3})), entry(1, rle_from_box(4, 4, BBox{2, 0, 3, 3}))}};
        res.set_content(to_json(set).dump(), "application/json");
      }
    };
    server.Post("/v1/segment", [handler](const httplib::Request& q, httplib::Response& r) { handler(q, r, true); });
    server.Post("/v1/auto_masks", [handler](const httplib::Request& q, httplib::Response& r) { handler(q, r, false); });
    server.new_task_queue = [] { return new httplib::ThreadPool(8); };
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("http backend speaks the wire protocol") {
  MockServer mock;
  HttpBackend backend("127.0.0.1", mock.port);
  const ImageRef ref{"img.png", "img", 4, 4};
  CHECK(backend.prompt_segment(ref, BBox{0, 0, 1, 1}, Point{0, 0}) == rle_from_box(4, 4, BBox{0, 0, 1, 1}));
  const MaskSet set = backend.auto_masks(ref);
  CHECK(set.masks.size() == 2);
  CHECK(set.height == 4);
  CHECK(set.width == 4);
  CHECK(code_of([&] { backend.auto_masks(ImageRef{"img.png", "img", 5, 4}); }) == ErrorCode::DimMismatch);
  CHECK(code_of([&] { backend.auto_masks(ImageRef{"missing.png", "missing", 4, 4}); }) == ErrorCode::ImageNotFound);
  mock.force_status = 400;
  CHECK(code_of([&] { backend.auto_masks(ref); }) == ErrorCode::FormatError);
  mock.force_status = 503;
  CHECK(code_of([&] { backend.prompt_segment(ref, BBox{0, 0, 1, 1}, Point{0, 0}); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("http backend bounds requests in flight") {
  MockServer mock;
  HttpBackend backend("127.0.0.1", mock.port, HttpBackendOptions{2, std::chrono::seconds(5)});
  const ImageRef ref{"img.png", "img", 4, 4};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { backend.prompt_segment(ref, BBox{0, 0, 1, 1}, Point{0, 0}); });
  for (auto& t : threads) t.join();
  CHECK(mock.peak.load() <= 2);
  CHECK(mock.peak.load() >= 1);
}

TEST_CASE("http backend offline") {
  HttpBackend backend("127.0.0.1", 1, HttpBackendOptions{4, std::chrono::seconds(2)});
  CHECK(code_of([&] { backend.auto_masks(ImageRef{"img.png", "img", 4, 4}); }) == ErrorCode::BackendUnavailable);
}
