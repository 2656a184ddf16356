#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seco/error.hpp"
#include "seco/io.hpp"
#include "seco/json_io.hpp"

using namespace seco;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "seco_test_io";
  fs::create_directories(dir);
  return dir / name;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

std::string header(std::uint32_t h, std::uint32_t w, std::uint32_t d) {
  std::string s("SECOFM1\0", 8);
  for (std::uint32_t v : {h, w, d})
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  return s;
}

void append_f32(std::string& s, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

Taxonomy k_classes(int k) {
  std::vector<ClassInfo> c;
  for (int i = 0; i < k; ++i) c.push_back({"c" + std::to_string(i), ClassKind::Stuff});
  return Taxonomy(c);
}

}  // namespace

TEST_CASE("label map PNG round trip") {
  std::mt19937_64 rng(3);
  const LabelMap m = oracle::random_label_map(37, 21, 19, rng, 0.1);
  const fs::path p = scratch("labels.png");
  save_label_map(m, p);
  CHECK(load_label_map(p) == m);
  const Taxonomy tax = k_classes(19);
  CHECK(load_label_map(p, &tax) == m);
}

TEST_CASE("label value at or above K is rejected under validation") {
  LabelMap m(4, 4, 0);
  m.at(1, 1) = 254;
  const fs::path p = scratch("oor.png");
  save_label_map(m, p);
  const Taxonomy tax = k_classes(19);
  CHECK(code_of([&] { load_label_map(p, &tax); }) == ErrorCode::ClassOutOfRange);
  CHECK(load_label_map(p).at(1, 1) == 254);
}

TEST_CASE("RGB PNG is not a label map") {
  RgbImage img(3, 3);
  const fs::path p = scratch("rgb.png");
  save_rgb(img, p);
  CHECK(code_of([&] { load_label_map(p); }) == ErrorCode::FormatError);
  CHECK(load_rgb(p) == img);
}

TEST_CASE("missing image") {
  CHECK(code_of([&] { load_rgb(scratch("does_not_exist.png")); }) == ErrorCode::ImageNotFound);
}

TEST_CASE("feature file parses header and payload") {
  std::string bytes = header(2, 2, 1);
  for (float f : {1.0f, 2.0f, 3.0f, 4.0f}) append_f32(bytes, f);
  const FeatureMap fm = parse_feature_map(bytes);
  CHECK(fm.height == 2);
  CHECK(fm.width == 2);
  CHECK(fm.depth == 1);
  CHECK(fm.at(1, 0)[0] == 2.0f);
  CHECK(fm.at(0, 1)[0] == 3.0f);
  CHECK(serialize_feature_map(fm) == bytes);
}

TEST_CASE("feature file errors") {
  std::string ok = header(2, 2, 1);
  for (float f : {1.0f, 2.0f, 3.0f, 4.0f}) append_f32(ok, f);
  CHECK(code_of([&] { parse_feature_map(ok.substr(0, ok.size() - 2)); }) == ErrorCode::TruncatedFile);
  CHECK(code_of([&] { parse_feature_map(ok.substr(0, 10)); }) == ErrorCode::TruncatedFile);
  std::string bad = ok;
  bad[0] = 'X';
  CHECK(code_of([&] { parse_feature_map(bad); }) == ErrorCode::BadMagic);
  std::string nan = header(1, 1, 2);
  append_f32(nan, 0.5f);
  append_f32(nan, std::numeric_limits<float>::quiet_NaN());
  CHECK(code_of([&] { parse_feature_map(nan); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([&] { parse_feature_map(ok + "x"); }) == ErrorCode::FormatError);
}

TEST_CASE("feature file on disk round trip") {
  FeatureMap fm(3, 4, 2);
  for (std::size_t i = 0; i < fm.data.size(); ++i) fm.data[i] = static_cast<float>(i) * 0.25f - 1.0f;
  const fs::path p = scratch("f.secofm");
  save_feature_map(fm, p);
  const FeatureMap back = load_feature_map(p);
  CHECK(back.data == fm.data);
  CHECK(read_file(p) == serialize_feature_map(fm));
}

TEST_CASE("mask set JSON round trip and validation") {
  MaskSet s{"img", 2, 3, {{0, MaskRLE{2, 3, {1, 2, 3}}, MaskSource::Auto}, {1, MaskRLE{2, 3, {0, 6}}, MaskSource::Prompt}}};
  const MaskSet back = mask_set_from_json(to_json(s));
  CHECK(back.image_id == "img");
  REQUIRE(back.masks.size() == 2);
  CHECK(back.masks[0].rle == s.masks[0].rle);
  CHECK(back.masks[1].source == MaskSource::Prompt);
  Json bad = to_json(s);
  bad["masks"][0]["rle"]["counts"] = Json::array({1, 2});
  CHECK(code_of([&] { mask_set_from_json(bad); }) == ErrorCode::SumMismatch);
}

TEST_CASE("taxonomy JSON") {
  const Json j = Json::parse(R"([{"name":"road","kind":"stuff"},{"name":"car","kind":"things"}])");
  const Taxonomy t = taxonomy_from_json(j);
  CHECK(t.size() == 2);
  CHECK(t.is_stuff(0));
  CHECK(t.is_things(1));
  CHECK(to_json(t) == j);
  CHECK_THROWS_AS(taxonomy_from_json(Json::parse(R"([{"name":"a","kind":"stuff"},{"name":"a","kind":"stuff"}])")), Error);
}

TEST_CASE("connectivity JSON keeps statistics") {
  Connectivity c;
  c.id = 4;
  c.mask = MaskRLE{2, 2, {1, 3}};
  c.label = 2;
  c.provenance = Provenance::Corrected;
  c.area = 3;
  c.seed_area = 3;
  c.loss = 0.125;
  c.eta = 0.75;
  c.probs = std::vector<double>{0.1, 0.2, 0.7};
  c.original_label = 1;
  const Connectivity back = connectivity_from_json(to_json(c));
  CHECK(back.id == 4);
  CHECK(back.mask == c.mask);
  CHECK(back.provenance == Provenance::Corrected);
  CHECK(*back.loss == 0.125);
  CHECK(*back.eta == 0.75);
  CHECK(*back.probs == *c.probs);
  CHECK(*back.original_label == 1);
}

TEST_CASE("refined set JSON carries partitions") {
  RefinedSet r;
  Connectivity a;
  a.id = 1;
  a.mask = MaskRLE{1, 2, {0, 2}};
  a.area = 2;
  a.eta = 0.1;
  a.loss = 0.2;
  a.probs = std::vector<double>{0.5, 0.5};
  Connectivity b = a;
  b.id = 0;
  b.eta = 0.9;
  r.clean.push_back(a);
  r.dropped.push_back(b);
  const Json j = to_json(r, "x", 1, 2);
  CHECK(j["connectivities"][0]["id"] == 0);
  CHECK(j["connectivities"][0]["partition"] == "dropped");
  const RefinedSet back = refined_set_from_json(j);
  CHECK(back.clean.size() == 1);
  CHECK(back.dropped.size() == 1);
  CHECK(back.tau_ns == doctest::Approx(0.60));
}

TEST_CASE("JSON files are byte-stable") {
  const Json j = Json::parse(R"({"b":[1,2],"a":0.1})");
  const fs::path p1 = scratch("a.json"), p2 = scratch("b.json");
  write_json_file(p1, j);
  write_json_file(p2, parse_json_file(p1));
  CHECK(read_file(p1) == read_file(p2));
}
