#include "seco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "seco/components.hpp"
#include "seco/error.hpp"
#include "seco/io.hpp"
#include "seco/rle.hpp"

namespace seco {
namespace {

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigError, std::string(name) + " must lie in [0,1]");
}

std::array<std::uint8_t, 3> class_color(int cls, int num_classes) {
  // Hues spread around the wheel, alternating brightness for neighbours.
  const double hue = 360.0 * cls / num_classes;
  const double sat = cls % 2 ? 0.55 : 0.9;
  const double val = cls % 3 == 0 ? 0.95 : (cls % 3 == 1 ? 0.7 : 0.5);
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = val - c;
  auto to8 = [&](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * (v + m))); };
  return {to8(r), to8(g), to8(b)};
}

void paint_rect(LabelMap& map, int x0, int y0, int x1, int y1, int cls) {
  for (int y = std::max(0, y0); y <= std::min(map.height - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(map.width - 1, x1); ++x) map.at(x, y) = static_cast<std::uint8_t>(cls);
}

void paint_ellipse(LabelMap& map, int cx, int cy, int rx, int ry, int cls) {
  for (int y = std::max(0, cy - ry); y <= std::min(map.height - 1, cy + ry); ++y)
    for (int x = std::max(0, cx - rx); x <= std::min(map.width - 1, cx + rx); ++x) {
      const double dx = static_cast<double>(x - cx) / std::max(rx, 1);
      const double dy = static_cast<double>(y - cy) / std::max(ry, 1);
      if (dx * dx + dy * dy <= 1.0) map.at(x, y) = static_cast<std::uint8_t>(cls);
    }
}

}  // namespace

void SynthConfig::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::ConfigError, "dims must be positive");
  if (num_stuff < 1 || num_things < 1) throw Error(ErrorCode::ConfigError, "need at least one stuff and one things class");
  if (num_classes() > kMaxClasses) throw Error(ErrorCode::ConfigError, "too many classes");
  if (num_things < 2 && pair_rate > 0.0) throw Error(ErrorCode::ConfigError, "pairs need two things classes");
  if (stuff_regions < 1 || things_count < 0) throw Error(ErrorCode::ConfigError, "bad shape counts");
  if (thing_min_size < 1 || thing_max_size < thing_min_size) throw Error(ErrorCode::ConfigError, "bad thing size range");
  if (erosion_radius < 0 || speckle_cell < 1) throw Error(ErrorCode::ConfigError, "bad corruption geometry");
  if (color_noise < 0.0) throw Error(ErrorCode::ConfigError, "color_noise must be non-negative");
  check_prob(pair_rate, "pair_rate");
  check_prob(speckle_keep_prob, "speckle_keep_prob");
  check_prob(label_flip_rate, "label_flip_rate");
  check_prob(distractor_merge_rate, "distractor_merge_rate");
}

SynthConfig synth_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "synth config must be a JSON object");
  SynthConfig c;
  try {
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.num_stuff = j.value("num_stuff", c.num_stuff);
    c.num_things = j.value("num_things", c.num_things);
    c.stuff_regions = j.value("stuff_regions", c.stuff_regions);
    c.things_count = j.value("things_count", c.things_count);
    c.thing_min_size = j.value("thing_min_size", c.thing_min_size);
    c.thing_max_size = j.value("thing_max_size", c.thing_max_size);
    c.pair_rate = j.value("pair_rate", c.pair_rate);
    c.erosion_radius = j.value("erosion_radius", c.erosion_radius);
    c.speckle_keep_prob = j.value("speckle_keep_prob", c.speckle_keep_prob);
    c.speckle_cell = j.value("speckle_cell", c.speckle_cell);
    c.label_flip_rate = j.value("label_flip_rate", c.label_flip_rate);
    c.distractor_merge_rate = j.value("distractor_merge_rate", c.distractor_merge_rate);
    c.color_noise = j.value("color_noise", c.color_noise);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  c.validate();
  return c;
}

Json to_json(const SynthConfig& c) {
  return Json{{"width", c.width},
              {"height", c.height},
              {"num_stuff", c.num_stuff},
              {"num_things", c.num_things},
              {"stuff_regions", c.stuff_regions},
              {"things_count", c.things_count},
              {"thing_min_size", c.thing_min_size},
              {"thing_max_size", c.thing_max_size},
              {"pair_rate", c.pair_rate},
              {"erosion_radius", c.erosion_radius},
              {"speckle_keep_prob", c.speckle_keep_prob},
              {"speckle_cell", c.speckle_cell},
              {"label_flip_rate", c.label_flip_rate},
              {"distractor_merge_rate", c.distractor_merge_rate},
              {"color_noise", c.color_noise},
              {"seed", c.seed}};
}

Taxonomy synth_taxonomy(const SynthConfig& cfg) {
  std::vector<ClassInfo> classes;
  for (int i = 0; i < cfg.num_stuff; ++i) classes.push_back({"stuff_" + std::to_string(i), ClassKind::Stuff});
  for (int i = 0; i < cfg.num_things; ++i) classes.push_back({"thing_" + std::to_string(i), ClassKind::Things});
  return Taxonomy(std::move(classes));
}

SynthCase synth_case(const SynthConfig& cfg, const std::string& id) {
  cfg.validate();
  const int W = cfg.width, H = cfg.height, K = cfg.num_classes();
  std::mt19937_64 rng(cfg.seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto bernoulli = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  SynthCase out;
  out.id = id;
  out.taxonomy = synth_taxonomy(cfg);

  // Stuff background: nearest-seed partition.
  struct Site {
    int x, y, cls;
  };
  std::vector<Site> sites;
  for (int i = 0; i < cfg.stuff_regions; ++i) sites.push_back({uniform_int(0, W - 1), uniform_int(0, H - 1), uniform_int(0, cfg.num_stuff - 1)});
  out.gt = LabelMap(W, H, 0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      std::int64_t best = -1;
      int cls = 0;
      for (const auto& s : sites) {
        const std::int64_t d = static_cast<std::int64_t>(x - s.x) * (x - s.x) + static_cast<std::int64_t>(y - s.y) * (y - s.y);
        if (best < 0 || d < best) {
          best = d;
          cls = s.cls;
        }
      }
      out.gt.at(x, y) = static_cast<std::uint8_t>(cls);
    }

  // Things, painted in order; a partner hangs directly below its anchor.
  for (int t = 0; t < cfg.things_count; ++t) {
    const int cls = cfg.num_stuff + uniform_int(0, cfg.num_things - 1);
    const int w = uniform_int(cfg.thing_min_size, cfg.thing_max_size);
    const int h = uniform_int(cfg.thing_min_size, cfg.thing_max_size);
    const int x0 = uniform_int(0, std::max(0, W - w));
    const int y0 = uniform_int(0, std::max(0, H - h));
    const bool ellipse = bernoulli(0.5);
    if (ellipse)
      paint_ellipse(out.gt, x0 + w / 2, y0 + h / 2, w / 2, h / 2, cls);
    else
      paint_rect(out.gt, x0, y0, x0 + w - 1, y0 + h - 1, cls);
    if (bernoulli(cfg.pair_rate)) {
      int partner = cfg.num_stuff + uniform_int(0, cfg.num_things - 2);
      if (partner >= cls) ++partner;
      const int pw = std::max(cfg.thing_min_size / 2, w / 3);
      const int ph = uniform_int(cfg.thing_min_size, cfg.thing_max_size);
      const int top = ellipse ? y0 + h / 2 + h / 2 + 1 : y0 + h;
      const int px0 = x0 + w / 2 - pw / 2;
      paint_rect(out.gt, px0, top, px0 + pw - 1, top + ph - 1, partner);
    }
  }

  // RGB rendering.
  out.image = RgbImage(W, H);
  std::normal_distribution<double> noise(0.0, cfg.color_noise);
  std::vector<std::array<std::uint8_t, 3>> palette;
  for (int c = 0; c < K; ++c) palette.push_back(class_color(c, K));
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const auto& base = palette[out.gt.at(x, y)];
      std::uint8_t* px = out.image.pixel(x, y);
      for (int ch = 0; ch < 3; ++ch)
        px[ch] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(base[static_cast<std::size_t>(ch)] + noise(rng)), 0, 255));
    }

  // Ground-truth components.
  const auto comps = connected_components(out.gt, Adjacency::Eight);
  std::vector<int> comp_of(out.gt.size(), -1);
  for (std::size_t k = 0; k < comps.size(); ++k)
    for_each_set_pixel(comps[k].mask, [&](int x, int y) { comp_of[static_cast<std::size_t>(y) * W + x] = static_cast<int>(k); });

  // Pseudo-label: erode, thin into speckles, flip whole components.
  out.pseudo = out.gt;
  if (cfg.erosion_radius > 0) {
    const int r = cfg.erosion_radius;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const std::uint8_t v = out.gt.at(x, y);
        bool interior = true;
        for (int dy = -r; dy <= r && interior; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
            if (out.gt.at(nx, ny) != v) {
              interior = false;
              break;
            }
          }
        if (!interior) out.pseudo.at(x, y) = kVoid;
      }
  }
  if (cfg.speckle_keep_prob < 1.0) {
    const int cell = cfg.speckle_cell;
    for (int cy = 0; cy < H; cy += cell)
      for (int cx = 0; cx < W; cx += cell) {
        if (bernoulli(cfg.speckle_keep_prob)) continue;
        for (int y = cy; y < std::min(H, cy + cell); ++y)
          for (int x = cx; x < std::min(W, cx + cell); ++x) out.pseudo.at(x, y) = kVoid;
      }
  }
  for (std::size_t k = 0; k < comps.size(); ++k) {
    TruthComponent tc{static_cast<int>(k), comps[k].cls, comps[k].cls, false, comps[k].mask};
    if (bernoulli(cfg.label_flip_rate)) {
      int wrong = uniform_int(0, K - 2);
      if (wrong >= tc.cls) ++wrong;
      tc.pseudo_cls = wrong;
      tc.flipped = true;
    }
    out.truth.components.push_back(std::move(tc));
  }
  for (std::size_t i = 0; i < out.pseudo.size(); ++i)
    if (out.pseudo.data[i] != kVoid)
      out.pseudo.data[i] = static_cast<std::uint8_t>(out.truth.components[static_cast<std::size_t>(comp_of[i])].pseudo_cls);

  // Proposals, with some adjacent things pairs fused.
  std::set<std::pair<int, int>> adjacent;
  const int offsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int a = comp_of[static_cast<std::size_t>(y) * W + x];
      for (const auto& o : offsets) {
        const int nx = x + o[0], ny = y + o[1];
        if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
        const int b = comp_of[static_cast<std::size_t>(ny) * W + nx];
        if (a != b) adjacent.insert({std::min(a, b), std::max(a, b)});
      }
    }
  std::vector<bool> merged(comps.size(), false);
  const Taxonomy& tax = out.taxonomy;
  for (const auto& [a, b] : adjacent) {
    if (!tax.is_things(comps[a].cls) || !tax.is_things(comps[b].cls)) continue;
    if (merged[a] || merged[b]) continue;
    if (!bernoulli(cfg.distractor_merge_rate)) continue;
    merged[a] = merged[b] = true;
    out.truth.merged_pairs.emplace_back(a, b);
  }

  out.proposals.image_id = id;
  out.proposals.height = H;
  out.proposals.width = W;
  int next_id = 0;
  for (std::size_t k = 0; k < comps.size(); ++k)
    if (!merged[k]) out.proposals.masks.push_back({next_id++, comps[k].mask, MaskSource::Auto});
  for (const auto& [a, b] : out.truth.merged_pairs)
    out.proposals.masks.push_back({next_id++, rle_union(comps[a].mask, comps[b].mask), MaskSource::Auto});
  for (const auto& [a, b] : out.truth.merged_pairs) {
    out.proposals.masks.push_back({next_id++, comps[a].mask, MaskSource::Prompt});
    out.proposals.masks.push_back({next_id++, comps[b].mask, MaskSource::Prompt});
  }
  return out;
}

Json to_json(const SynthTruth& truth) {
  Json comps = Json::array();
  for (const auto& c : truth.components)
    comps.push_back({{"id", c.id},
                     {"class", c.cls},
                     {"pseudo_class", c.pseudo_cls},
                     {"flipped", c.flipped},
                     {"area", c.mask.area()},
                     {"mask", to_json(c.mask)}});
  Json pairs = Json::array();
  for (const auto& [a, b] : truth.merged_pairs) pairs.push_back({a, b});
  return Json{{"components", comps}, {"merged_pairs", pairs}};
}

void write_synth_case(const SynthCase& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_rgb(c.image, dir / "image.png");
  save_label_map(c.gt, dir / "gt.png");
  save_label_map(c.pseudo, dir / "pseudo.png");
  write_json_file(dir / "masks.json", to_json(c.proposals));
  write_json_file(dir / "truth.json", to_json(c.truth));
}

}  // namespace seco
