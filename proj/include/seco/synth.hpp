#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "seco/json_io.hpp"
#include "seco/types.hpp"

namespace seco {

struct SynthConfig {
  int width = 256;
  int height = 256;
  int num_stuff = 4;
  int num_things = 4;
  int stuff_regions = 6;
  int things_count = 10;
  int thing_min_size = 14;
  int thing_max_size = 40;
  // Probability that a thing gets an adjacent partner of another things class.
  double pair_rate = 0.5;
  int erosion_radius = 0;
  double speckle_keep_prob = 1.0;
  // Side of the square cells kept or dropped together during thinning.
  int speckle_cell = 4;
  double label_flip_rate = 0.0;
  // Probability that an adjacent things pair is proposed as a single mask.
  double distractor_merge_rate = 0.0;
  double color_noise = 8.0;
  std::uint64_t seed = 0;

  int num_classes() const { return num_stuff + num_things; }
  void validate() const;
};

SynthConfig synth_config_from_json(const Json& j);
Json to_json(const SynthConfig& cfg);

/// Stuff classes come first, then things classes.
Taxonomy synth_taxonomy(const SynthConfig& cfg);

struct TruthComponent {
  int id = 0;
  int cls = 0;
  int pseudo_cls = 0;
  bool flipped = false;
  MaskRLE mask;
};

struct SynthTruth {
  std::vector<TruthComponent> components;  // ground-truth components (8-adjacency)
  std::vector<std::pair<int, int>> merged_pairs;  // component ids proposed as one mask
};

struct SynthCase {
  std::string id;
  Taxonomy taxonomy;
  RgbImage image;
  LabelMap gt;
  LabelMap pseudo;
  // Auto proposals are the ground-truth components with merged pairs replaced
  // by their union; each member of a merged pair is kept as a prompt-only mask.
  MaskSet proposals;
  SynthTruth truth;
};

/// Throws ConfigError.
SynthCase synth_case(const SynthConfig& cfg, const std::string& id = "case");

Json to_json(const SynthTruth& truth);

/// image.png, gt.png, pseudo.png, masks.json, truth.json.
void write_synth_case(const SynthCase& c, const std::filesystem::path& dir);

}  // namespace seco
