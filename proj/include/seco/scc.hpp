#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seco/classifier.hpp"
#include "seco/types.hpp"

namespace seco {

/// Splits connectivities by noise posterior and classifier confidence:
/// eta < tau_ns keeps the label; otherwise a max probability above tau_cr
/// relabels to the argmax; everything else is dropped. Throws
/// MissingStatistics if loss, eta or probs is absent.
RefinedSet select_and_correct(const std::vector<Connectivity>& conns, const SccConfig& cfg);

/// Paints clean then corrected connectivities; overlaps go to the higher max
/// probability, then the lower id. Unpainted pixels stay void.
LabelMap render_pseudo_label(const RefinedSet& refined, int height, int width);

enum class GmmScope { Shard, Image };

/// Connectivities of one image together with its feature map.
struct SccImage {
  std::string image_id;
  FeatureMap features;
  std::vector<Connectivity> connectivities;
};

struct SccResult {
  std::vector<RefinedSet> refined;  // parallel to the input images
  std::optional<ClassifierHead> head;
  // One fit for GmmScope::Shard, one per image (if fitted) otherwise.
  std::vector<std::optional<GmmFit>> gmm;
  std::vector<std::string> warnings;
};

/// Correction over a shard of images: one classifier trained on every
/// connectivity, per-item losses, the mixture fit over the chosen scope, then
/// select_and_correct per image.
SccResult run_scc(const std::vector<SccImage>& images, int num_classes, const SccConfig& cfg,
                  GmmScope scope = GmmScope::Shard);

}  // namespace seco
