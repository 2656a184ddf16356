#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seco/backend.hpp"
#include "seco/psa.hpp"
#include "seco/scc.hpp"

namespace seco {

struct RefineEntry {
  std::filesystem::path image;
  std::filesystem::path pseudo;
  std::filesystem::path out;
  // SECOFM1 dump; handcrafted features from `image` when absent.
  std::optional<std::filesystem::path> features;
};

/// Manifest: JSON list of {"image", "pseudo", "out"[, "features"]}. Relative
/// paths resolve against the manifest's directory.
std::vector<RefineEntry> load_manifest(const std::filesystem::path& path);

struct RefineOptions {
  PsaConfig psa;
  SccConfig scc;
  GmmScope scope = GmmScope::Shard;
  int workers = 1;
  // Shard-level outputs (loss histogram, mixture fit).
  std::filesystem::path shard_out;
};

struct RefineResult {
  std::vector<std::string> image_ids;
  std::vector<int> heights, widths;
  std::vector<MergeResult> psa;
  SccResult scc;
};

/// Runs aggregation per entry (in parallel across `workers`) and correction
/// over the whole shard, writing every output file.
RefineResult refine(const std::vector<RefineEntry>& entries, const Taxonomy& tax, const SegmenterBackend& backend,
                    const RefineOptions& options);

/// connectivities.json + psa.png
void write_psa_outputs(const std::filesystem::path& dir, const std::string& image_id, const MergeResult& psa);

/// refined.json + refined.png. The image path, when known, lets augment find
/// the source pixels later.
void write_refined_outputs(const std::filesystem::path& dir, const std::string& image_id, const RefinedSet& refined,
                           int height, int width, const std::optional<std::filesystem::path>& image_path = std::nullopt);

/// loss_hist.csv, loss_hist.png and gmm.json (when fitted).
void write_loss_report(const std::filesystem::path& dir, const std::vector<RefinedSet>& refined,
                       const std::optional<GmmFit>& gmm, const std::vector<std::string>& warnings);

/// Stacked histogram of losses by partition, with the mixture density overlaid.
RgbImage render_loss_histogram(const std::vector<RefinedSet>& refined, const std::optional<GmmFit>& gmm,
                               int bins = 40, int width = 640, int height = 360);

}  // namespace seco
