#pragma once

#include <functional>
#include <vector>

#include "seco/backend.hpp"
#include "seco/components.hpp"
#include "seco/types.hpp"

namespace seco {

struct ThingsConfig {
  double area_factor = 1.5;
  // Seeds smaller than this are not prompted.
  int min_seed_area = 16;
  Adjacency adjacency = Adjacency::Eight;
};

struct StuffConfig {
  double min_labeled_frac = 0.01;
};

struct MergeConfig {
  double overlap_thresh = 0.5;
  int min_area = 16;
};

struct PsaConfig {
  ThingsConfig things;
  StuffConfig stuff;
  MergeConfig merge;
};

/// Prompts the backend once per things-class component of the pseudo-label
/// (enlarged bbox + center point). Ids start at first_id.
std::vector<Connectivity> aggregate_things(const LabelMap& pseudo, const Taxonomy& tax,
                                           const SegmenterBackend& backend, const ImageRef& image,
                                           const ThingsConfig& cfg = {}, int first_id = 0);

/// Majority vote of stuff-class pseudo pixels inside each proposal.
std::vector<Connectivity> align_stuff(const LabelMap& pseudo, const Taxonomy& tax, const MaskSet& proposals,
                                      const StuffConfig& cfg = {}, int first_id = 0);

/// The same vote restricted to the classes accepted by `votes_for`. With every
/// class accepted this is plain semantic alignment.
std::vector<Connectivity> align_by_majority(const LabelMap& pseudo, const MaskSet& proposals,
                                            const std::function<bool(int)>& votes_for, double min_labeled_frac,
                                            Provenance provenance, int first_id = 0);

struct MergeResult {
  std::vector<Connectivity> connectivities;
  LabelMap label;
};

/// Things take precedence over stuff; overlapping things are deduplicated by
/// seed area. Surviving masks are painted in id order.
MergeResult merge_connectivities(std::vector<Connectivity> things, std::vector<Connectivity> stuff,
                                 const MergeConfig& cfg = {});

/// Paints connectivities in ascending id order onto a void canvas.
LabelMap render_by_id(const std::vector<Connectivity>& conns, int height, int width);

/// Full aggregation for one image.
MergeResult run_psa(const LabelMap& pseudo, const Taxonomy& tax, const SegmenterBackend& backend,
                    const ImageRef& image, const PsaConfig& cfg = {});

}  // namespace seco
