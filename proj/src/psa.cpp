#include "seco/psa.hpp"

#include <algorithm>
#include <set>

#include "seco/error.hpp"
#include "seco/rle.hpp"

namespace seco {

std::vector<Connectivity> aggregate_things(const LabelMap& pseudo, const Taxonomy& tax,
                                           const SegmenterBackend& backend, const ImageRef& image,
                                           const ThingsConfig& cfg, int first_id) {
  if ((image.height > 0 && image.height != pseudo.height) || (image.width > 0 && image.width != pseudo.width))
    throw Error(ErrorCode::DimMismatch, "pseudo-label dims differ from the image dims");
  std::set<int> things;
  for (int c = 0; c < tax.size(); ++c)
    if (tax.is_things(c)) things.insert(c);
  std::vector<Connectivity> out;
  if (things.empty()) return out;

  int next_id = first_id;
  for (const Component& seed : connected_components(pseudo, cfg.adjacency, things)) {
    if (seed.area < cfg.min_seed_area) continue;
    const BBox box = enlarge_box(seed.bbox, cfg.area_factor, pseudo.width, pseudo.height);
    Connectivity c;
    c.id = next_id++;
    c.label = seed.cls;
    c.provenance = Provenance::ThingsPrompt;
    c.seed_area = seed.area;
    try {
      c.mask = backend.prompt_segment(image, box, seed.centroid);
    } catch (const Error& e) {
      // An empty answer keeps the seed itself.
      if (e.code() != ErrorCode::EmptyResult) throw;
      c.mask = seed.mask;
    }
    if (c.mask.height != pseudo.height || c.mask.width != pseudo.width)
      throw Error(ErrorCode::DimMismatch, "prompted mask dims differ from the pseudo-label");
    c.area = static_cast<std::int64_t>(c.mask.area());
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Connectivity> align_by_majority(const LabelMap& pseudo, const MaskSet& proposals,
                                            const std::function<bool(int)>& votes_for, double min_labeled_frac,
                                            Provenance provenance, int first_id) {
  if (proposals.height != pseudo.height || proposals.width != pseudo.width)
    throw Error(ErrorCode::DimMismatch, "proposal dims differ from the pseudo-label");
  std::vector<Connectivity> out;
  std::vector<std::int64_t> votes(256);
  int next_id = first_id;
  for (const MaskEntry& m : proposals.masks) {
    if (m.rle.height != pseudo.height || m.rle.width != pseudo.width)
      throw Error(ErrorCode::DimMismatch, "proposal mask dims differ from the pseudo-label");
    const auto area = static_cast<std::int64_t>(m.rle.area());
    if (area == 0) continue;
    std::fill(votes.begin(), votes.end(), 0);
    for_each_set_pixel(m.rle, [&](int x, int y) { ++votes[pseudo.at(x, y)]; });
    std::int64_t labeled = 0;
    int best = -1;
    for (int c = 0; c < static_cast<int>(kVoid); ++c) {
      if (votes[c] == 0 || !votes_for(c)) continue;
      labeled += votes[c];
      if (best < 0 || votes[c] > votes[best]) best = c;
    }
    if (best < 0 || static_cast<double>(labeled) < min_labeled_frac * static_cast<double>(area)) continue;
    Connectivity c;
    c.id = next_id++;
    c.label = best;
    c.provenance = provenance;
    c.mask = m.rle;
    c.area = area;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Connectivity> align_stuff(const LabelMap& pseudo, const Taxonomy& tax, const MaskSet& proposals,
                                      const StuffConfig& cfg, int first_id) {
  return align_by_majority(
      pseudo, proposals, [&](int c) { return c < tax.size() && tax.is_stuff(c); }, cfg.min_labeled_frac,
      Provenance::StuffAlign, first_id);
}

LabelMap render_by_id(const std::vector<Connectivity>& conns, int height, int width) {
  std::vector<const Connectivity*> order;
  for (const auto& c : conns) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  LabelMap out(width, height);
  for (const Connectivity* c : order) {
    for_each_set_pixel(c->mask, [&](int x, int y) { out.at(x, y) = static_cast<std::uint8_t>(c->label); });
  }
  return out;
}

MergeResult merge_connectivities(std::vector<Connectivity> things, std::vector<Connectivity> stuff,
                                 const MergeConfig& cfg) {
  int height = 0, width = 0;
  for (const auto* list : {&things, &stuff})
    for (const auto& c : *list) {
      if (height == 0) {
        height = c.mask.height;
        width = c.mask.width;
      } else if (c.mask.height != height || c.mask.width != width) {
        throw Error(ErrorCode::DimMismatch, "connectivities have different dims");
      }
    }

  // Things dedup: visit by seed area (desc) then id, keep unless a kept mask overlaps too much.
  std::sort(things.begin(), things.end(), [](const Connectivity& a, const Connectivity& b) {
    if (a.seed_area != b.seed_area) return a.seed_area > b.seed_area;
    return a.id < b.id;
  });
  std::vector<Connectivity> kept_things;
  for (auto& t : things) {
    if (t.area == 0) continue;
    const bool duplicate = std::any_of(kept_things.begin(), kept_things.end(), [&](const Connectivity& k) {
      return mask_iou(k.mask, t.mask) > cfg.overlap_thresh;
    });
    if (!duplicate) kept_things.push_back(std::move(t));
  }

  std::vector<Connectivity> out;
  std::optional<MaskRLE> things_union;
  for (const auto& t : kept_things) things_union = things_union ? rle_union(*things_union, t.mask) : t.mask;

  for (auto& s : stuff) {
    if (s.area == 0) continue;
    if (things_union && rle_intersection_area(s.mask, *things_union) > 0) {
      MaskRLE rest = rle_difference(s.mask, *things_union);
      const auto remaining = static_cast<std::int64_t>(rest.area());
      const double lost = 1.0 - static_cast<double>(remaining) / static_cast<double>(s.area);
      if (lost > cfg.overlap_thresh) continue;
      s.mask = std::move(rest);
      s.area = remaining;
    }
    if (s.area < cfg.min_area) continue;
    out.push_back(std::move(s));
  }
  for (auto& t : kept_things)
    if (t.area >= cfg.min_area) out.push_back(std::move(t));

  std::sort(out.begin(), out.end(), [](const Connectivity& a, const Connectivity& b) { return a.id < b.id; });
  MergeResult result;
  result.label = render_by_id(out, height, width);
  result.connectivities = std::move(out);
  return result;
}

MergeResult run_psa(const LabelMap& pseudo, const Taxonomy& tax, const SegmenterBackend& backend,
                    const ImageRef& image, const PsaConfig& cfg) {
  pseudo.validate(tax.size());
  auto things = aggregate_things(pseudo, tax, backend, image, cfg.things, 0);
  const MaskSet proposals = backend.auto_masks(image);
  auto stuff = align_stuff(pseudo, tax, proposals, cfg.stuff, static_cast<int>(things.size()));
  MergeResult merged = merge_connectivities(std::move(things), std::move(stuff), cfg.merge);
  if (merged.label.width == 0) merged.label = LabelMap(pseudo.width, pseudo.height);
  return merged;
}

}  // namespace seco
