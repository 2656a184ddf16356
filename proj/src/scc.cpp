#include "seco/scc.hpp"

#include <algorithm>
#include <tuple>

#include "seco/error.hpp"
#include "seco/features.hpp"
#include "seco/gmm.hpp"
#include "seco/rle.hpp"

namespace seco {

RefinedSet select_and_correct(const std::vector<Connectivity>& conns, const SccConfig& cfg) {
  cfg.validate();
  RefinedSet out;
  out.tau_ns = cfg.tau_ns;
  out.tau_cr = cfg.tau_cr;
  for (const auto& c : conns) {
    if (!c.loss || !c.eta || !c.probs || c.probs->empty())
      throw Error(ErrorCode::MissingStatistics, "connectivity " + std::to_string(c.id) + " lacks loss/eta/probs");
    if (*c.eta < cfg.tau_ns) {
      out.clean.push_back(c);
    } else if (c.max_prob() > cfg.tau_cr) {
      Connectivity fixed = c;
      fixed.original_label = c.label;
      fixed.label = c.argmax_prob();
      fixed.provenance = Provenance::Corrected;
      out.corrected.push_back(std::move(fixed));
    } else {
      out.dropped.push_back(c);
    }
  }
  return out;
}

LabelMap render_pseudo_label(const RefinedSet& refined, int height, int width) {
  LabelMap out(width, height);
  // Winner per pixel: higher max prob, then lower id.
  std::vector<std::tuple<double, int>> owner(out.size(), {-1.0, 0});
  for (const auto* list : {&refined.clean, &refined.corrected}) {
    for (const auto& c : *list) {
      if (c.mask.height != height || c.mask.width != width)
        throw Error(ErrorCode::DimMismatch, "connectivity mask dims differ from the render target");
      const double p = c.probs && !c.probs->empty() ? c.max_prob() : 0.0;
      for_each_set_pixel(c.mask, [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * width + x;
        auto& [best_p, best_id] = owner[idx];
        if (out.data[idx] == kVoid || p > best_p || (p == best_p && c.id < best_id)) {
          out.data[idx] = static_cast<std::uint8_t>(c.label);
          best_p = p;
          best_id = c.id;
        }
      });
    }
  }
  return out;
}

SccResult run_scc(const std::vector<SccImage>& images, int num_classes, const SccConfig& cfg, GmmScope scope) {
  cfg.validate();
  SccResult result;

  struct Slot {
    std::size_t image;
    std::size_t conn;
  };
  std::vector<Slot> slots;
  std::vector<TrainingItem> items;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = 0; j < images[i].connectivities.size(); ++j) {
      const Connectivity& c = images[i].connectivities[j];
      if (c.label < 0 || c.label >= num_classes)
        throw Error(ErrorCode::ClassOutOfRange, "connectivity label " + std::to_string(c.label));
      items.push_back({pool_features(images[i].features, c.mask), c.label});
      slots.push_back({i, j});
    }
  }

  std::vector<std::vector<Connectivity>> annotated(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) annotated[i] = images[i].connectivities;

  std::vector<double> losses(items.size(), 0.0);
  std::vector<std::vector<double>> probs;
  bool trained = false;
  try {
    ClassifierHead head = train_classifier(items, num_classes, cfg);
    losses = per_connectivity_loss(head, items, &probs);
    result.head = std::move(head);
    trained = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateDataset) throw;
    result.warnings.push_back("classifier not trained (" + std::string(e.what()) + "); keeping every connectivity");
    probs.clear();
    for (const auto& it : items) {
      std::vector<double> one_hot(static_cast<std::size_t>(num_classes), 0.0);
      one_hot[static_cast<std::size_t>(it.label)] = 1.0;
      probs.push_back(std::move(one_hot));
    }
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    Connectivity& c = annotated[slots[s].image][slots[s].conn];
    c.loss = losses[s];
    c.probs = probs[s];
    c.eta = 0.0;
  }

  auto assign_eta = [&](const std::vector<std::size_t>& members, const std::string& what) -> std::optional<GmmFit> {
    if (!trained) return std::nullopt;
    if (members.size() < kGmmMinSamples) {
      result.warnings.push_back(what + ": fewer than 8 connectivities, skipping noise modelling");
      return std::nullopt;
    }
    std::vector<double> sample;
    for (std::size_t s : members) sample.push_back(losses[s]);
    GmmFit fit = fit_gmm2(sample, cfg.em_max_iters, cfg.em_tol);
    for (std::size_t s : members) annotated[slots[s].image][slots[s].conn].eta = noise_posterior(fit, losses[s]);
    return fit;
  };

  if (scope == GmmScope::Shard) {
    std::vector<std::size_t> all(slots.size());
    for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
    result.gmm.push_back(assign_eta(all, "shard"));
  } else {
    for (std::size_t i = 0; i < images.size(); ++i) {
      std::vector<std::size_t> members;
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (slots[s].image == i) members.push_back(s);
      result.gmm.push_back(assign_eta(members, "image '" + images[i].image_id + "'"));
    }
  }

  for (auto& conns : annotated) result.refined.push_back(select_and_correct(conns, cfg));
  return result;
}

}  // namespace seco
