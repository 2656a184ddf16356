#include "seco/metrics.hpp"

#include "seco/error.hpp"
#include "seco/rle.hpp"

namespace seco {

Metrics evaluate(const LabelMap& pred, const LabelMap& gt, const Taxonomy& tax) {
  if (pred.width != gt.width || pred.height != gt.height) throw Error(ErrorCode::DimMismatch, "pred and gt dims differ");
  const int K = tax.size();
  pred.validate(K);
  gt.validate(K);

  std::vector<std::int64_t> tp(static_cast<std::size_t>(K), 0), fp(tp), fn(tp);
  std::int64_t gt_labeled = 0, pred_labeled = 0, both_labeled = 0, correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint8_t p = pred.data[i], g = gt.data[i];
    if (p != kVoid) ++pred_labeled;
    if (g == kVoid) continue;
    ++gt_labeled;
    if (p == g) {
      ++tp[g];
      ++correct;
    } else {
      ++fn[g];
      if (p != kVoid) ++fp[p];
    }
    if (p != kVoid) ++both_labeled;
  }

  Metrics m;
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < K; ++c) {
    const std::int64_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) {
      m.per_class_iou.emplace_back(std::nullopt);
      continue;
    }
    const double iou = static_cast<double>(tp[c]) / static_cast<double>(denom);
    m.per_class_iou.emplace_back(iou);
    sum += iou;
    ++present;
  }
  m.miou = present ? sum / present : 0.0;
  m.pixel_accuracy = gt_labeled ? static_cast<double>(correct) / static_cast<double>(gt_labeled) : 0.0;
  m.coverage = pred.size() ? static_cast<double>(pred_labeled) / static_cast<double>(pred.size()) : 0.0;
  m.labeled_accuracy = both_labeled ? static_cast<double>(correct) / static_cast<double>(both_labeled) : 0.0;
  return m;
}

int majority_class(const MaskRLE& mask, const LabelMap& gt) {
  if (mask.height != gt.height || mask.width != gt.width) throw Error(ErrorCode::DimMismatch, "mask and gt dims differ");
  std::vector<std::int64_t> votes(256, 0);
  for_each_set_pixel(mask, [&](int x, int y) { ++votes[gt.at(x, y)]; });
  int best = -1;
  for (int c = 0; c < static_cast<int>(kVoid); ++c)
    if (votes[c] > 0 && (best < 0 || votes[c] > votes[best])) best = c;
  return best;
}

double connectivity_label_accuracy(const std::vector<Connectivity>& conns, const LabelMap& gt) {
  if (conns.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& c : conns)
    if (majority_class(c.mask, gt) == c.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(conns.size());
}

Json to_json(const Metrics& m, const Taxonomy& tax) {
  Json per_class = Json::object();
  for (int c = 0; c < tax.size(); ++c) {
    const auto& v = m.per_class_iou[static_cast<std::size_t>(c)];
    per_class[tax[c].name] = v ? Json(*v) : Json(nullptr);
  }
  Json j{{"miou", m.miou},
         {"pixel_accuracy", m.pixel_accuracy},
         {"coverage", m.coverage},
         {"labeled_accuracy", m.labeled_accuracy},
         {"per_class_iou", per_class}};
  if (m.connectivity_label_accuracy) j["connectivity_label_accuracy"] = *m.connectivity_label_accuracy;
  return j;
}

}  // namespace seco
