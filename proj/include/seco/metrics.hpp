#pragma once

#include <optional>
#include <vector>

#include "seco/json_io.hpp"
#include "seco/types.hpp"

namespace seco {

struct Metrics {
  // nullopt for classes absent from both the ground truth and the prediction.
  std::vector<std::optional<double>> per_class_iou;
  double miou = 0.0;
  // Correct pixels over non-void ground-truth pixels; void predictions count as wrong.
  double pixel_accuracy = 0.0;
  // Non-void fraction of the prediction.
  double coverage = 0.0;
  // Correct pixels over pixels labeled in both prediction and ground truth.
  double labeled_accuracy = 0.0;
  std::optional<double> connectivity_label_accuracy;
};

/// Confusion over non-void ground-truth pixels. Throws DimMismatch.
Metrics evaluate(const LabelMap& pred, const LabelMap& gt, const Taxonomy& tax);

/// Most frequent non-void ground-truth class under the mask (ties: lower
/// class), or -1 when the mask covers only void.
int majority_class(const MaskRLE& mask, const LabelMap& gt);

/// Fraction of connectivities whose label equals majority_class under their mask.
double connectivity_label_accuracy(const std::vector<Connectivity>& conns, const LabelMap& gt);

Json to_json(const Metrics& m, const Taxonomy& tax);

}  // namespace seco
