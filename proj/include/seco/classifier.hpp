#pragma once

#include <span>
#include <vector>

#include "seco/types.hpp"

namespace seco {

/// Per-channel z-score fitted on the training pool.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer identity(int dim);
  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(std::span<const double> x) const;
};

/// Linear softmax classifier over pooled connectivity features.
struct ClassifierHead {
  int dim = 0;
  int num_classes = 0;
  std::vector<double> weights;  // dim x num_classes, row-major
  std::vector<double> bias;     // num_classes
  Standardizer standardizer;

  static ClassifierHead zeros(int dim, int num_classes);

  std::vector<double> logits(std::span<const double> raw_features) const;
  std::vector<double> probabilities(std::span<const double> raw_features) const;
};

struct TrainingItem {
  std::vector<double> features;
  int label = 0;
};

/// Minibatch SGD with momentum on softmax cross-entropy for exactly
/// cfg.warmup_iters iterations, from zero weights, on standardized features.
/// Batches are drawn from seeded per-epoch shuffles. Throws DegenerateDataset
/// when fewer than two distinct labels are present.
ClassifierHead train_classifier(const std::vector<TrainingItem>& items, int num_classes, const SccConfig& cfg);

/// -log p(label) for each item. When probs_out is given it receives each
/// item's softmax vector.
std::vector<double> per_connectivity_loss(const ClassifierHead& head, const std::vector<TrainingItem>& items,
                                          std::vector<std::vector<double>>* probs_out = nullptr);

/// Mean cross-entropy over the items, the quantity SGD minimizes.
double batch_loss(const ClassifierHead& head, const std::vector<TrainingItem>& items);

}  // namespace seco
