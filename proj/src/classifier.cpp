#include "seco/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "seco/error.hpp"

namespace seco {
namespace {

double log_sum_exp(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

Standardizer Standardizer::identity(int dim) {
  return Standardizer{std::vector<double>(static_cast<std::size_t>(dim), 0.0),
                      std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "cannot standardize an empty pool");
  const std::size_t dim = rows.front().size();
  Standardizer s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& r : rows)
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] += r[d];
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t d = 0; d < dim; ++d) s.scale[d] += (r[d] - s.mean[d]) * (r[d] - s.mean[d]);
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (v < 1e-12) v = 1.0;  // constant channel
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw Error(ErrorCode::DimMismatch, "feature vector has the wrong length");
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - mean[d]) / scale[d];
  return out;
}

ClassifierHead ClassifierHead::zeros(int dim, int num_classes) {
  ClassifierHead h;
  h.dim = dim;
  h.num_classes = num_classes;
  h.weights.assign(static_cast<std::size_t>(dim) * num_classes, 0.0);
  h.bias.assign(static_cast<std::size_t>(num_classes), 0.0);
  h.standardizer = Standardizer::identity(dim);
  return h;
}

std::vector<double> ClassifierHead::logits(std::span<const double> raw_features) const {
  const std::vector<double> x = standardizer.apply(raw_features);
  std::vector<double> z = bias;
  for (int d = 0; d < dim; ++d) {
    const double xd = x[static_cast<std::size_t>(d)];
    const double* row = &weights[static_cast<std::size_t>(d) * num_classes];
    for (int k = 0; k < num_classes; ++k) z[static_cast<std::size_t>(k)] += xd * row[k];
  }
  return z;
}

std::vector<double> ClassifierHead::probabilities(std::span<const double> raw_features) const {
  std::vector<double> z = logits(raw_features);
  const double lse = log_sum_exp(z);
  for (double& v : z) v = std::exp(v - lse);
  return z;
}

ClassifierHead train_classifier(const std::vector<TrainingItem>& items, int num_classes, const SccConfig& cfg) {
  cfg.validate();
  if (items.empty()) throw Error(ErrorCode::DegenerateDataset, "no training items");
  std::set<int> labels;
  for (const auto& it : items) {
    if (it.label < 0 || it.label >= num_classes)
      throw Error(ErrorCode::ClassOutOfRange, "training label " + std::to_string(it.label));
    labels.insert(it.label);
  }
  if (labels.size() < 2) throw Error(ErrorCode::DegenerateDataset, "training set has a single label");

  const int dim = static_cast<int>(items.front().features.size());
  std::vector<std::vector<double>> raw;
  raw.reserve(items.size());
  for (const auto& it : items) {
    if (static_cast<int>(it.features.size()) != dim) throw Error(ErrorCode::DimMismatch, "ragged feature vectors");
    raw.push_back(it.features);
  }
  ClassifierHead head = ClassifierHead::zeros(dim, num_classes);
  head.standardizer = Standardizer::fit(raw);
  std::vector<std::vector<double>> xs;
  xs.reserve(items.size());
  for (const auto& r : raw) xs.push_back(head.standardizer.apply(r));

  const std::size_t n = items.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  const auto K = static_cast<std::size_t>(num_classes);
  const auto D = static_cast<std::size_t>(dim);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  std::vector<double> grad_w(D * K), grad_b(K), vel_w(D * K, 0.0), vel_b(K, 0.0), z(K);
  for (int iter = 0; iter < cfg.warmup_iters; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const std::size_t i = order[cursor++];
      const std::vector<double>& x = xs[i];
      z = head.bias;
      for (std::size_t d = 0; d < D; ++d)
        for (std::size_t k = 0; k < K; ++k) z[k] += x[d] * head.weights[d * K + k];
      const double lse = log_sum_exp(z);
      for (std::size_t k = 0; k < K; ++k) {
        double g = std::exp(z[k] - lse);
        if (static_cast<int>(k) == items[i].label) g -= 1.0;
        grad_b[k] += g;
        for (std::size_t d = 0; d < D; ++d) grad_w[d * K + k] += g * x[d];
      }
    }
    const double inv = 1.0 / static_cast<double>(batch);
    for (std::size_t j = 0; j < D * K; ++j) {
      vel_w[j] = cfg.momentum * vel_w[j] + grad_w[j] * inv;
      head.weights[j] -= cfg.learning_rate * vel_w[j];
    }
    for (std::size_t k = 0; k < K; ++k) {
      vel_b[k] = cfg.momentum * vel_b[k] + grad_b[k] * inv;
      head.bias[k] -= cfg.learning_rate * vel_b[k];
    }
  }
  return head;
}

std::vector<double> per_connectivity_loss(const ClassifierHead& head, const std::vector<TrainingItem>& items,
                                          std::vector<std::vector<double>>* probs_out) {
  std::vector<double> losses;
  losses.reserve(items.size());
  if (probs_out) probs_out->clear();
  for (const auto& it : items) {
    if (it.label < 0 || it.label >= head.num_classes)
      throw Error(ErrorCode::ClassOutOfRange, "item label " + std::to_string(it.label));
    std::vector<double> z = head.logits(it.features);
    const double lse = log_sum_exp(z);
    losses.push_back(std::max(0.0, lse - z[static_cast<std::size_t>(it.label)]));
    if (probs_out) {
      for (double& v : z) v = std::exp(v - lse);
      probs_out->push_back(std::move(z));
    }
  }
  return losses;
}

double batch_loss(const ClassifierHead& head, const std::vector<TrainingItem>& items) {
  if (items.empty()) return 0.0;
  const auto losses = per_connectivity_loss(head, items);
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

}  // namespace seco
