#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seco/classifier.hpp"
#include "seco/error.hpp"

using namespace seco;

namespace {

struct Labeled {
  std::vector<TrainingItem> items;
  std::vector<bool> flipped;
};

/// Two Gaussian clusters in 4-D pushed apart along the first axis with a hard
/// margin; `flip_rate` of the labels are swapped.
Labeled two_clusters(int n, double flip_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Labeled out;
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    std::vector<double> x(4);
    for (double& v : x) v = noise(rng);
    x[0] = (cls == 0 ? -1.0 : 1.0) * (1.0 + std::abs(noise(rng)));
    const bool flip = u(rng) < flip_rate;
    out.items.push_back({x, flip ? 1 - cls : cls});
    out.flipped.push_back(flip);
  }
  return out;
}

bool perceptron_separates(const std::vector<TrainingItem>& items) {
  std::vector<double> w(items[0].features.size() + 1, 0.0);
  for (int epoch = 0; epoch < 1000; ++epoch) {
    int mistakes = 0;
    for (const auto& it : items) {
      double s = w.back();
      for (std::size_t d = 0; d < it.features.size(); ++d) s += w[d] * it.features[d];
      const double y = it.label == 1 ? 1.0 : -1.0;
      if (s * y <= 0) {
        ++mistakes;
        for (std::size_t d = 0; d < it.features.size(); ++d) w[d] += y * it.features[d];
        w.back() += y;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

SccConfig quick_cfg(int iters = 2000) {
  SccConfig cfg;
  cfg.warmup_iters = iters;
  return cfg;
}

}  // namespace

TEST_CASE("separable data is learned") {
  const Labeled data = two_clusters(400, 0.0, 1);
  REQUIRE(perceptron_separates(data.items));
  const ClassifierHead head = train_classifier(data.items, 2, quick_cfg());
  int correct = 0;
  for (const auto& it : data.items) {
    const auto p = head.probabilities(it.features);
    correct += (p[1] > p[0] ? 1 : 0) == it.label;
  }
  CHECK(correct >= 396);
}

TEST_CASE("training is deterministic for a seed") {
  const Labeled data = two_clusters(200, 0.2, 2);
  const ClassifierHead a = train_classifier(data.items, 3, quick_cfg(500));
  const ClassifierHead b = train_classifier(data.items, 3, quick_cfg(500));
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  SccConfig other = quick_cfg(500);
  other.seed = 9;
  CHECK(train_classifier(data.items, 3, other).weights != a.weights);
}

TEST_CASE("flipped items carry higher loss after warm-up") {
  const Labeled data = two_clusters(600, 0.2, 3);
  const ClassifierHead head = train_classifier(data.items, 2, SccConfig{});
  const auto losses = per_connectivity_loss(head, data.items);
  double clean = 0, noisy = 0;
  int nc = 0, nn = 0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    CHECK(losses[i] >= 0.0);
    if (data.flipped[i]) {
      noisy += losses[i];
      ++nn;
    } else {
      clean += losses[i];
      ++nc;
    }
  }
  CHECK(noisy / nn > clean / nc);
}

TEST_CASE("uniform head gives ln K") {
  const ClassifierHead head = ClassifierHead::zeros(3, 5);
  const std::vector<TrainingItem> items{{{1, 2, 3}, 0}, {{-1, 0, 4}, 4}};
  for (double l : per_connectivity_loss(head, items)) CHECK(l == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("confident correct head gives zero loss") {
  ClassifierHead head = ClassifierHead::zeros(1, 2);
  head.bias = {1000.0, 0.0};
  CHECK(per_connectivity_loss(head, {{{0.0}, 0}})[0] == 0.0);
}

TEST_CASE("loss matches an independent cross-entropy and the batch mean") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    ClassifierHead head = ClassifierHead::zeros(6, 4);
    for (double& w : head.weights) w = n(rng);
    for (double& b : head.bias) b = n(rng);
    std::vector<TrainingItem> items;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x(6);
      for (double& v : x) v = n(rng);
      items.push_back({x, static_cast<int>(rng() % 4)});
    }
    std::vector<std::vector<double>> probs;
    const auto losses = per_connectivity_loss(head, items, &probs);
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(std::abs(losses[i] - oracle::cross_entropy(head.weights, head.bias, items[i].features, items[i].label)) < 1e-6);
      CHECK(std::accumulate(probs[i].begin(), probs[i].end(), 0.0) == doctest::Approx(1.0));
    }
    CHECK(std::abs(batch_loss(head, items) - std::accumulate(losses.begin(), losses.end(), 0.0) / 20.0) < 1e-6);
  }
}

TEST_CASE("standardizer is stored with the head") {
  const Labeled data = two_clusters(100, 0.0, 5);
  const ClassifierHead head = train_classifier(data.items, 2, quick_cfg(10));
  double mean0 = 0;
  for (const auto& it : data.items) mean0 += it.features[0];
  CHECK(head.standardizer.mean[0] == doctest::Approx(mean0 / 100));
  CHECK(head.standardizer.apply(data.items[0].features).size() == 4);
}

TEST_CASE("degenerate and invalid training sets") {
  CHECK_THROWS_AS(train_classifier({{{1.0}, 0}, {{2.0}, 0}}, 2, quick_cfg(10)), Error);
  CHECK_THROWS_AS(train_classifier({{{1.0}, 0}, {{2.0}, 5}}, 2, quick_cfg(10)), Error);
  SccConfig bad = quick_cfg(10);
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_classifier({{{1.0}, 0}, {{2.0}, 1}}, 2, bad), Error);
}
