#pragma once

// Brute-force reference implementations used only by tests. Each one works on
// plain pixel loops and shares no code path with the library routine it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "seco/types.hpp"

namespace oracle {

using seco::BinaryMask;
using seco::LabelMap;

inline LabelMap random_label_map(int w, int h, int num_classes, std::mt19937_64& rng, double void_rate = 0.0) {
  LabelMap m(w, h);
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : m.data) v = u(rng) < void_rate ? seco::kVoid : static_cast<std::uint8_t>(cls(rng));
  return m;
}

inline BinaryMask random_mask(int w, int h, double density, std::mt19937_64& rng) {
  BinaryMask m(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : m.data) v = u(rng) < density ? 1 : 0;
  return m;
}

/// Column-major scan straight from the definition.
inline std::vector<std::uint32_t> rle_counts(const BinaryMask& m) {
  std::vector<std::uint8_t> seq;
  for (int x = 0; x < m.width; ++x)
    for (int y = 0; y < m.height; ++y) seq.push_back(m.at(x, y));
  std::vector<std::uint32_t> counts;
  std::uint8_t cur = 0;
  std::uint32_t run = 0;
  for (auto v : seq) {
    if (v != cur) {
      counts.push_back(run);
      run = 0;
      cur = v;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

/// Recursive flood fill; returns a component id per pixel (-1 for void).
inline void flood(const LabelMap& m, int x, int y, std::uint8_t cls, int id, bool eight, std::vector<int>& out) {
  if (x < 0 || y < 0 || x >= m.width || y >= m.height) return;
  const std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
  if (out[idx] != -1 || m.data[idx] != cls) return;
  out[idx] = id;
  flood(m, x + 1, y, cls, id, eight, out);
  flood(m, x - 1, y, cls, id, eight, out);
  flood(m, x, y + 1, cls, id, eight, out);
  flood(m, x, y - 1, cls, id, eight, out);
  if (eight) {
    flood(m, x + 1, y + 1, cls, id, eight, out);
    flood(m, x - 1, y - 1, cls, id, eight, out);
    flood(m, x + 1, y - 1, cls, id, eight, out);
    flood(m, x - 1, y + 1, cls, id, eight, out);
  }
}

inline std::vector<int> flood_fill_labels(const LabelMap& m, bool eight) {
  std::vector<int> out(m.size(), -1);
  int next = 0;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
      if (m.data[idx] == seco::kVoid || out[idx] != -1) continue;
      flood(m, x, y, m.data[idx], next++, eight, out);
    }
  return out;
}

/// Partition as a set of pixel sets, independent of component numbering.
inline std::set<std::vector<std::size_t>> partition_of(const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) groups[labels[i]].push_back(i);
  std::set<std::vector<std::size_t>> out;
  for (auto& [id, px] : groups) out.insert(px);
  return out;
}

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    inter += a.data[i] && b.data[i];
    uni += a.data[i] || b.data[i];
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Stuff-only majority vote by direct pixel counting; -1 when skipped.
inline int majority_vote(const LabelMap& pseudo, const BinaryMask& mask, const seco::Taxonomy& tax, double min_frac) {
  std::map<int, std::int64_t> counts;
  std::int64_t area = 0, labeled = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      ++area;
      const int v = pseudo.at(x, y);
      if (v == seco::kVoid || v >= tax.size() || !tax.is_stuff(v)) continue;
      ++counts[v];
      ++labeled;
    }
  if (labeled == 0 || static_cast<double>(labeled) < min_frac * static_cast<double>(area)) return -1;
  int best = -1;
  for (const auto& [c, n] : counts)
    if (best < 0 || n > counts[best]) best = c;
  return best;
}

inline std::vector<double> pooled(const seco::FeatureMap& fm, const BinaryMask& mask) {
  std::vector<double> acc(static_cast<std::size_t>(fm.depth), 0.0);
  double n = 0;
  for (int y = 0; y < fm.height; ++y)
    for (int x = 0; x < fm.width; ++x) {
      if (!mask.at(x, y)) continue;
      for (int d = 0; d < fm.depth; ++d)
        acc[static_cast<std::size_t>(d)] += fm.data[(static_cast<std::size_t>(y) * fm.width + x) * fm.depth + d];
      n += 1;
    }
  for (double& v : acc) v /= n;
  return acc;
}

/// Cross-entropy of softmax(W^T x + b) at `label`, computed as -log(p) from
/// explicitly normalized probabilities in long double.
inline double cross_entropy(const std::vector<double>& w, const std::vector<double>& b, const std::vector<double>& x,
                            int label) {
  const std::size_t K = b.size(), D = x.size();
  std::vector<long double> z(K);
  for (std::size_t k = 0; k < K; ++k) {
    long double s = b[k];
    for (std::size_t d = 0; d < D; ++d) s += static_cast<long double>(x[d]) * w[d * K + k];
    z[k] = s;
  }
  const long double m = *std::max_element(z.begin(), z.end());
  long double denom = 0;
  for (auto v : z) denom += std::exp(v - m);
  const long double p = std::exp(z[static_cast<std::size_t>(label)] - m) / denom;
  return static_cast<double>(-std::log(p));
}

/// Bayes rule on the two weighted densities, in log space.
inline double posterior_high(double w_lo, double mu_lo, double var_lo, double w_hi, double mu_hi, double var_hi,
                             double x) {
  const long double a = std::log(static_cast<long double>(w_lo)) - 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * var_lo) -
                        (x - mu_lo) * static_cast<long double>(x - mu_lo) / (2.0L * var_lo);
  const long double b = std::log(static_cast<long double>(w_hi)) - 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * var_hi) -
                        (x - mu_hi) * static_cast<long double>(x - mu_hi) / (2.0L * var_hi);
  const long double m = std::max(a, b);
  return static_cast<double>(std::exp(b - m) / (std::exp(a - m) + std::exp(b - m)));
}

/// Population standard deviation of the clipped 3x3 window, two-pass.
inline double window_std(const std::vector<double>& gray, int w, int h, int x, int y) {
  std::vector<double> vals;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int nx = x + dx, ny = y + dy;
      if (nx >= 0 && ny >= 0 && nx < w && ny < h) vals.push_back(gray[static_cast<std::size_t>(ny) * w + nx]);
    }
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(vals.size()));
}

}  // namespace oracle
