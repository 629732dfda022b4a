#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "clustgeo/clustgeo.hpp"

namespace clustgeo::testing {

using Rng = std::mt19937_64;

inline DissimMatrix random_dissim(Rng& rng, std::size_t n, double lo = 0.1, double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(condensed_size(n));
  for (double& x : v) x = u(rng);
  return DissimMatrix(n, std::move(v));
}

inline WeightVector random_weights(Rng& rng, std::size_t n, double lo = 0.2, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng);
  return WeightVector(std::move(w));
}

inline FeatureTable random_features(Rng& rng, std::size_t n, std::size_t p, double scale = 10.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n * p);
  for (double& v : x) v = g(rng);
  return FeatureTable(n, p, std::move(x));
}

inline Partition random_partition(Rng& rng, std::size_t n, int k) {
  std::vector<int> labels(n);
  for (int i = 0; i < k; ++i) labels[static_cast<std::size_t>(i)] = i + 1;
  std::uniform_int_distribution<int> u(1, k);
  for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) labels[i] = u(rng);
  std::shuffle(labels.begin(), labels.end(), rng);
  return Partition(std::move(labels), k);
}

// Leaves under each dendrogram node.
inline std::vector<std::size_t> leaves_of(const Dendrogram& t, const ClusterRef& c) {
  if (c.is_leaf()) return {c.index};
  auto a = leaves_of(t, t.merges()[c.index].left);
  auto b = leaves_of(t, t.merges()[c.index].right);
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

// Largest relative deviation of each merge height from the definition-based
// aggregation value of its two children, under an arbitrary cluster-inertia
// functional.
inline double max_height_oracle_error(const Dendrogram& t,
                                      const std::function<double(const std::vector<std::size_t>&)>& inertia) {
  double worst = 0.0;
  for (const auto& m : t.merges()) {
    const auto a = leaves_of(t, m.left), b = leaves_of(t, m.right);
    std::vector<std::size_t> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    std::sort(ab.begin(), ab.end());
    const double direct = inertia(ab) - inertia(a) - inertia(b);
    const double scale = std::max(std::fabs(direct), 1e-300);
    worst = std::max(worst, std::fabs(m.height - direct) / scale);
  }
  return worst;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

inline std::vector<double> sorted_heights(const Dendrogram& t) {
  auto h = t.heights();
  std::sort(h.begin(), h.end());
  return h;
}

// Smallest relative gap between distinct merge heights; tiny gaps make
// kernel comparisons sensitive to rounding.
inline double min_relative_gap(const Dendrogram& t) {
  auto h = sorted_heights(t);
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < h.size(); ++i) g = std::min(g, rel_diff(h[i], h[i - 1]));
  return g;
}

}  // namespace clustgeo::testing
