#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "clustgeo/condensed.hpp"
#include "clustgeo/dendrogram.hpp"
#include "clustgeo/dissim.hpp"
#include "clustgeo/error.hpp"

namespace clustgeo {

// Pairwise aggregation measures between singletons, with the weights that
// seed the cluster masses.
class DeltaMatrix {
 public:
  DeltaMatrix(std::size_t n, std::vector<double> values, WeightVector weights, std::vector<std::string> ids = {})
      : n_(n), values_(std::move(values)), weights_(std::move(weights)), ids_(std::move(ids)) {
    if (n_ < 2) throw InputError("aggregation matrix needs at least 2 observations");
    if (values_.size() != condensed_size(n_)) throw InputError("aggregation matrix size does not match n");
    if (weights_.size() != n_)
      throw InputError("weight vector has " + std::to_string(weights_.size()) + " entries for n=" + std::to_string(n_));
    for (double v : values_)
      if (!std::isfinite(v) || v < 0.0) throw InputError("aggregation values must be finite and >= 0");
  }

  std::size_t size() const { return n_; }
  const std::vector<double>& values() const { return values_; }
  const WeightVector& weights() const { return weights_; }
  const std::vector<std::string>& ids() const { return ids_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[condensed_rank_sym(n_, i, j)]; }

 private:
  std::size_t n_;
  std::vector<double> values_;
  WeightVector weights_;
  std::vector<std::string> ids_;
};

// delta_ij = w_i w_j / (w_i + w_j) * d_ij^2
inline DeltaMatrix delta_singletons(const DissimMatrix& d, const WeightVector& wt) {
  const std::size_t n = d.size();
  if (wt.size() != n)
    throw InputError("weight vector has " + std::to_string(wt.size()) + " entries, dissimilarity has n=" +
                     std::to_string(n));
  std::vector<double> v(condensed_size(n));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double dij = d.values()[k];
      v[k] = wt[i] * wt[j] / (wt[i] + wt[j]) * dij * dij;
    }
  return DeltaMatrix(n, std::move(v), wt, d.ids());
}

// Lance-Williams update for the weighted Ward criterion: aggregation between
// A u B and D from the three pairwise values and the three masses.
constexpr double lw_update(double d_ad, double d_bd, double d_ab, double mu_a, double mu_b, double mu_d) {
  return ((mu_a + mu_d) * d_ad + (mu_b + mu_d) * d_bd - mu_d * d_ab) / (mu_a + mu_b + mu_d);
}

enum class Kernel { kAuto, kNaive, kNNChain };

// Above this size kAuto uses the nearest-neighbour chain.
inline constexpr std::size_t kNaiveKernelLimit = 64;

namespace detail {

// A merge as discovered by a kernel. Clusters are named by their smallest
// leaf, which is also the slot they occupy in the working matrix.
struct RawMerge {
  std::size_t slot_a, slot_b;  // slot_a < slot_b
  double height;
  double weight;
  std::size_t node_a, node_b;  // producing discovery (index into raw list), or npos for a leaf
};

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

// Converts discovered merges into chronological order: increasing height,
// discovery order among equals, children always before parents.
inline Dendrogram assemble(std::size_t n, const std::vector<RawMerge>& raw, std::vector<std::string> ids) {
  const std::size_t m = raw.size();
  std::vector<std::size_t> pending(m, 0), parent(m, kNoNode);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c : {raw[r].node_a, raw[r].node_b})
      if (c != kNoNode) {
        ++pending[r];
        parent[c] = r;
      }
  using Key = std::pair<double, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (std::size_t r = 0; r < m; ++r)
    if (!pending[r]) ready.emplace(raw[r].height, r);
  std::vector<std::size_t> position(m);
  std::vector<Merge> merges;
  merges.reserve(m);
  auto ref = [&](std::size_t node, std::size_t slot) {
    return node == kNoNode ? ClusterRef::leaf(slot) : ClusterRef::merge(position[node]);
  };
  while (!ready.empty()) {
    const std::size_t r = ready.top().second;
    ready.pop();
    position[r] = merges.size();
    const auto& rm = raw[r];
    merges.push_back({ref(rm.node_a, rm.slot_a), ref(rm.node_b, rm.slot_b), rm.height, rm.weight});
    if (parent[r] != kNoNode && --pending[parent[r]] == 0) ready.emplace(raw[parent[r]].height, parent[r]);
  }
  return Dendrogram(n, std::move(merges), std::move(ids));
}

[[noreturn]] inline void non_finite(std::size_t step) {
  throw NumericError("non-finite aggregation value at merge step " + std::to_string(step + 1));
}

}  // namespace detail

struct NoStepObserver {
  template <class Current>
  void operator()(std::size_t, std::size_t, std::size_t, const std::vector<std::size_t>&, const Current&) const {}
};

// Greedy agglomeration by exhaustive search of the current minimum. Ties go to
// the pair with the lowest smaller leaf, then the lowest larger leaf.
//
// After each merge, `observe(step, kept_slot, removed_slot, active_slots,
// current)` is called, where current(i, j) is the aggregation value between
// the clusters occupying active slots i and j.
template <class StepObserver = NoStepObserver>
Dendrogram agglomerate(const DeltaMatrix& delta, StepObserver&& observe = {}) {
  const std::size_t n = delta.size();
  std::vector<double> dv = delta.values();
  std::vector<double> mass(delta.weights().values().begin(), delta.weights().values().end());
  std::vector<std::size_t> active(n), node(n, detail::kNoNode);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dv[condensed_rank_sym(n, i, j)]; };

  std::vector<detail::RawMerge> raw;
  raw.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t x = 0; x < active.size(); ++x) {
      const std::size_t i = active[x];
      const std::size_t row = i * n - i * (i + 1) / 2 - i - 1;
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t j = active[y];
        const double v = dv[row + j];
        if (!std::isfinite(v)) detail::non_finite(step);
        if (!found || v < best) {
          best = v;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    const double ma = mass[bi], mb = mass[bj];
    for (std::size_t k : active) {
      if (k == bi || k == bj) continue;
      const double v = lw_update(at(bi, k), at(bj, k), best, ma, mb, mass[k]);
      if (!std::isfinite(v)) detail::non_finite(step);
      at(bi, k) = v;
    }
    mass[bi] = ma + mb;
    raw.push_back({bi, bj, best, mass[bi], node[bi], node[bj]});
    node[bi] = raw.size() - 1;
    std::erase(active, bj);
    observe(step, bi, bj, static_cast<const std::vector<std::size_t>&>(active),
            [&](std::size_t i, std::size_t j) { return at(i, j); });
  }
  return detail::assemble(n, raw, delta.ids());
}

// Nearest-neighbour chain agglomeration, O(n^2) time. Valid because the
// weighted Ward criterion is reducible; produces the same hierarchy as
// agglomerate() up to the order of equal-height merges.
inline Dendrogram agglomerate_nnchain(const DeltaMatrix& delta) {
  const std::size_t n = delta.size();
  std::vector<double> dv = delta.values();
  std::vector<double> mass(delta.weights().values().begin(), delta.weights().values().end());
  std::vector<std::size_t> node(n, detail::kNoNode);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dv[condensed_rank_sym(n, i, j)]; };

  // Active slots as a doubly linked list, ascending.
  constexpr std::size_t kEnd = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> next(n), prev(n);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = i + 1 < n ? i + 1 : kEnd;
    prev[i] = i > 0 ? i - 1 : kEnd;
  }
  std::size_t head = 0;
  auto remove = [&](std::size_t i) {
    if (prev[i] != kEnd) next[prev[i]] = next[i]; else head = next[i];
    if (next[i] != kEnd) prev[next[i]] = prev[i];
  };

  std::vector<detail::RawMerge> raw;
  raw.reserve(n - 1);
  std::vector<std::size_t> chain;
  chain.reserve(n);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    if (chain.empty()) chain.push_back(head);
    std::size_t a, b;
    double dab;
    for (;;) {
      a = chain.back();
      const std::size_t before = chain.size() >= 2 ? chain[chain.size() - 2] : kEnd;
      b = kEnd;
      dab = std::numeric_limits<double>::infinity();
      if (before != kEnd) {
        b = before;
        dab = at(a, before);
      }
      for (std::size_t c = head; c != kEnd; c = next[c]) {
        if (c == a) continue;
        const double v = at(a, c);
        if (!std::isfinite(v)) detail::non_finite(step);
        if (v < dab || b == kEnd) {
          dab = v;
          b = c;
        }
      }
      if (b == before) break;
      chain.push_back(b);
    }
    chain.resize(chain.size() - 2);
    if (a > b) std::swap(a, b);
    const double ma = mass[a], mb = mass[b];
    for (std::size_t k = head; k != kEnd; k = next[k]) {
      if (k == a || k == b) continue;
      const double v = lw_update(at(a, k), at(b, k), dab, ma, mb, mass[k]);
      if (!std::isfinite(v)) detail::non_finite(step);
      at(a, k) = v;
    }
    mass[a] = ma + mb;
    raw.push_back({a, b, dab, mass[a], node[a], node[b]});
    node[a] = raw.size() - 1;
    remove(b);
  }
  return detail::assemble(n, raw, delta.ids());
}

// Runs the kernel chosen by `kernel`; kAuto picks by problem size.
inline Dendrogram cluster_delta(const DeltaMatrix& delta, Kernel kernel = Kernel::kAuto) {
  if (kernel == Kernel::kNaive || (kernel == Kernel::kAuto && delta.size() <= kNaiveKernelLimit))
    return agglomerate(delta, NoStepObserver{});
  return agglomerate_nnchain(delta);
}

}  // namespace clustgeo
