#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "clustgeo/error.hpp"
#include "clustgeo/summation.hpp"

namespace clustgeo {

// A dendrogram node: either an original observation or an earlier merge.
struct ClusterRef {
  enum class Kind { kLeaf, kMerge };
  Kind kind = Kind::kLeaf;
  std::size_t index = 0;

  static ClusterRef leaf(std::size_t i) { return {Kind::kLeaf, i}; }
  static ClusterRef merge(std::size_t m) { return {Kind::kMerge, m}; }
  bool is_leaf() const { return kind == Kind::kLeaf; }

  friend bool operator==(const ClusterRef&, const ClusterRef&) = default;
};

struct Merge {
  ClusterRef left;
  ClusterRef right;
  double height = 0.0;
  double weight = 0.0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

// Full merge history over n observations, merges in chronological order.
class Dendrogram {
 public:
  Dendrogram(std::size_t n, std::vector<Merge> merges, std::vector<std::string> ids = {})
      : n_(n), merges_(std::move(merges)), ids_(std::move(ids)) {
    if (n_ < 2) throw InputError("dendrogram needs at least 2 leaves");
    if (merges_.size() != n_ - 1)
      throw InputError("dendrogram over " + std::to_string(n_) + " leaves needs " + std::to_string(n_ - 1) +
                       " merges, got " + std::to_string(merges_.size()));
    if (!ids_.empty() && ids_.size() != n_) throw InputError("dendrogram id count mismatch");
    std::vector<char> leaf_used(n_, 0), merge_used(merges_.size(), 0);
    for (std::size_t m = 0; m < merges_.size(); ++m) {
      for (const ClusterRef& c : {merges_[m].left, merges_[m].right}) {
        if (c.is_leaf()) {
          if (c.index >= n_) throw InputError("merge " + std::to_string(m) + " references leaf out of range");
          if (leaf_used[c.index]++) throw InputError("leaf " + std::to_string(c.index) + " merged twice");
        } else {
          if (c.index >= m) throw InputError("merge " + std::to_string(m) + " references a later merge");
          if (merge_used[c.index]++) throw InputError("merge " + std::to_string(c.index) + " used twice");
        }
      }
    }
    min_leaf_.resize(merges_.size());
    for (std::size_t m = 0; m < merges_.size(); ++m)
      min_leaf_[m] = std::min(min_leaf(merges_[m].left), min_leaf(merges_[m].right));
  }

  std::size_t leaves() const { return n_; }
  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::string id(std::size_t i) const { return ids_.empty() ? std::to_string(i + 1) : ids_[i]; }

  std::vector<double> heights() const {
    std::vector<double> h;
    h.reserve(merges_.size());
    for (const auto& m : merges_) h.push_back(m.height);
    return h;
  }

  double height_sum() const {
    CompensatedSum s;
    for (const auto& m : merges_) s += m.height;
    return s.value();
  }

  // No reversals: each merge is at least as high as the one before it.
  bool has_monotone_heights() const {
    for (std::size_t m = 1; m < merges_.size(); ++m)
      if (merges_[m].height < merges_[m - 1].height) return false;
    return true;
  }

  std::size_t min_leaf(const ClusterRef& c) const { return c.is_leaf() ? c.index : min_leaf_[c.index]; }

  // Leaf permutation for drawing without crossing branches: in-order, left first.
  std::vector<std::size_t> order() const {
    std::vector<std::size_t> out;
    out.reserve(n_);
    std::vector<ClusterRef> stack{ClusterRef::merge(merges_.size() - 1)};
    while (!stack.empty()) {
      const ClusterRef c = stack.back();
      stack.pop_back();
      if (c.is_leaf()) {
        out.push_back(c.index);
      } else {
        stack.push_back(merges_[c.index].right);
        stack.push_back(merges_[c.index].left);
      }
    }
    return out;
  }

  Dendrogram with_ids(std::vector<std::string> ids) const { return Dendrogram(n_, merges_, std::move(ids)); }

 private:
  std::size_t n_;
  std::vector<Merge> merges_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> min_leaf_;
};

// Assignment of n observations to clusters labelled 1..K.
class Partition {
 public:
  Partition(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
    if (k_ < 1) throw InputError("partition needs K >= 1");
    std::vector<char> seen(static_cast<std::size_t>(k_), 0);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const int l = labels_[i];
      if (l < 1 || l > k_)
        throw InputError("label " + std::to_string(l) + " of observation " + std::to_string(i + 1) +
                         " outside 1.." + std::to_string(k_));
      seen[static_cast<std::size_t>(l - 1)] = 1;
    }
    for (int l = 1; l <= k_; ++l)
      if (!seen[static_cast<std::size_t>(l - 1)]) throw InputError("label " + std::to_string(l) + " is empty");
  }

  // One cluster per observation, labelled in order.
  static Partition singletons(std::size_t n) {
    std::vector<int> l(n);
    std::iota(l.begin(), l.end(), 1);
    return Partition(std::move(l), static_cast<int>(n));
  }
  static Partition whole(std::size_t n) { return Partition(std::vector<int>(n, 1), 1); }

  std::size_t size() const { return labels_.size(); }
  int clusters() const { return k_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  // Member indices of each cluster, ascending; index 0 holds label 1.
  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
    for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i] - 1)].push_back(i);
    return out;
  }

  // Relabels so that clusters are numbered by their smallest member.
  Partition canonical() const {
    std::vector<int> map(static_cast<std::size_t>(k_), 0), out(labels_.size());
    int next = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      int& m = map[static_cast<std::size_t>(labels_[i] - 1)];
      if (!m) m = ++next;
      out[i] = m;
    }
    return Partition(std::move(out), k_);
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int k_;
};

// Undoes the last K-1 merges. Labels follow the smallest leaf of each cluster.
inline Partition cut_tree(const Dendrogram& t, int k) {
  const std::size_t n = t.leaves();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw InputError("K=" + std::to_string(k) + " out of range 1.." + std::to_string(n));
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t keep = n - static_cast<std::size_t>(k);
  for (std::size_t m = 0; m < keep; ++m) {
    const auto& mg = t.merges()[m];
    const std::size_t a = find(t.min_leaf(mg.left)), b = find(t.min_leaf(mg.right));
    parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> root_label(n, 0), labels(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int& l = root_label[find(i)];
    if (!l) l = ++next;
    labels[i] = l;
  }
  return Partition(std::move(labels), k);
}

}  // namespace clustgeo
