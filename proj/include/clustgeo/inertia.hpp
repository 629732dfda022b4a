#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clustgeo/dendrogram.hpp"
#include "clustgeo/dissim.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/summation.hpp"

namespace clustgeo {

namespace detail {

inline void check_members(std::span<const std::size_t> members, std::size_t n) {
  if (members.empty()) throw InputError("cluster has no members");
  for (std::size_t i : members)
    if (i >= n) throw InputError("member index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
}

inline void check_weights(const WeightVector& wt, std::size_t n) {
  if (wt.size() != n)
    throw InputError("weight vector has " + std::to_string(wt.size()) + " entries for n=" + std::to_string(n));
}

inline void check_partition(const Partition& p, std::size_t n) {
  if (p.size() != n)
    throw InputError("partition covers " + std::to_string(p.size()) + " observations, expected " + std::to_string(n));
}

// sum over unordered member pairs of w_i w_j * f(i, j), divided by the cluster mass
template <class PairTerm>
double pair_inertia(const WeightVector& wt, std::span<const std::size_t> members, PairTerm term) {
  CompensatedSum mass, acc;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const std::size_t i = members[a];
    mass += wt[i];
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      const std::size_t j = members[b];
      acc += wt[i] * wt[j] * term(i, j);
    }
  }
  return acc.value() / mass.value();
}

}  // namespace detail

// I(C) = sum_i sum_j w_i w_j d_ij^2 / (2 mu_C)
inline double pseudo_inertia(const DissimMatrix& d, const WeightVector& wt, std::span<const std::size_t> members) {
  detail::check_weights(wt, d.size());
  detail::check_members(members, d.size());
  return detail::pair_inertia(wt, members, [&](std::size_t i, std::size_t j) {
    const double x = d(i, j);
    return x * x;
  });
}

// Pseudo-inertia of the whole set.
inline double total_inertia(const DissimMatrix& d, const WeightVector& wt) {
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return pseudo_inertia(d, wt, all);
}

inline double within_inertia(const DissimMatrix& d, const WeightVector& wt, const Partition& p) {
  detail::check_partition(p, d.size());
  CompensatedSum w;
  for (const auto& c : p.members()) w += pseudo_inertia(d, wt, c);
  return w.value();
}

// Mixed inertia of one cluster, evaluated directly from both matrices.
inline double mixed_inertia(const DissimMatrix& d0, const DissimMatrix& d1, const WeightVector& wt,
                            std::span<const std::size_t> members, double alpha) {
  if (d0.size() != d1.size()) throw InputError("D0 and D1 differ in size");
  detail::check_weights(wt, d0.size());
  detail::check_members(members, d0.size());
  return detail::pair_inertia(wt, members, [&](std::size_t i, std::size_t j) {
    const double x = d0(i, j), y = d1(i, j);
    return (1.0 - alpha) * x * x + alpha * y * y;
  });
}

// W_alpha(P). Callers pass the matrices already rescaled if rescaling is wanted.
inline double mixed_within(const DissimMatrix& d0, const DissimMatrix& d1, const WeightVector& wt,
                           const Partition& p, double alpha) {
  detail::check_partition(p, d0.size());
  CompensatedSum w;
  for (const auto& c : p.members()) w += mixed_inertia(d0, d1, wt, c, alpha);
  return w.value();
}

// Proportion of total pseudo-inertia explained by p: 1 - W(p) / W(P_1).
inline double q_criterion(const DissimMatrix& d, const WeightVector& wt, const Partition& p) {
  const double total = total_inertia(d, wt);
  if (!(total > 0.0)) throw InputError("total pseudo-inertia is zero: all observations identical");
  return 1.0 - within_inertia(d, wt, p) / total;
}

// Q_beta for the mixed criterion, beta in [0,1].
inline double q_mixed(const DissimMatrix& d0, const DissimMatrix& d1, const WeightVector& wt, const Partition& p,
                      double beta) {
  std::vector<std::size_t> all(d0.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const double total = mixed_inertia(d0, d1, wt, all, beta);
  if (!(total > 0.0)) throw InputError("total mixed pseudo-inertia is zero");
  return 1.0 - mixed_within(d0, d1, wt, p, beta) / total;
}

// delta(A, B) = I(A u B) - I(A) - I(B), straight from the definition.
inline double delta_direct(const DissimMatrix& d, const WeightVector& wt, std::span<const std::size_t> a,
                           std::span<const std::size_t> b) {
  detail::check_members(a, d.size());
  detail::check_members(b, d.size());
  std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::size_t> both;
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
  if (both.size() != sa.size() + sb.size()) throw InputError("clusters overlap");
  return pseudo_inertia(d, wt, both) - pseudo_inertia(d, wt, sa) - pseudo_inertia(d, wt, sb);
}

// Classical inertia around the weighted centre of gravity; equals
// pseudo_inertia when d is the Euclidean distance on these features.
inline double centroid_inertia_oracle(const FeatureTable& x, const WeightVector& wt,
                                      std::span<const std::size_t> members) {
  detail::check_weights(wt, x.rows());
  detail::check_members(members, x.rows());
  const std::size_t p = x.cols();
  CompensatedSum mass;
  std::vector<CompensatedSum> g(p);
  for (std::size_t i : members) {
    mass += wt[i];
    for (std::size_t c = 0; c < p; ++c) g[c] += wt[i] * x(i, c);
  }
  std::vector<double> centre(p);
  for (std::size_t c = 0; c < p; ++c) centre[c] = g[c].value() / mass.value();
  CompensatedSum acc;
  for (std::size_t i : members) {
    double s = 0.0;
    for (std::size_t c = 0; c < p; ++c) s += (x(i, c) - centre[c]) * (x(i, c) - centre[c]);
    acc += wt[i] * s;
  }
  return acc.value();
}

}  // namespace clustgeo
