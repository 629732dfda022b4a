#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clustgeo/dissim.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/numfmt.hpp"
#include "clustgeo/ward.hpp"

namespace clustgeo {

struct MixSpec {
  double alpha = 0.0;
  bool scale = true;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must be in [0,1], got " + format_exact(alpha));
  }
};

// (1 - alpha) * delta0 + alpha * delta1, elementwise.
inline DeltaMatrix mix_delta(const DeltaMatrix& delta0, const DeltaMatrix& delta1, double alpha) {
  MixSpec{alpha}.validate();
  if (delta0.size() != delta1.size())
    throw InputError("aggregation matrices differ in size: " + std::to_string(delta0.size()) + " vs " +
                     std::to_string(delta1.size()));
  if (!(delta0.weights() == delta1.weights())) throw InputError("aggregation matrices were built with different weights");
  const auto& a = delta0.values();
  const auto& b = delta1.values();
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) v[k] = (1.0 - alpha) * a[k] + alpha * b[k];
  return DeltaMatrix(delta0.size(), std::move(v), delta0.weights(), delta0.ids());
}

// Inputs of a run after defaults and rescaling have been applied; the same
// matrices feed both the clustering and any quality evaluation.
struct PreparedInputs {
  DissimMatrix d0;
  std::optional<DissimMatrix> d1;
  WeightVector wt;
};

// Resolves default weights (uniform 1/n) and divides each matrix by its own
// maximum when scaling applies. A lone D0 is used as given, so that the
// heights sum to its raw total pseudo-inertia.
inline PreparedInputs prepare_inputs(const DissimMatrix& d0, const std::optional<DissimMatrix>& d1, bool scale,
                                     const std::optional<WeightVector>& wt) {
  const std::size_t n = d0.size();
  if (d1 && d1->size() != n)
    throw InputError("D1 has n=" + std::to_string(d1->size()) + " but D0 has n=" + std::to_string(n));
  WeightVector w = wt ? *wt : WeightVector::uniform(n);
  if (w.size() != n) throw InputError("weight vector has " + std::to_string(w.size()) + " entries for n=" + std::to_string(n));
  if (!d1) return {d0, std::nullopt, std::move(w)};
  if (!scale) return {d0, d1, std::move(w)};
  return {normalize_max(d0), normalize_max(*d1), std::move(w)};
}

// Ward-like clustering of D0, optionally softly constrained by D1 with mixing
// parameter alpha.
inline Dendrogram hclustgeo(const DissimMatrix& d0, const std::optional<DissimMatrix>& d1 = std::nullopt,
                            const MixSpec& spec = {}, const std::optional<WeightVector>& wt = std::nullopt,
                            Kernel kernel = Kernel::kAuto) {
  spec.validate();
  if (!d1 && spec.alpha != 0.0) throw InputError("alpha != 0 requires a second dissimilarity matrix D1");
  const auto in = prepare_inputs(d0, d1, spec.scale, wt);
  if (!in.d1) return cluster_delta(delta_singletons(in.d0, in.wt), kernel);
  const auto delta = mix_delta(delta_singletons(in.d0, in.wt), delta_singletons(*in.d1, in.wt), spec.alpha);
  return cluster_delta(delta, kernel);
}

}  // namespace clustgeo
