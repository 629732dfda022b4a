#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clustgeo/condensed.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/summation.hpp"

namespace clustgeo {

// Symmetric dissimilarity over n >= 2 observations, stored condensed
// (see condensed_rank). The diagonal is implicitly zero.
class DissimMatrix {
 public:
  DissimMatrix(std::size_t n, std::vector<double> values, std::vector<std::string> ids = {})
      : n_(n), values_(std::move(values)), ids_(std::move(ids)) {
    if (n_ < 2) throw InputError("dissimilarity matrix needs at least 2 observations, got " + std::to_string(n_));
    if (values_.size() != condensed_size(n_))
      throw InputError("dissimilarity matrix for n=" + std::to_string(n_) + " needs " +
                       std::to_string(condensed_size(n_)) + " values, got " + std::to_string(values_.size()));
    if (!ids_.empty() && ids_.size() != n_)
      throw InputError("dissimilarity matrix has " + std::to_string(ids_.size()) + " ids for n=" + std::to_string(n_));
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k]) || values_[k] < 0.0) {
        auto [i, j] = condensed_unrank(n_, k);
        throw InputError("dissimilarity (" + std::to_string(i) + "," + std::to_string(j) +
                         ") must be finite and >= 0");
      }
    }
  }

  std::size_t size() const { return n_; }
  std::span<const double> values() const { return values_; }
  const std::vector<std::string>& ids() const { return ids_; }
  bool has_ids() const { return !ids_.empty(); }

  // Observation label: the stored id, or the 1-based position when there are none.
  std::string id(std::size_t i) const { return ids_.empty() ? std::to_string(i + 1) : ids_[i]; }

  double operator()(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : values_[condensed_rank_sym(n_, i, j)];
  }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  DissimMatrix with_ids(std::vector<std::string> ids) const { return DissimMatrix(n_, values_, std::move(ids)); }

  friend bool operator==(const DissimMatrix&, const DissimMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> values_;
  std::vector<std::string> ids_;
};

// Positive per-observation weights.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw InputError("weight vector is empty");
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (!std::isfinite(w_[i]) || w_[i] <= 0.0)
        throw InputError("weight " + std::to_string(i + 1) + " must be finite and > 0");
  }

  static WeightVector uniform(std::size_t n) { return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n))); }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }

  double total() const {
    CompensatedSum s;
    for (double x : w_) s += x;
    return s.value();
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> w_;
};

// n x p numeric table, row-major.
class FeatureTable {
 public:
  FeatureTable(std::size_t rows, std::size_t cols, std::vector<double> data, std::vector<std::string> row_ids = {},
               std::vector<std::string> col_names = {})
      : rows_(rows), cols_(cols), data_(std::move(data)), row_ids_(std::move(row_ids)), col_names_(std::move(col_names)) {
    if (cols_ < 1) throw InputError("feature table needs at least one column");
    if (data_.size() != rows_ * cols_) throw InputError("feature table data does not match its shape");
    if (!row_ids_.empty() && row_ids_.size() != rows_) throw InputError("feature table row id count mismatch");
    if (!col_names_.empty() && col_names_.size() != cols_) throw InputError("feature table column name count mismatch");
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        if (!std::isfinite(data_[r * cols_ + c]))
          throw InputError("non-finite feature value at row " + std::to_string(r + 1) + ", column " +
                           std::to_string(c + 1));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data_).subspan(r * cols_, cols_); }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_names() const { return col_names_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_names_;
};

struct LatLon {
  double lat;
  double lon;
};

// Geographic coordinates in degrees.
class GeoPoints {
 public:
  explicit GeoPoints(std::vector<LatLon> pts, std::vector<std::string> ids = {})
      : pts_(std::move(pts)), ids_(std::move(ids)) {
    if (!ids_.empty() && ids_.size() != pts_.size()) throw InputError("coordinate id count mismatch");
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const auto& p = pts_[i];
      if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0))
        throw InputError("coordinate " + std::to_string(i + 1) + " out of range (lat must be in [-90,90], lon in [-180,180])");
    }
  }

  std::size_t size() const { return pts_.size(); }
  const LatLon& operator[](std::size_t i) const { return pts_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<LatLon> pts_;
  std::vector<std::string> ids_;
};

// Undirected neighbourhood structure over 0-based indices. Self-adjacency is
// implicit; explicit self entries are dropped.
class AdjacencyList {
 public:
  explicit AdjacencyList(std::vector<std::vector<std::size_t>> nbrs, std::vector<std::string> ids = {})
      : nbrs_(std::move(nbrs)), ids_(std::move(ids)) {
    const std::size_t n = nbrs_.size();
    if (!ids_.empty() && ids_.size() != n) throw InputError("adjacency id count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = nbrs_[i];
      std::erase(row, i);
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      if (!row.empty() && row.back() >= n)
        throw InputError("adjacency of observation " + std::to_string(i) + " references index " +
                         std::to_string(row.back()) + " >= n=" + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : nbrs_[i])
        if (!std::binary_search(nbrs_[j].begin(), nbrs_[j].end(), i))
          throw InputError("asymmetric adjacency: (" + label(i) + "," + label(j) + ") present but (" + label(j) +
                           "," + label(i) + ") missing");
  }

  std::size_t size() const { return nbrs_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return nbrs_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::string label(std::size_t i) const { return ids_.empty() ? std::to_string(i) : ids_[i]; }

  std::vector<std::vector<std::size_t>> nbrs_;
  std::vector<std::string> ids_;
};

inline constexpr double kEarthRadiusKm = 6371.0088;

inline DissimMatrix euclidean_dissim(const FeatureTable& x) {
  const std::size_t n = x.rows();
  std::vector<double> v(condensed_size(n));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = xi[c] - xj[c];
        s += d * d;
      }
      v[k] = std::sqrt(s);
    }
  }
  return DissimMatrix(n, std::move(v), x.row_ids());
}

// Column-wise z-scores (sample standard deviation). Constant columns are
// rejected since they cannot be scaled.
inline FeatureTable standardize(const FeatureTable& x) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2) throw InputError("standardization needs at least 2 rows");
  std::vector<double> out(n * p);
  for (std::size_t c = 0; c < p; ++c) {
    CompensatedSum s;
    for (std::size_t r = 0; r < n; ++r) s += x(r, c);
    const double mean = s.value() / static_cast<double>(n);
    CompensatedSum ss;
    for (std::size_t r = 0; r < n; ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(ss.value() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw InputError("cannot standardize constant column " + std::to_string(c + 1));
    for (std::size_t r = 0; r < n; ++r) out[r * p + c] = (x(r, c) - mean) / sd;
  }
  return FeatureTable(n, p, std::move(out), x.row_ids(), x.col_names());
}

// Haversine great-circle distance in kilometres.
inline double haversine_km(const LatLon& a, const LatLon& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s = std::sin(dlat / 2.0), t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * rad) * std::cos(b.lat * rad) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

inline DissimMatrix geodesic_dissim(const GeoPoints& pts) {
  const std::size_t n = pts.size();
  std::vector<double> v(condensed_size(n));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) v[k++] = haversine_km(pts[i], pts[j]);
  return DissimMatrix(n, std::move(v), pts.ids());
}

// 1 - A with a_ii = 1: neighbours at 0, everyone else at 1.
inline DissimMatrix adjacency_dissim(const AdjacencyList& adj) {
  const std::size_t n = adj.size();
  std::vector<double> v(condensed_size(n), 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : adj.neighbors(i))
      if (i < j) v[condensed_rank(n, i, j)] = 0.0;
  return DissimMatrix(n, std::move(v), adj.ids());
}

inline DissimMatrix normalize_max(const DissimMatrix& d) {
  const double m = d.max();
  if (!(m > 0.0)) throw InputError("cannot rescale an all-zero dissimilarity matrix (all observations identical)");
  std::vector<double> v(d.values().begin(), d.values().end());
  for (double& x : v) x /= m;
  return DissimMatrix(d.size(), std::move(v), d.ids());
}

}  // namespace clustgeo
