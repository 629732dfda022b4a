#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <utility>

namespace clustgeo {

// Number of stored pairs for n observations.
constexpr std::size_t condensed_size(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Position of pair (i, j), i < j, in row-major upper-triangle storage.
constexpr std::size_t condensed_rank(std::size_t n, std::size_t i, std::size_t j) {
  assert(i < j && j < n);
  return i * n - i * (i + 1) / 2 + j - i - 1;
}

// Symmetric convenience: order of i and j does not matter, i != j.
constexpr std::size_t condensed_rank_sym(std::size_t n, std::size_t i, std::size_t j) {
  return i < j ? condensed_rank(n, i, j) : condensed_rank(n, j, i);
}

// Inverse of condensed_rank.
inline std::pair<std::size_t, std::size_t> condensed_unrank(std::size_t n, std::size_t k) {
  assert(k < condensed_size(n));
  // Row i starts at i*n - i(i+1)/2; solve the quadratic, then fix rounding.
  const double nn = static_cast<double>(n);
  const double disc = (2.0 * nn - 1.0) * (2.0 * nn - 1.0) - 8.0 * static_cast<double>(k);
  auto i = static_cast<std::size_t>(std::floor(((2.0 * nn - 1.0) - std::sqrt(disc)) / 2.0));
  auto row_start = [n](std::size_t r) { return r * n - r * (r + 1) / 2; };
  while (i > 0 && row_start(i) > k) --i;
  while (i + 1 < n && row_start(i + 1) <= k) ++i;
  const std::size_t j = k - row_start(i) + i + 1;
  return {i, j};
}

}  // namespace clustgeo
