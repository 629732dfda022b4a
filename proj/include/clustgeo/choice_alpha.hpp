#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "clustgeo/dendrogram.hpp"
#include "clustgeo/dissim.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/geo_mixing.hpp"
#include "clustgeo/inertia.hpp"
#include "clustgeo/numfmt.hpp"

namespace clustgeo {

inline constexpr double kGridStepTol = 1e-9;

// Snaps to the nearest multiple of 1e-9 so that 0:1:0.1 yields 0.3, not 0.30000000000000004.
inline double snap_alpha(double a) { return std::round(a * 1e9) / 1e9; }

// Parses `start:stop:step` (inclusive) or a comma-separated list of values.
inline std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> out;
  auto num = [&](std::string_view s) {
    auto v = parse_double(s);
    if (!v || !std::isfinite(*v)) throw InputError("invalid grid value '" + std::string(s) + "'");
    return *v;
  };
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
      throw InputError("grid must be start:stop:step, got '" + std::string(text) + "'");
    const double start = num(text.substr(0, c1)), stop = num(text.substr(c1 + 1, c2 - c1 - 1)),
                 step = num(text.substr(c2 + 1));
    if (!(step > 0.0)) throw InputError("grid step must be > 0");
    if (stop < start) throw InputError("grid stop must not be below start");
    const double steps = (stop - start) / step;
    const double rounded = std::round(steps);
    if (std::fabs(rounded * step - (stop - start)) > kGridStepTol)
      throw InputError("grid step " + format_exact(step) + " does not divide [" + format_exact(start) + "," +
                       format_exact(stop) + "]");
    const auto count = static_cast<std::size_t>(rounded);
    for (std::size_t j = 0; j <= count; ++j)
      out.push_back(j == count ? stop : snap_alpha(start + static_cast<double>(j) * step));
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      out.push_back(num(piece));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!(out[j] >= 0.0 && out[j] <= 1.0)) throw InputError("grid value " + format_exact(out[j]) + " outside [0,1]");
    if (j && !(out[j] > out[j - 1])) throw InputError("grid values must be strictly increasing");
  }
  if (out.empty()) throw InputError("empty grid");
  return out;
}

// Quality of the K-cluster partition at each alpha of the grid. Normalized
// columns are empty when not requested, and hold nullopt where the anchor
// value is zero.
struct QTable {
  int k = 0;
  std::vector<double> alpha;
  std::vector<double> q0;
  std::vector<double> q1;
  std::vector<std::optional<double>> q0norm;
  std::vector<std::optional<double>> q1norm;
  std::vector<Partition> partitions;

  std::size_t rows() const { return alpha.size(); }
  bool normalized() const { return !q0norm.empty(); }
};

struct ChoiceOptions {
  bool scale = true;
  bool normalize = true;
  unsigned threads = 1;
  Kernel kernel = Kernel::kAuto;
};

inline QTable choice_alpha(const DissimMatrix& d0, const DissimMatrix& d1, const std::vector<double>& grid, int k,
                           const std::optional<WeightVector>& wt = std::nullopt, const ChoiceOptions& opt = {}) {
  const std::size_t n = d0.size();
  if (grid.empty()) throw InputError("empty alpha grid");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] >= 0.0 && grid[j] <= 1.0)) throw InputError("grid value " + format_exact(grid[j]) + " outside [0,1]");
    if (j && !(grid[j] > grid[j - 1])) throw InputError("grid values must be strictly increasing");
  }
  if (k < 2 || static_cast<std::size_t>(k) > n)
    throw InputError("K=" + std::to_string(k) + " out of range 2.." + std::to_string(n));
  const auto anchor0 = std::find(grid.begin(), grid.end(), 0.0);
  const auto anchor1 = std::find(grid.begin(), grid.end(), 1.0);
  if (opt.normalize && (anchor0 == grid.end() || anchor1 == grid.end()))
    throw InputError("normalized quality requires the grid to contain both alpha=0 and alpha=1");

  const auto in = prepare_inputs(d0, d1, opt.scale, wt);
  const DissimMatrix& s0 = in.d0;
  const DissimMatrix& s1 = *in.d1;
  const double total0 = total_inertia(s0, in.wt), total1 = total_inertia(s1, in.wt);
  if (!(total0 > 0.0)) throw InputError("D0 has zero total pseudo-inertia");
  if (!(total1 > 0.0)) throw InputError("D1 has zero total pseudo-inertia");
  const auto delta0 = delta_singletons(s0, in.wt);
  const auto delta1 = delta_singletons(s1, in.wt);

  const std::size_t jn = grid.size();
  QTable t;
  t.k = k;
  t.alpha = grid;
  t.q0.assign(jn, 0.0);
  t.q1.assign(jn, 0.0);
  std::vector<std::optional<Partition>> parts(jn);

  auto work = [&](std::size_t j) {
    const auto tree = cluster_delta(mix_delta(delta0, delta1, grid[j]), opt.kernel);
    Partition p = cut_tree(tree, k);
    t.q0[j] = 1.0 - within_inertia(s0, in.wt, p) / total0;
    t.q1[j] = 1.0 - within_inertia(s1, in.wt, p) / total1;
    parts[j] = std::move(p);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(jn)));
  if (threads == 1) {
    for (std::size_t j = 0; j < jn; ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jn;) {
          try {
            work(j);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }
  for (auto& p : parts) t.partitions.push_back(std::move(*p));

  if (opt.normalize) {
    const double base0 = t.q0[static_cast<std::size_t>(anchor0 - grid.begin())];
    const double base1 = t.q1[static_cast<std::size_t>(anchor1 - grid.begin())];
    for (std::size_t j = 0; j < jn; ++j) {
      t.q0norm.push_back(base0 != 0.0 ? std::optional<double>(t.q0[j] / base0) : std::nullopt);
      t.q1norm.push_back(base1 != 0.0 ? std::optional<double>(t.q1[j] / base1) : std::nullopt);
    }
  }
  return t;
}

// alpha,Q0,Q1,Q0norm,Q1norm with 7 significant digits; NA marks undefined values.
inline void write_qtable_csv(std::ostream& out, const QTable& t) {
  auto cell = [](const std::optional<double>& v) { return v ? format_sig(*v, 7) : std::string("NA"); };
  out << "alpha,Q0,Q1,Q0norm,Q1norm\n";
  for (std::size_t j = 0; j < t.rows(); ++j) {
    out << format_sig(t.alpha[j], 7) << ',' << format_sig(t.q0[j], 7) << ',' << format_sig(t.q1[j], 7) << ','
        << (t.normalized() ? cell(t.q0norm[j]) : "NA") << ',' << (t.normalized() ? cell(t.q1norm[j]) : "NA") << '\n';
  }
}

}  // namespace clustgeo
