// Acceptance criteria: one PASS/FAIL/SKIP line each. Exits nonzero only on FAIL.

#include <array>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "clustgeo_cli.hpp"
#include "support.hpp"

namespace cg = clustgeo;
namespace fs = std::filesystem;
using cg::testing::Rng;

#ifndef CLUSTGEO_DEFAULT_DATA_DIR
#define CLUSTGEO_DEFAULT_DATA_DIR "data/estuary"
#endif

namespace {

enum class Status { kPass, kFail, kSkip };

int failures = 0;

void report(int id, Status s, const std::string& what, const std::string& detail) {
  static const char* names[] = {"PASS", "FAIL", "SKIP"};
  if (s == Status::kFail) ++failures;
  std::cout << "criterion " << id << " [" << names[static_cast<int>(s)] << "] " << what << ": " << detail << std::endl;
}

Status verdict(bool ok) { return ok ? Status::kPass : Status::kFail; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> all_of(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Published values for K=5 on (D0, D.geo), alpha = 0, 0.1, ..., 1.
constexpr std::array<double, 11> kQ0 = {0.8134914, 0.8123718, 0.7558058, 0.7603870, 0.7062677, 0.6588582,
                                        0.6726921, 0.6729165, 0.6100119, 0.5938617, 0.5016793};
constexpr std::array<double, 11> kQ1 = {0.4033353, 0.3586957, 0.7206956, 0.6802037, 0.7860465, 0.8431391,
                                        0.8377236, 0.8371600, 0.8514754, 0.8572188, 0.8726302};
constexpr std::array<double, 11> kQ0norm = {1.0000000, 0.9986237, 0.9290889, 0.9347203, 0.8681932, 0.8099142,
                                            0.8269197, 0.8271956, 0.7498689, 0.7300160, 0.6166990};
constexpr std::array<double, 11> kQ1norm = {0.4622065, 0.4110512, 0.8258889, 0.7794868, 0.9007785, 0.9662043,
                                            0.9599984, 0.9593526, 0.9757574, 0.9823391, 1.0000000};

const std::set<std::string> kBordeauxCluster = {
    "ARCACHON", "BASSENS",  "BEGLES",    "BORDEAUX", "LE BOUSCAT", "BRUGES",  "CARBON-BLANC", "CENON",
    "EYSINES",  "FLOIRAC",  "GRADIGNAN", "LE HAILLAN", "LORMONT",  "MERIGNAC", "PESSAC",      "TALENCE",
    "VILLENAVE-D'ORNON"};

struct Estuary {
  cg::FeatureTable dat;
  cg::DissimMatrix d0;
  cg::DissimMatrix dgeo;
  cg::WeightVector pop;
  std::vector<std::string> names;
  fs::path dir;
};

std::optional<Estuary> load_estuary(std::string& why) {
  const char* env = std::getenv("CLUSTGEO_ESTUARY_DIR");
  const fs::path dir = env && *env ? fs::path(env) : fs::path(CLUSTGEO_DEFAULT_DATA_DIR);
  for (const char* f : {"dat.csv", "D_geo.csv", "pop.csv", "names.csv"})
    if (!fs::exists(dir / f)) {
      why = "estuary export not found (" + (dir / f).string() +
            " missing); run tools/export_estuary.R and set CLUSTGEO_ESTUARY_DIR";
      return std::nullopt;
    }
  auto dat = cg::read_features((dir / "dat.csv").string());
  auto d0 = cg::euclidean_dissim(dat);
  auto dgeo = cg::read_dissim((dir / "D_geo.csv").string(), cg::DissimFormat::kSquare);
  auto pop = cg::read_weights((dir / "pop.csv").string(), dat.row_ids());
  std::unordered_map<std::string, std::string> by_id;
  {
    auto in = cg::csv::open_input((dir / "names.csv").string());
    auto rows = cg::csv::read_rows(in);
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r].fields.size() >= 2) by_id[cg::detail::trim(rows[r].fields[0])] = rows[r].fields[1];
  }
  std::vector<std::string> names;
  for (const auto& id : dat.row_ids()) {
    auto it = by_id.find(id);
    names.push_back(it == by_id.end() ? id : it->second);
  }
  if (dgeo.size() != d0.size()) throw cg::ConsistencyError("D_geo.csv and dat.csv disagree on n");
  return Estuary{std::move(dat), std::move(d0), std::move(dgeo), std::move(pop), std::move(names), dir};
}

void criterion1(const Estuary& e) {
  const std::size_t n = e.d0.size();
  const auto t0 = std::chrono::steady_clock::now();
  const auto uniform = cg::hclustgeo(e.d0, std::nullopt, {}, cg::WeightVector::uniform(n));
  const auto weighted = cg::hclustgeo(e.d0, std::nullopt, {}, e.pop);
  const double secs = seconds_since(t0) / 2;

  // Same run through the command line, which prints the height sum.
  const fs::path tmp = fs::temp_directory_path() / "clustgeo_acceptance";
  fs::create_directories(tmp);
  std::ostringstream out, err, sink;
  cg::cli::run({"dist", "--features", (e.dir / "dat.csv").string(), "--out", (tmp / "D0.csv").string()}, sink, err);
  cg::cli::run({"cluster", "--d0", (tmp / "D0.csv").string(), "--ids", (tmp / "D0.csv.ids.csv").string(), "--out",
                (tmp / "tree.json").string()},
               out, err);
  cg::cli::run({"cluster", "--d0", (tmp / "D0.csv").string(), "--ids", (tmp / "D0.csv.ids.csv").string(),
                "--weights", (e.dir / "pop.csv").string(), "--out", (tmp / "tree_w.json").string()},
               out, err);
  fs::remove_all(tmp);

  const double su = uniform.height_sum(), sw = weighted.height_sum();
  const bool ok = cg::testing::rel_diff(su, 1232.769) <= 1e-4 && cg::testing::rel_diff(sw, 1907989.0) <= 1e-4 &&
                  secs < 1.0 && out.str() == cg::format_sig(su, 7) + "\n" + cg::format_sig(sw, 7) + "\n";
  std::ostringstream d;
  d << "uniform " << cg::format_sig(su, 7) << " (1232.769), population " << cg::format_sig(sw, 7)
    << " (1907989), cli printed [" << out.str().substr(0, out.str().find('\n')) << "], " << cg::format_sig(secs, 3)
    << " s per run" << (err.str().empty() ? "" : ", cli error: " + err.str());
  report(1, verdict(ok), "estuary total pseudo-inertia", d.str());
}

void criterion2(const Estuary& e) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = cg::choice_alpha(e.d0, e.dgeo, cg::parse_grid("0:1:0.1"), 5);
  const double secs = seconds_since(t0);
  int good = 0;
  std::string bad;
  auto check = [&](const char* col, std::size_t j, double got, double want) {
    if (cg::testing::rel_diff(got, want) <= 1e-5) {
      ++good;
    } else {
      bad += std::string(" ") + col + "[alpha=" + cg::format_sig(t.alpha[j], 3) + "]=" + cg::format_sig(got, 7) +
             " vs " + cg::format_sig(want, 7);
    }
  };
  for (std::size_t j = 0; j < 11; ++j) {
    check("Q0", j, t.q0[j], kQ0[j]);
    check("Q1", j, t.q1[j], kQ1[j]);
    check("Q0norm", j, t.q0norm[j].value_or(-1), kQ0norm[j]);
    check("Q1norm", j, t.q1norm[j].value_or(-1), kQ1norm[j]);
  }
  std::ostringstream d;
  d << good << "/44 cells within 1e-5, " << cg::format_sig(secs, 3) << " s" << bad;
  report(2, verdict(good == 44 && secs < 30.0), "estuary Q and Qnorm tables, K=5", d.str());
}

void criterion3(const Estuary& e) {
  const auto p = cg::cut_tree(cg::hclustgeo(e.d0), 5);
  bool found = false;
  std::string sizes;
  for (const auto& members : p.members()) {
    sizes += (sizes.empty() ? "" : ",") + std::to_string(members.size());
    std::set<std::string> names;
    for (auto i : members) names.insert(e.names[i]);
    if (names == kBordeauxCluster) found = true;
  }
  report(3, verdict(found), "alpha=0 cut at K=5 has the 17-municipality Bordeaux cluster", "cluster sizes " + sizes);
}

void criterion4() {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> nd(3, 12);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = nd(rng);
    const auto d = cg::testing::random_dissim(rng, n);
    const auto w = cg::testing::random_weights(rng, n);
    const auto t = cg::agglomerate(cg::delta_singletons(d, w));
    for (const auto& m : t.merges()) {
      const auto a = cg::testing::leaves_of(t, m.left), b = cg::testing::leaves_of(t, m.right);
      worst = std::max(worst, cg::testing::rel_diff(m.height, cg::delta_direct(d, w, a, b)));
    }
  }
  report(4, verdict(worst <= 1e-10), "Lance-Williams heights equal direct recomputation (500 instances, n in 3..12)",
         "max relative error " + cg::format_sig(worst, 3));
}

void criterion5() {
  Rng rng(5150);
  std::uniform_int_distribution<std::size_t> nd(3, 40);
  int done = 0, skipped = 0, mismatched = 0;
  double worst = 0.0;
  while (done < 200) {
    const std::size_t n = nd(rng);
    const auto delta = cg::delta_singletons(cg::testing::random_dissim(rng, n), cg::testing::random_weights(rng, n));
    const auto naive = cg::agglomerate(delta);
    if (cg::testing::min_relative_gap(naive) < 1e-9) {
      ++skipped;
      continue;
    }
    const auto chain = cg::agglomerate_nnchain(delta);
    const auto a = cg::testing::sorted_heights(naive), b = cg::testing::sorted_heights(chain);
    for (std::size_t s = 0; s < a.size(); ++s) worst = std::max(worst, cg::testing::rel_diff(a[s], b[s]));
    for (int k = 1; k <= static_cast<int>(n); ++k)
      if (!(cg::cut_tree(naive, k).canonical() == cg::cut_tree(chain, k).canonical())) ++mismatched;
    ++done;
  }
  std::ostringstream d;
  d << done << " tie-free instances (" << skipped << " near-tied skipped), max height error "
    << cg::format_sig(worst, 3) << ", " << mismatched << " differing cuts";
  report(5, verdict(worst <= 1e-10 && mismatched == 0), "NN-chain matches naive kernel", d.str());
}

void criterion6() {
  Rng rng(66);
  std::uniform_int_distribution<std::size_t> nd(3, 150);
  int trees = 0, non_monotone = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = nd(rng);
    const auto d0 = cg::testing::random_dissim(rng, n);
    const auto d1 = cg::testing::random_dissim(rng, n);
    const auto w = cg::testing::random_weights(rng, n);
    const auto in = cg::prepare_inputs(d0, d1, true, w);
    const auto all = all_of(n);
    for (int j = 0; j <= 10; ++j) {
      const double a = j / 10.0;
      for (auto kernel : {cg::Kernel::kNaive, cg::Kernel::kNNChain}) {
        const auto t = cg::hclustgeo(d0, d1, {a, true}, w, kernel);
        ++trees;
        if (!t.has_monotone_heights()) ++non_monotone;
        worst = std::max(worst, cg::testing::rel_diff(t.height_sum(), cg::mixed_inertia(in.d0, *in.d1, w, all, a)));
      }
    }
  }
  std::ostringstream d;
  d << trees << " trees, " << non_monotone << " with reversals, max sum error " << cg::format_sig(worst, 3);
  report(6, verdict(non_monotone == 0 && worst <= 1e-8), "monotone heights summing to total mixed inertia", d.str());
}

void criterion7() {
  Rng rng(77);
  std::uniform_int_distribution<std::size_t> nd(2, 40);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = nd(rng);
    const auto in = cg::prepare_inputs(cg::testing::random_dissim(rng, n), cg::testing::random_dissim(rng, n), true,
                                       cg::testing::random_weights(rng, n));
    std::uniform_int_distribution<int> kd(1, static_cast<int>(n));
    const auto p = cg::testing::random_partition(rng, n, kd(rng));
    const double w0 = cg::within_inertia(in.d0, in.wt, p), w1 = cg::within_inertia(*in.d1, in.wt, p);
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0})
      worst = std::max(worst, cg::testing::rel_diff(cg::mixed_within(in.d0, *in.d1, in.wt, p, a), (1 - a) * w0 + a * w1));
  }
  report(7, verdict(worst <= 1e-10), "W_alpha linear in alpha (200 random partitions)",
         "max relative error " + cg::format_sig(worst, 3));
}

void criterion8() {
  Rng rng(88);
  std::uniform_int_distribution<std::size_t> nd(2, 40), pd(1, 8);
  double worst = 0.0, worst_delta = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = nd(rng), p = pd(rng);
    const auto x = cg::testing::random_features(rng, n, p);
    const auto w = cg::testing::random_weights(rng, n);
    const auto d = cg::euclidean_dissim(x);
    const auto all = all_of(n);
    worst = std::max(worst, cg::testing::rel_diff(cg::pseudo_inertia(d, w, all), cg::centroid_inertia_oracle(x, w, all)));
    const auto delta = cg::delta_singletons(d, w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double sq = 0.0;
        for (std::size_t c = 0; c < p; ++c) sq += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
        worst_delta = std::max(worst_delta, cg::testing::rel_diff(delta(i, j), w[i] * w[j] / (w[i] + w[j]) * sq));
      }
  }
  std::ostringstream d;
  d << "inertia max error " << cg::format_sig(worst, 3) << ", singleton delta max error "
    << cg::format_sig(worst_delta, 3);
  report(8, verdict(worst <= 1e-10 && worst_delta <= 1e-10), "Euclidean identity (100 feature tables)", d.str());
}

void criterion9() {
  Rng rng(99);
  std::uniform_int_distribution<std::size_t> nd(2, 60);
  int endpoint_bad = 0, increases = 0, checks = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = nd(rng);
    const auto in = cg::prepare_inputs(cg::testing::random_dissim(rng, n), cg::testing::random_dissim(rng, n), true,
                                       cg::testing::random_weights(rng, n));
    const double alpha = (rep % 11) / 10.0;
    const auto t = cg::hclustgeo(in.d0, *in.d1, {alpha, false}, in.wt);
    for (double beta : {0.0, 0.3, 0.5, 1.0}) {
      if (cg::q_mixed(in.d0, *in.d1, in.wt, cg::Partition::singletons(n), beta) != 1.0) ++endpoint_bad;
      if (cg::q_mixed(in.d0, *in.d1, in.wt, cg::Partition::whole(n), beta) != 0.0) ++endpoint_bad;
    }
    const double beta = alpha;
    double prev = 1.0;
    for (int k = static_cast<int>(n); k >= 1; --k) {
      const double q = cg::q_mixed(in.d0, *in.d1, in.wt, cg::cut_tree(t, k), beta);
      if (q > prev) ++increases;
      prev = q;
      ++checks;
    }
  }
  std::ostringstream d;
  d << endpoint_bad << " inexact endpoints, " << increases << " increases over " << checks << " nested cuts";
  report(9, verdict(endpoint_bad == 0 && increases == 0), "Q endpoints exact and Q non-increasing", d.str());
}

void criterion10() {
  Rng rng(1010);
  const std::size_t n = 2000;
  const auto x = cg::testing::random_features(rng, n, 5);
  const auto delta = cg::delta_singletons(cg::euclidean_dissim(x), cg::testing::random_weights(rng, n));
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = cg::agglomerate_nnchain(delta);
  const double secs = seconds_since(t0);
  const double mib = 2.0 * static_cast<double>(cg::condensed_size(n)) * sizeof(double) / (1024.0 * 1024.0);
  std::ostringstream d;
  d << "n=2000 in " << cg::format_sig(secs, 3) << " s, working set " << cg::format_sig(mib, 3)
    << " MiB (two condensed arrays), monotone=" << (t.has_monotone_heights() ? "yes" : "no");
  report(10, verdict(secs < 10.0 && t.has_monotone_heights()), "NN-chain performance", d.str());
}

}  // namespace

int main() {
  std::string why;
  std::optional<Estuary> e;
  try {
    e = load_estuary(why);
  } catch (const std::exception& ex) {
    why = std::string("estuary export unreadable: ") + ex.what();
    report(1, Status::kFail, "estuary total pseudo-inertia", why);
    report(2, Status::kFail, "estuary Q and Qnorm tables, K=5", why);
    report(3, Status::kFail, "alpha=0 cut at K=5 has the 17-municipality Bordeaux cluster", why);
  }
  if (e) {
    criterion1(*e);
    criterion2(*e);
    criterion3(*e);
  } else if (!why.empty() && failures == 0) {
    report(1, Status::kSkip, "estuary total pseudo-inertia", why);
    report(2, Status::kSkip, "estuary Q and Qnorm tables, K=5", why);
    report(3, Status::kSkip, "alpha=0 cut at K=5 has the 17-municipality Bordeaux cluster", why);
  }
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  return failures == 0 ? 0 : 1;
}
