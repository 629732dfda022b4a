#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <CLI11.hpp>
#include "clustgeo/clustgeo.hpp"

#ifndef CLUSTGEO_VERSION
#define CLUSTGEO_VERSION "0.0.0"
#endif

namespace clustgeo::cli {

using ojson = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kInternal = 1, kInput = 2, kConsistency = 3 };

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

inline std::string absolute_path(const std::string& p) {
  return std::filesystem::absolute(std::filesystem::path(p)).lexically_normal().string();
}

// Options whose values are file paths; the manifest stores them absolute so a
// replay does not depend on the working directory.
inline const std::set<std::string>& path_flags() {
  static const std::set<std::string> f{"--features", "--coords", "--adjacency", "--square-csv", "--d0",
                                       "--d1",       "--weights", "--ids",      "--tree",       "--out",
                                       "--geojson",  "--labels",  "--manifest"};
  return f;
}

inline std::vector<std::string> resolve_argv(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    const auto eq = a.find('=');
    if (eq != std::string::npos && path_flags().count(a.substr(0, eq))) {
      out.push_back(a.substr(0, eq + 1) + absolute_path(a.substr(eq + 1)));
    } else if (path_flags().count(a) && i + 1 < args.size()) {
      out.push_back(a);
      out.push_back(absolute_path(args[++i]));
    } else {
      out.push_back(a);
    }
  }
  return out;
}

// Accumulates what a subcommand read and wrote, then writes the manifest next
// to the primary output.
class Manifest {
 public:
  Manifest(std::string subcommand, const std::vector<std::string>& argv, std::uint64_t seed)
      : subcommand_(std::move(subcommand)), argv_(argv), seed_(seed) {}

  ojson& parameters() { return params_; }
  void input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", absolute_path(path)}, {"sha256", sha256_file(path)}});
  }
  void output(const std::string& role, const std::string& path) {
    outputs_.push_back({{"role", role}, {"path", absolute_path(path)}, {"sha256", sha256_file(path)}});
  }

  std::string write(const std::string& primary_output) const {
    ojson m;
    m["tool"] = "clustgeo";
    m["version"] = CLUSTGEO_VERSION;
    m["subcommand"] = subcommand_;
    m["argv"] = argv_;
    m["replay_argv"] = resolve_argv(argv_);
    m["seed"] = seed_;
    m["parameters"] = params_.is_null() ? ojson::object() : params_;
    m["inputs"] = inputs_.empty() ? ojson::array() : ojson(inputs_);
    m["outputs"] = ojson(outputs_);
    const std::string path = primary_output + ".manifest.json";
    auto out = csv::open_output(path);
    out << m.dump(2) << '\n';
    if (!out) throw InputError(path + ": write failed");
    return path;
  }

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  std::uint64_t seed_;
  ojson params_;
  std::vector<ojson> inputs_;
  std::vector<ojson> outputs_;
};

inline std::vector<std::string> read_ids(const std::string& path) {
  auto in = csv::open_input(path);
  auto rows = csv::read_rows(in);
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto id = detail::trim(rows[r].fields[0]);
    if (r == 0 && detail::lower(id) == "id") continue;
    ids.push_back(id);
  }
  return ids;
}

inline std::string ids_sidecar(const std::string& out) { return out + ".ids.csv"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot open for writing");
  out << text;
  if (!out) throw InputError(path + ": write failed");
}

inline std::string svg_path(const std::string& csv_out, const std::string& suffix) {
  std::string stem = csv_out;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  return stem + "." + suffix + ".svg";
}

// Dissimilarities plus the ids and weights that go with them, as resolved
// from the common --d0/--d1/--ids/--weights options.
struct LoadedPair {
  DissimMatrix d0;
  std::optional<DissimMatrix> d1;
  std::vector<std::string> ids;
  std::optional<WeightVector> wt;
};

inline LoadedPair load_pair(Manifest& m, const std::string& d0_path, const std::string& d1_path,
                            const std::string& ids_path, const std::string& weights_path) {
  auto d0 = read_dissim(d0_path);
  m.input("d0", d0_path);
  std::optional<DissimMatrix> d1;
  if (!d1_path.empty()) {
    d1 = read_dissim(d1_path);
    m.input("d1", d1_path);
    if (d1->size() != d0.size())
      throw InputError("D1 has n=" + std::to_string(d1->size()) + " but D0 has n=" + std::to_string(d0.size()));
  }
  std::vector<std::string> ids;
  if (!ids_path.empty()) {
    ids = read_ids(ids_path);
    m.input("ids", ids_path);
    if (ids.size() != d0.size())
      throw InputError(ids_path + ": " + std::to_string(ids.size()) + " ids for n=" + std::to_string(d0.size()));
  } else if (d0.has_ids()) {
    ids = d0.ids();
  } else if (d1 && d1->has_ids()) {
    ids = d1->ids();
  }
  if (!ids.empty()) {
    for (const DissimMatrix* d : {&d0, d1 ? &*d1 : nullptr})
      if (d && d->has_ids() && d->ids() != ids) throw ConsistencyError("D0, D1 and --ids disagree on observation ids");
    d0 = d0.with_ids(ids);
    if (d1) d1 = d1->with_ids(ids);
  }
  std::optional<WeightVector> wt;
  if (!weights_path.empty()) {
    wt = read_weights(weights_path, ids);
    m.input("weights", weights_path);
  }
  return {std::move(d0), std::move(d1), std::move(ids), std::move(wt)};
}

inline Kernel parse_kernel(const std::string& k) {
  if (k == "auto") return Kernel::kAuto;
  if (k == "naive") return Kernel::kNaive;
  if (k == "nnchain") return Kernel::kNNChain;
  throw InputError("unknown kernel '" + k + "'");
}

struct Options {
  std::uint64_t seed = 0;
  // dist
  std::string features, coords, adjacency, square_csv, metric, format = "condensed";
  bool standardize = false;
  // cluster / choicealpha
  std::string d0, d1, weights, ids, kernel = "auto", grid = "0:1:0.1";
  std::optional<double> alpha;
  bool no_scale = false, no_normalize = false;
  unsigned threads = 1;
  // cut / choicealpha
  std::string tree;
  int k = 0;
  // render-map
  std::string geojson, labels, id_property, property = "cluster";
  // replay
  std::string manifest;
  std::string out;
};

inline int cmd_dist(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest m("dist", argv, o.seed);
  const int sources = !o.features.empty() + !o.coords.empty() + !o.adjacency.empty() + !o.square_csv.empty();
  if (sources != 1) throw InputError("dist needs exactly one of --features, --coords, --adjacency, --square-csv");
  DissimFormat fmt;
  if (o.format == "condensed")
    fmt = DissimFormat::kCondensed;
  else if (o.format == "square")
    fmt = DissimFormat::kSquare;
  else
    throw InputError("unknown --format '" + o.format + "'");

  std::optional<DissimMatrix> d;
  std::string metric = o.metric;
  if (!o.features.empty()) {
    if (metric.empty()) metric = "euclidean";
    if (metric != "euclidean") throw InputError("--features supports --metric euclidean only");
    auto x = read_features(o.features);
    m.input("features", o.features);
    if (o.standardize) x = standardize(x);
    d = euclidean_dissim(x);
  } else {
    if (o.standardize) throw InputError("--standardize applies to --features only");
    if (!o.coords.empty()) {
      if (metric.empty()) metric = "haversine";
      if (metric != "haversine") throw InputError("--coords supports --metric haversine only");
      d = geodesic_dissim(read_coords(o.coords));
      m.input("coords", o.coords);
    } else {
      if (!metric.empty()) throw InputError("--metric applies to --features and --coords only");
      if (!o.adjacency.empty()) {
        metric = "adjacency";
        d = adjacency_dissim(read_adjacency(o.adjacency));
        m.input("adjacency", o.adjacency);
      } else {
        metric = "given";
        d = read_dissim(o.square_csv, DissimFormat::kSquare);
        m.input("square_csv", o.square_csv);
      }
    }
  }
  write_dissim(*d, o.out, fmt);
  m.output("matrix", o.out);
  if (fmt == DissimFormat::kCondensed && d->has_ids()) {
    std::ostringstream ids;
    ids << "id\n";
    for (const auto& id : d->ids()) ids << csv::quote(id) << '\n';
    write_text(ids_sidecar(o.out), ids.str());
    m.output("ids", ids_sidecar(o.out));
  }
  m.parameters() = {{"metric", metric}, {"standardize", o.standardize}, {"format", o.format}, {"n", d->size()}};
  m.write(o.out);
  out << "n=" << d->size() << '\n';
  return kOk;
}

inline int cmd_cluster(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest m("cluster", argv, o.seed);
  if (o.alpha && o.d1.empty()) throw InputError("--alpha requires --d1");
  auto in = load_pair(m, o.d0, o.d1, o.ids, o.weights);
  const MixSpec spec{o.alpha.value_or(0.0), !o.no_scale};
  const auto tree = hclustgeo(in.d0, in.d1, spec, in.wt, parse_kernel(o.kernel));
  write_text(o.out, to_json(tree).dump(2) + "\n");
  m.output("tree", o.out);
  m.parameters() = {{"alpha", spec.alpha},
                    {"scale", spec.scale},
                    {"weights", o.weights.empty() ? "uniform" : "file"},
                    {"kernel", o.kernel},
                    {"n", in.d0.size()}};
  m.write(o.out);
  out << format_sig(tree.height_sum(), 7) << '\n';
  return kOk;
}

inline int cmd_cut(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest m("cut", argv, o.seed);
  auto in = csv::open_input(o.tree);
  const auto tree = parse_dendrogram(in, o.tree);
  m.input("tree", o.tree);
  const auto p = cut_tree(tree, o.k);
  std::ostringstream text;
  write_partition_csv(text, p, tree.ids());
  write_text(o.out, text.str());
  m.output("partition", o.out);
  m.parameters() = {{"k", o.k}};
  m.write(o.out);
  out << "K=" << p.clusters() << '\n';
  return kOk;
}

inline svg::LineChart q_chart(const QTable& t, bool normalized) {
  svg::LineChart c;
  c.title = (normalized ? "Normalized proportion of explained inertia, K=" : "Proportion of explained inertia, K=") +
            std::to_string(t.k);
  c.x_label = "alpha";
  c.y_label = normalized ? "Qnorm" : "Q";
  std::vector<std::optional<double>> y0, y1;
  for (std::size_t j = 0; j < t.rows(); ++j) {
    y0.push_back(normalized ? t.q0norm[j] : std::optional<double>(t.q0[j]));
    y1.push_back(normalized ? t.q1norm[j] : std::optional<double>(t.q1[j]));
  }
  c.series.push_back({normalized ? "Q0norm" : "Q0", t.alpha, y0, false});
  c.series.push_back({normalized ? "Q1norm" : "Q1", t.alpha, y1, true});
  return c;
}

inline int cmd_choicealpha(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest m("choicealpha", argv, o.seed);
  auto in = load_pair(m, o.d0, o.d1, o.ids, o.weights);
  const auto grid = parse_grid(o.grid);
  ChoiceOptions opt;
  opt.scale = !o.no_scale;
  opt.normalize = !o.no_normalize;
  opt.threads = o.threads;
  opt.kernel = parse_kernel(o.kernel);
  const auto t = choice_alpha(in.d0, *in.d1, grid, o.k, in.wt, opt);

  std::ostringstream table;
  write_qtable_csv(table, t);
  write_text(o.out, table.str());
  m.output("qtable", o.out);
  for (bool norm : {false, true}) {
    if (norm && !t.normalized()) continue;
    std::ostringstream svg;
    svg::render(svg, q_chart(t, norm));
    const auto path = svg_path(o.out, norm ? "Qnorm" : "Q");
    write_text(path, svg.str());
    m.output(norm ? "qnorm_chart" : "q_chart", path);
  }
  ojson g = ojson::array();
  for (double a : grid) g.push_back(a);
  m.parameters() = {{"k", o.k},
                    {"grid", o.grid},
                    {"alpha", g},
                    {"scale", opt.scale},
                    {"normalize", opt.normalize},
                    {"weights", o.weights.empty() ? "uniform" : "file"},
                    {"kernel", o.kernel},
                    {"n", in.d0.size()}};
  m.write(o.out);
  out << table.str();
  return kOk;
}

inline int cmd_render_map(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest m("render-map", argv, o.seed);
  ojson g;
  {
    auto in = csv::open_input(o.geojson);
    try {
      g = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(o.geojson + ": invalid JSON: " + e.what());
    }
  }
  m.input("geojson", o.geojson);
  auto lin = csv::open_input(o.labels);
  const auto lp = parse_partition_csv(lin, o.labels);
  m.input("labels", o.labels);
  const auto res = annotate_geojson(std::move(g), lp.ids, lp.labels, o.id_property, o.property);
  if (!res.consistent()) {
    std::string msg = "id mismatch between map and labels";
    auto list = [&](const char* what, const std::vector<std::string>& v) {
      if (v.empty()) return;
      msg += std::string("; ") + what + " (" + std::to_string(v.size()) + "):";
      for (const auto& id : v) msg += " " + id;
    };
    list("labels without a map feature", res.labels_without_feature);
    list("map features without a label", res.features_without_label);
    throw ConsistencyError(msg);
  }
  write_text(o.out, res.geojson.dump() + "\n");
  m.output("map", o.out);
  m.parameters() = {{"id_property", o.id_property}, {"property", o.property}};
  m.write(o.out);
  out << "annotated " << res.geojson["features"].size() << " features\n";
  return kOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  ojson man;
  {
    auto in = csv::open_input(o.manifest);
    try {
      man = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(o.manifest + ": invalid JSON: " + e.what());
    }
  }
  if (!man.contains("replay_argv") || !man.contains("inputs") || !man.contains("outputs"))
    throw InputError(o.manifest + ": not a clustgeo run manifest");
  for (const auto& i : man["inputs"])
    if (sha256_file(i["path"].get<std::string>()) != i["sha256"].get<std::string>())
      throw ConsistencyError("input changed since the manifest was written: " + i["path"].get<std::string>());
  std::ostringstream sub_out;
  const int code = run(man["replay_argv"].get<std::vector<std::string>>(), sub_out, err);
  if (code != kOk) return code;
  std::size_t same = 0;
  for (const auto& f : man["outputs"]) {
    const auto path = f["path"].get<std::string>();
    if (sha256_file(path) != f["sha256"].get<std::string>()) throw ConsistencyError("replay output differs: " + path);
    ++same;
  }
  out << "replayed " << man["subcommand"].get<std::string>() << ": " << same << " outputs byte-identical\n";
  return kOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ward-like hierarchical clustering with a second dissimilarity matrix", "clustgeo"};
  app.set_version_flag("--version", CLUSTGEO_VERSION);
  app.require_subcommand(1);
  Options o;

  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Recorded in the manifest; no step is random"); };

  auto* dist = app.add_subcommand("dist", "Build a dissimilarity matrix");
  dist->add_option("--features", o.features, "Feature CSV (id column, then numeric columns)");
  dist->add_option("--coords", o.coords, "Coordinate CSV with id, lat, lon columns");
  dist->add_option("--adjacency", o.adjacency, "Adjacency JSON: id -> neighbour ids");
  dist->add_option("--square-csv", o.square_csv, "Square dissimilarity CSV to convert");
  dist->add_option("--metric", o.metric, "euclidean (features) or haversine (coords)");
  dist->add_flag("--standardize", o.standardize, "Centre and scale feature columns");
  dist->add_option("--format", o.format, "condensed or square")->capture_default_str();
  dist->add_option("--out", o.out, "Output matrix path")->required();
  seed(dist);

  auto* cluster = app.add_subcommand("cluster", "Build the dendrogram");
  cluster->add_option("--d0", o.d0, "Feature-space dissimilarities")->required();
  cluster->add_option("--d1", o.d1, "Constraint-space dissimilarities");
  cluster->add_option("--alpha", o.alpha, "Mixing parameter in [0,1]");
  cluster->add_option("--weights", o.weights, "Observation weights CSV");
  cluster->add_option("--ids", o.ids, "Observation ids, one per line");
  cluster->add_flag("--no-scale", o.no_scale, "Do not divide D0 and D1 by their maxima");
  cluster->add_option("--kernel", o.kernel, "auto, naive or nnchain")->capture_default_str();
  cluster->add_option("--out", o.out, "Dendrogram JSON path")->required();
  seed(cluster);

  auto* cut = app.add_subcommand("cut", "Cut a dendrogram into K clusters");
  cut->add_option("--tree", o.tree, "Dendrogram JSON")->required();
  cut->add_option("--k", o.k, "Number of clusters")->required();
  cut->add_option("--out", o.out, "Partition CSV path")->required();
  seed(cut);

  auto* choice = app.add_subcommand("choicealpha", "Explained inertia over a grid of alpha values");
  choice->add_option("--d0", o.d0, "Feature-space dissimilarities")->required();
  choice->add_option("--d1", o.d1, "Constraint-space dissimilarities")->required();
  choice->add_option("--k", o.k, "Number of clusters")->required();
  choice->add_option("--grid", o.grid, "start:stop:step or comma list")->capture_default_str();
  choice->add_option("--weights", o.weights, "Observation weights CSV");
  choice->add_option("--ids", o.ids, "Observation ids, one per line");
  choice->add_flag("--no-scale", o.no_scale, "Do not divide D0 and D1 by their maxima");
  choice->add_flag("--no-normalize", o.no_normalize, "Skip the normalized columns and chart");
  choice->add_option("--threads", o.threads, "Grid points clustered concurrently")->capture_default_str();
  choice->add_option("--kernel", o.kernel, "auto, naive or nnchain")->capture_default_str();
  choice->add_option("--out", o.out, "Q table CSV path; charts go next to it")->required();
  seed(choice);

  auto* render = app.add_subcommand("render-map", "Add cluster labels to a GeoJSON map");
  render->add_option("--geojson", o.geojson, "FeatureCollection")->required();
  render->add_option("--labels", o.labels, "Partition CSV (id,label)")->required();
  render->add_option("--id-property", o.id_property, "Feature property holding the id");
  render->add_option("--property", o.property, "Name of the added property")->capture_default_str();
  render->add_option("--out", o.out, "Annotated GeoJSON path")->required();
  seed(render);

  auto* replay = app.add_subcommand("replay", "Re-run a manifest and verify its outputs");
  replay->add_option("--manifest", o.manifest, "Manifest JSON")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*dist) return cmd_dist(o, args, out);
    if (*cluster) return cmd_cluster(o, args, out);
    if (*cut) return cmd_cut(o, args, out);
    if (*choice) return cmd_choicealpha(o, args, out);
    if (*render) return cmd_render_map(o, args, out);
    if (*replay) return cmd_replay(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << '\n';
    return kConsistency;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace clustgeo::cli
