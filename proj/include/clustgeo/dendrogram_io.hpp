#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustgeo/csv.hpp"
#include "clustgeo/dendrogram.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/numfmt.hpp"

namespace clustgeo {

// {n, ids, merges:[{left:{leaf:i}|{merge:m}, right:..., height, weight}], order}
inline nlohmann::ordered_json to_json(const Dendrogram& t) {
  auto ref = [](const ClusterRef& c) {
    nlohmann::ordered_json j;
    j[c.is_leaf() ? "leaf" : "merge"] = c.index;
    return j;
  };
  nlohmann::ordered_json j;
  j["n"] = t.leaves();
  auto ids = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < t.leaves(); ++i) ids.push_back(t.id(i));
  j["ids"] = std::move(ids);
  auto merges = nlohmann::ordered_json::array();
  for (const auto& m : t.merges())
    merges.push_back({{"left", ref(m.left)}, {"right", ref(m.right)}, {"height", m.height}, {"weight", m.weight}});
  j["merges"] = std::move(merges);
  j["order"] = t.order();
  return j;
}

inline Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<std::string> ids;
    if (j.contains("ids")) ids = j.at("ids").get<std::vector<std::string>>();
    auto ref = [](const nlohmann::json& r) {
      if (r.contains("leaf")) return ClusterRef::leaf(r.at("leaf").get<std::size_t>());
      if (r.contains("merge")) return ClusterRef::merge(r.at("merge").get<std::size_t>());
      throw InputError("cluster reference must be {leaf:i} or {merge:m}");
    };
    std::vector<Merge> merges;
    for (const auto& m : j.at("merges"))
      merges.push_back({ref(m.at("left")), ref(m.at("right")), m.at("height").get<double>(), m.at("weight").get<double>()});
    return Dendrogram(n, std::move(merges), std::move(ids));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed dendrogram JSON: ") + e.what());
  }
}

inline Dendrogram parse_dendrogram(std::istream& in, const std::string& source = "<input>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source + ": invalid JSON: " + e.what());
  }
  return dendrogram_from_json(j);
}

inline void write_partition_csv(std::ostream& out, const Partition& p, const std::vector<std::string>& ids) {
  out << "id,label\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    out << csv::quote(ids.empty() ? std::to_string(i + 1) : ids[i]) << ',' << p[i] << '\n';
}

struct LabelledPartition {
  std::vector<std::string> ids;
  std::vector<int> labels;
};

// Reads `id,label` rows; labels need not be contiguous.
inline LabelledPartition parse_partition_csv(std::istream& in, const std::string& source = "<input>") {
  auto rows = csv::read_rows(in);
  if (!rows.empty() && rows[0].fields.size() == 2 && !parse_double(rows[0].fields[1])) rows.erase(rows.begin());
  LabelledPartition out;
  for (const auto& r : rows) {
    if (r.fields.size() != 2)
      throw InputError(source + ":" + std::to_string(r.line) + ": expected 'id,label', got " +
                       std::to_string(r.fields.size()) + " fields");
    auto v = parse_double(r.fields[1]);
    if (!v || *v != static_cast<int>(*v))
      throw InputError(source + ":" + std::to_string(r.line) + ": label must be an integer");
    out.ids.push_back(r.fields[0]);
    out.labels.push_back(static_cast<int>(*v));
  }
  return out;
}

}  // namespace clustgeo
