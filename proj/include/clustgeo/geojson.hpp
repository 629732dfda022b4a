#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustgeo/error.hpp"

namespace clustgeo {

struct AnnotatedMap {
  nlohmann::ordered_json geojson;
  std::vector<std::string> features_without_label;  // in feature order
  std::vector<std::string> labels_without_feature;  // in label-file order

  bool consistent() const { return features_without_label.empty() && labels_without_feature.empty(); }
};

namespace detail {

inline std::string json_id(const nlohmann::ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  return v.dump();
}

}  // namespace detail

// Adds an integer `property` to every feature of a FeatureCollection whose id
// has a label. A feature's id is `properties[id_property]` when id_property is
// non-empty, otherwise the feature's top-level `id`, falling back to
// `properties.id`.
inline AnnotatedMap annotate_geojson(nlohmann::ordered_json geojson, const std::vector<std::string>& ids,
                                     const std::vector<int>& labels, const std::string& id_property = "",
                                     const std::string& property = "cluster") {
  if (!geojson.is_object() || geojson.value("type", "") != "FeatureCollection" || !geojson.contains("features") ||
      !geojson["features"].is_array())
    throw InputError("GeoJSON input must be a FeatureCollection");
  std::unordered_map<std::string, int> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id.emplace(ids[i], labels[i]);

  AnnotatedMap out;
  std::unordered_set<std::string> seen;
  for (auto& f : geojson["features"]) {
    if (!f.is_object()) throw InputError("GeoJSON feature must be an object");
    if (!f.contains("properties") || f["properties"].is_null()) f["properties"] = nlohmann::ordered_json::object();
    const auto& props = f["properties"];
    std::string fid;
    if (!id_property.empty()) {
      if (!props.contains(id_property)) throw InputError("feature lacks property '" + id_property + "'");
      fid = detail::json_id(props[id_property]);
    } else if (f.contains("id")) {
      fid = detail::json_id(f["id"]);
    } else if (props.contains("id")) {
      fid = detail::json_id(props["id"]);
    } else {
      throw InputError("feature has no id; pass the name of its id property");
    }
    seen.insert(fid);
    auto it = by_id.find(fid);
    if (it == by_id.end()) {
      out.features_without_label.push_back(fid);
      continue;
    }
    f["properties"][property] = it->second;
  }
  for (const auto& id : ids)
    if (!seen.count(id)) out.labels_without_feature.push_back(id);
  out.geojson = std::move(geojson);
  return out;
}

}  // namespace clustgeo
