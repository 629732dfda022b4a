#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustgeo/csv.hpp"
#include "clustgeo/dissim.hpp"
#include "clustgeo/numfmt.hpp"

namespace clustgeo {

// Square: optional header row and id column, n rows of n fields, zero diagonal.
// Condensed: a `n=<count>` line followed by n(n-1)/2 values in rank order.
enum class DissimFormat { kSquare, kCondensed, kAuto };

inline constexpr double kSymmetryRelTol = 1e-12;

namespace detail {

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

inline double require_number(const std::string& field, const std::string& source, std::size_t line,
                             std::size_t column) {
  auto v = parse_double(field);
  if (!v) throw InputError(where(source, line) + "column " + std::to_string(column) + ": not a number: '" + field + "'");
  if (!std::isfinite(*v))
    throw InputError(where(source, line) + "column " + std::to_string(column) + ": non-finite value");
  return *v;
}

inline std::string trim(std::string s) {
  auto ns = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), ns));
  s.erase(std::find_if(s.rbegin(), s.rend(), ns).base(), s.end());
  return s;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline DissimMatrix parse_square(const std::vector<csv::Row>& rows_in, const std::string& source) {
  if (rows_in.empty()) throw InputError(source + ": empty matrix file");
  std::vector<csv::Row> rows = rows_in;

  bool header = false;
  for (std::size_t c = 0; c < rows[0].fields.size(); ++c) {
    const auto f = trim(rows[0].fields[c]);
    if (c == 0 && f.empty()) continue;
    if (!parse_double(f)) {
      header = true;
      break;
    }
  }
  if (header) rows.erase(rows.begin());
  const std::size_t n = rows.size();
  if (n < 2) throw InputError(source + ": square matrix needs at least 2 data rows");

  const std::size_t width = rows[0].fields.size();
  bool id_col;
  if (width == n + 1)
    id_col = true;
  else if (width == n)
    id_col = false;
  else
    throw InputError(where(source, rows[0].line) + "expected " + std::to_string(n) + " values (or " +
                     std::to_string(n + 1) + " with an id column), got " + std::to_string(width));

  std::vector<std::string> ids;
  std::vector<double> full(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    if (r.fields.size() != width)
      throw InputError(where(source, r.line) + "ragged row: expected " + std::to_string(width) + " fields, got " +
                       std::to_string(r.fields.size()));
    const std::size_t off = id_col ? 1 : 0;
    if (id_col) ids.push_back(trim(r.fields[0]));
    for (std::size_t j = 0; j < n; ++j) full[i * n + j] = require_number(r.fields[j + off], source, r.line, j + off + 1);
  }
  if (!id_col && header) {
    const auto& h = rows_in[0].fields;
    if (h.size() == n) {
      for (const auto& f : h) ids.push_back(trim(f));
    } else if (h.size() == n + 1) {
      for (std::size_t c = 1; c < h.size(); ++c) ids.push_back(trim(h[c]));
    }
  }

  std::vector<double> v(condensed_size(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (full[i * n + i] != 0.0)
      throw InputError(where(source, rows[i].line) + "nonzero diagonal at (" + std::to_string(i + 1) + "," +
                       std::to_string(i + 1) + ")");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = full[i * n + j], b = full[j * n + i];
      if (std::fabs(a - b) > kSymmetryRelTol * std::max(std::fabs(a), std::fabs(b)))
        throw InputError(source + ": asymmetric matrix at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                         "): " + format_exact(a) + " vs " + format_exact(b));
      if (a < 0.0)
        throw InputError(source + ": negative dissimilarity at (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ")");
      v[condensed_rank(n, i, j)] = a;
    }
  }
  return DissimMatrix(n, std::move(v), std::move(ids));
}

inline DissimMatrix parse_condensed(const std::vector<csv::Row>& rows, const std::string& source) {
  if (rows.empty()) throw InputError(source + ": empty matrix file");
  const auto head = trim(rows[0].fields[0]);
  if (rows[0].fields.size() != 1 || head.rfind("n=", 0) != 0)
    throw InputError(where(source, rows[0].line) + "condensed matrix must start with 'n=<count>'");
  auto nv = parse_double(head.substr(2));
  if (!nv || *nv < 2 || *nv != std::floor(*nv))
    throw InputError(where(source, rows[0].line) + "invalid observation count '" + head.substr(2) + "'");
  const auto n = static_cast<std::size_t>(*nv);
  const std::size_t m = condensed_size(n);
  if (rows.size() - 1 != m)
    throw InputError(source + ": n=" + std::to_string(n) + " requires " + std::to_string(m) + " values, found " +
                     std::to_string(rows.size() - 1));
  std::vector<double> v(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& r = rows[k + 1];
    if (r.fields.size() != 1)
      throw InputError(where(source, r.line) + "expected one value per line, got " + std::to_string(r.fields.size()));
    v[k] = require_number(r.fields[0], source, r.line, 1);
    if (v[k] < 0.0) throw InputError(where(source, r.line) + "negative dissimilarity");
  }
  return DissimMatrix(n, std::move(v));
}

}  // namespace detail

inline DissimMatrix parse_dissim(std::istream& in, DissimFormat format, const std::string& source = "<input>") {
  const auto rows = csv::read_rows(in);
  if (format == DissimFormat::kAuto)
    format = (!rows.empty() && detail::trim(rows[0].fields[0]).rfind("n=", 0) == 0) ? DissimFormat::kCondensed
                                                                                     : DissimFormat::kSquare;
  return format == DissimFormat::kCondensed ? detail::parse_condensed(rows, source) : detail::parse_square(rows, source);
}

inline DissimMatrix read_dissim(const std::string& path, DissimFormat format = DissimFormat::kAuto) {
  auto in = csv::open_input(path);
  return parse_dissim(in, format, path);
}

inline void emit_dissim(std::ostream& out, const DissimMatrix& d, DissimFormat format) {
  const std::size_t n = d.size();
  if (format == DissimFormat::kCondensed) {
    out << "n=" << n << '\n';
    for (double x : d.values()) out << format_exact(x) << '\n';
    return;
  }
  const bool ids = d.has_ids();
  if (ids) {
    out << "id";
    for (std::size_t j = 0; j < n; ++j) out << ',' << csv::quote(d.ids()[j]);
    out << '\n';
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ids) out << csv::quote(d.ids()[i]) << ',';
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_exact(d(i, j));
    }
    out << '\n';
  }
}

inline void write_dissim(const DissimMatrix& d, const std::string& path, DissimFormat format) {
  auto out = csv::open_output(path);
  emit_dissim(out, d, format == DissimFormat::kAuto ? DissimFormat::kCondensed : format);
  if (!out) throw InputError(path + ": write failed");
}

// Header row of column names; first column holds observation ids.
inline FeatureTable parse_features(std::istream& in, const std::string& source = "<input>") {
  const auto rows = csv::read_rows(in);
  if (rows.size() < 2) throw InputError(source + ": feature table needs a header and at least one data row");
  const std::size_t width = rows[0].fields.size();
  if (width < 2) throw InputError(detail::where(source, rows[0].line) + "feature table needs an id column and at least one feature");
  std::vector<std::string> cols;
  for (std::size_t c = 1; c < width; ++c) cols.push_back(detail::trim(rows[0].fields[c]));
  std::vector<std::string> ids;
  std::vector<double> data;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != width)
      throw InputError(detail::where(source, row.line) + "ragged row: expected " + std::to_string(width) +
                       " fields, got " + std::to_string(row.fields.size()));
    ids.push_back(detail::trim(row.fields[0]));
    for (std::size_t c = 1; c < width; ++c) {
      auto v = parse_double(row.fields[c]);
      if (!v || !std::isfinite(*v))
        throw InputError(detail::where(source, row.line) + "row " + std::to_string(r) + ", column '" + cols[c - 1] +
                         "': missing or non-finite value '" + row.fields[c] + "'");
      data.push_back(*v);
    }
  }
  const std::size_t n = ids.size();
  return FeatureTable(n, width - 1, std::move(data), std::move(ids), std::move(cols));
}

inline FeatureTable read_features(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_features(in, path);
}

// Columns `id,lat,lon` located by header name.
inline GeoPoints parse_coords(std::istream& in, const std::string& source = "<input>") {
  const auto rows = csv::read_rows(in);
  if (rows.empty()) throw InputError(source + ": empty coordinates file");
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < rows[0].fields.size(); ++c) col[detail::lower(detail::trim(rows[0].fields[c]))] = c;
  for (const char* name : {"id", "lat", "lon"})
    if (!col.count(name)) throw InputError(source + ": coordinates header must contain columns id,lat,lon");
  std::vector<LatLon> pts;
  std::vector<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows[0].fields.size())
      throw InputError(detail::where(source, row.line) + "ragged row");
    ids.push_back(detail::trim(row.fields[col["id"]]));
    const double lat = detail::require_number(row.fields[col["lat"]], source, row.line, col["lat"] + 1);
    const double lon = detail::require_number(row.fields[col["lon"]], source, row.line, col["lon"] + 1);
    if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
      throw InputError(detail::where(source, row.line) + "coordinate out of range for id '" + ids.back() + "'");
    pts.push_back({lat, lon});
  }
  return GeoPoints(std::move(pts), std::move(ids));
}

inline GeoPoints read_coords(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_coords(in, path);
}

// JSON object mapping id -> array of neighbour ids. Observation order is the
// order of keys in the file.
inline AdjacencyList parse_adjacency(std::istream& in, const std::string& source = "<input>") {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw InputError(source + ": adjacency must be a JSON object mapping id to neighbour ids");
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  for (auto it = j.begin(); it != j.end(); ++it) {
    index.emplace(it.key(), ids.size());
    ids.push_back(it.key());
  }
  auto id_text = [](const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw InputError("neighbour ids must be strings or integers");
  };
  std::vector<std::vector<std::size_t>> nbrs(ids.size());
  std::size_t i = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++i) {
    if (!it.value().is_array()) throw InputError(source + ": neighbours of '" + it.key() + "' must be an array");
    for (const auto& v : it.value()) {
      const auto nid = id_text(v);
      auto f = index.find(nid);
      if (f == index.end()) throw InputError(source + ": '" + it.key() + "' lists unknown neighbour '" + nid + "'");
      nbrs[i].push_back(f->second);
    }
  }
  return AdjacencyList(std::move(nbrs), std::move(ids));
}

inline AdjacencyList read_adjacency(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for reading");
  return parse_adjacency(in, path);
}

// Either one weight per line (optionally headed), or `id,weight` rows. With ids
// present and `order` non-empty, weights are matched to `order` by id.
inline WeightVector parse_weights(std::istream& in, const std::vector<std::string>& order,
                                  const std::string& source = "<input>") {
  auto rows = csv::read_rows(in);
  if (rows.empty()) throw InputError(source + ": empty weights file");
  const std::size_t width = rows[0].fields.size();
  if (width < 1 || width > 2) throw InputError(source + ": weights file must have 1 or 2 columns");
  if (!parse_double(rows[0].fields[width - 1])) rows.erase(rows.begin());
  std::vector<std::string> ids;
  std::vector<double> w;
  for (const auto& r : rows) {
    if (r.fields.size() != width) throw InputError(detail::where(source, r.line) + "ragged row");
    if (width == 2) ids.push_back(detail::trim(r.fields[0]));
    w.push_back(detail::require_number(r.fields[width - 1], source, r.line, width));
  }
  if (width == 2 && !order.empty()) {
    std::unordered_map<std::string, double> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = w[i];
    std::vector<double> out;
    for (const auto& id : order) {
      auto f = by_id.find(id);
      if (f == by_id.end()) throw InputError(source + ": no weight for id '" + id + "'");
      out.push_back(f->second);
    }
    return WeightVector(std::move(out));
  }
  return WeightVector(std::move(w));
}

inline WeightVector read_weights(const std::string& path, const std::vector<std::string>& order = {}) {
  auto in = csv::open_input(path);
  return parse_weights(in, order, path);
}

}  // namespace clustgeo
