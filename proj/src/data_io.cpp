#include "geolink/data_io.hpp"

#include <nlohmann/json.hpp>

#include "geolink/error.hpp"

namespace geolink {

using nlohmann::json;

DataFormat parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::CsvWkt;
  if (name == "tsv") return DataFormat::TsvWkt;
  if (name == "geojson") return DataFormat::GeoJson;
  throw ConfigError("unknown data format '" + std::string(name) + "' (csv, tsv, geojson)");
}

std::string_view data_format_name(DataFormat f) noexcept {
  switch (f) {
    case DataFormat::CsvWkt:
      return "csv";
    case DataFormat::TsvWkt:
      return "tsv";
    case DataFormat::GeoJson:
      return "geojson";
  }
  return "unknown";
}

DatasetDescriptor DatasetDescriptor::tsv(std::filesystem::path p, int geometry_column) {
  DatasetDescriptor d;
  d.path = std::move(p);
  d.format = DataFormat::TsvWkt;
  d.delimiter = '\t';
  d.geometry_column = geometry_column;
  return d;
}

DatasetDescriptor DatasetDescriptor::csv(std::filesystem::path p, int geometry_column) {
  DatasetDescriptor d = tsv(std::move(p), geometry_column);
  d.format = DataFormat::CsvWkt;
  d.delimiter = ',';
  return d;
}

DatasetDescriptor DatasetDescriptor::geojson(std::filesystem::path p) {
  DatasetDescriptor d;
  d.path = std::move(p);
  d.format = DataFormat::GeoJson;
  return d;
}

void SkipReport::count(SkipCause cause) noexcept {
  switch (cause) {
    case SkipCause::ParseError:
      ++parse_error;
      break;
    case SkipCause::UnsupportedType:
      ++unsupported_type;
      break;
    case SkipCause::EmptyGeometry:
      ++empty_geometry;
      break;
    case SkipCause::InvalidGeometry:
      ++invalid_geometry;
      break;
  }
}

std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::vector<Coordinate> coords_from_json(const json& arr) {
  if (!arr.is_array()) throw WktError(SkipCause::ParseError, "coordinates must be an array");
  std::vector<Coordinate> out;
  out.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number()) {
      throw WktError(SkipCause::ParseError, "position must hold two numbers");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

std::vector<std::vector<Coordinate>> rings_from_json(const json& arr) {
  if (!arr.is_array()) throw WktError(SkipCause::ParseError, "rings must be an array");
  std::vector<std::vector<Coordinate>> rings;
  for (const auto& r : arr) rings.push_back(coords_from_json(r));
  return rings;
}

template <typename F>
Geometry checked(F&& make) {
  try {
    return make();
  } catch (const InvalidGeometry& e) {
    throw WktError(SkipCause::InvalidGeometry, e.what());
  }
}

std::vector<Geometry> geometries_from_json(const json& g) {
  if (g.is_null()) throw WktError(SkipCause::EmptyGeometry, "null geometry");
  if (!g.is_object() || !g.contains("type")) throw WktError(SkipCause::ParseError, "geometry without type");
  const std::string type = g["type"].is_string() ? g["type"].get<std::string>() : "";
  if (type == "Point" || type == "MultiPoint" || type == "GeometryCollection") {
    throw WktError(SkipCause::UnsupportedType, "unsupported geometry type " + type);
  }
  if (!g.contains("coordinates")) throw WktError(SkipCause::ParseError, "geometry without coordinates");
  const json& c = g["coordinates"];
  std::vector<Geometry> out;
  if (type == "LineString") {
    auto coords = coords_from_json(c);
    if (!coords.empty()) out.push_back(checked([&] { return Geometry::line_string(std::move(coords)); }));
  } else if (type == "MultiLineString") {
    if (!c.is_array()) throw WktError(SkipCause::ParseError, "coordinates must be an array");
    for (const auto& part : c) {
      auto coords = coords_from_json(part);
      if (!coords.empty()) out.push_back(checked([&] { return Geometry::line_string(std::move(coords)); }));
    }
  } else if (type == "Polygon") {
    auto rings = rings_from_json(c);
    if (!rings.empty()) out.push_back(checked([&] { return Geometry::polygon(std::move(rings)); }));
  } else if (type == "MultiPolygon") {
    if (!c.is_array()) throw WktError(SkipCause::ParseError, "coordinates must be an array");
    for (const auto& part : c) {
      auto rings = rings_from_json(part);
      if (!rings.empty()) out.push_back(checked([&] { return Geometry::polygon(std::move(rings)); }));
    }
  } else {
    throw WktError(SkipCause::ParseError, "unknown geometry type " + type);
  }
  if (out.empty()) throw WktError(SkipCause::EmptyGeometry, "empty geometry");
  return out;
}

}  // namespace

struct ProfileStream::GeoJsonState {
  json features;
  std::size_t next = 0;
};

ProfileStream::ProfileStream(const DatasetDescriptor& d) : desc_(d) {
  in_.open(d.path, std::ios::binary);
  if (!in_) throw IoFailure("cannot open " + d.path.string());
  if (d.format == DataFormat::GeoJson) {
    geojson_ = std::make_unique<GeoJsonState>();
    json root;
    try {
      root = json::parse(in_);
    } catch (const json::parse_error& e) {
      throw FormatError(d.path.string() + ": malformed GeoJSON: " + e.what());
    }
    if (!root.is_object() || root.value("type", "") != "FeatureCollection" ||
        !root.contains("features") || !root["features"].is_array()) {
      throw FormatError(d.path.string() + ": GeoJSON root must be a FeatureCollection");
    }
    geojson_->features = std::move(root["features"]);
    in_.close();
  } else if (d.has_header) {
    std::string line;
    if (std::getline(in_, line)) {
      strip_cr(line);
      header_ = split_delimited(line, d.delimiter);
    }
  }
}

ProfileStream::~ProfileStream() = default;
ProfileStream::ProfileStream(ProfileStream&&) noexcept = default;
ProfileStream& ProfileStream::operator=(ProfileStream&&) noexcept = default;

std::optional<GeometryProfile> ProfileStream::next() {
  while (pending_.empty()) {
    if (!refill()) return std::nullopt;
  }
  GeometryProfile p = std::move(pending_.front());
  pending_.pop_front();
  return p;
}

bool ProfileStream::refill() {
  return desc_.format == DataFormat::GeoJson ? refill_geojson() : refill_delimited();
}

bool ProfileStream::refill_delimited() {
  std::string line;
  while (std::getline(in_, line)) {
    strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split_delimited(line, desc_.delimiter);
    const auto gcol = static_cast<std::size_t>(desc_.geometry_column);
    if (gcol >= fields.size()) {
      skips_.count(SkipCause::ParseError);
      continue;
    }
    std::vector<Geometry> parts;
    try {
      parts = parse_wkt(fields[gcol]);
    } catch (const WktError& e) {
      skips_.count(e.cause());
      continue;
    }
    std::optional<std::string> uri;
    if (desc_.uri_column && static_cast<std::size_t>(*desc_.uri_column) < fields.size()) {
      uri = fields[static_cast<std::size_t>(*desc_.uri_column)];
    }
    Attributes attrs;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == gcol) continue;
      std::string name = i < header_.size() ? header_[i] : "col" + std::to_string(i);
      attrs.emplace_back(std::move(name), fields[i]);
    }
    for (auto& g : parts) {
      g.set_id(next_id_++);
      pending_.push_back({std::move(g), uri, attrs});
    }
    return true;
  }
  if (in_.bad()) throw IoFailure("read error on " + desc_.path.string());
  return false;
}

bool ProfileStream::refill_geojson() {
  auto& st = *geojson_;
  while (st.next < st.features.size()) {
    const json& f = st.features[st.next++];
    if (!f.is_object()) {
      skips_.count(SkipCause::ParseError);
      continue;
    }
    std::vector<Geometry> parts;
    try {
      parts = geometries_from_json(f.contains("geometry") ? f["geometry"] : json());
    } catch (const WktError& e) {
      skips_.count(e.cause());
      continue;
    } catch (const json::exception&) {
      skips_.count(SkipCause::ParseError);
      continue;
    }
    std::optional<std::string> uri;
    Attributes attrs;
    if (f.contains("id") && !f["id"].is_null()) uri = scalar_text(f["id"]);
    if (f.contains("properties") && f["properties"].is_object()) {
      for (const auto& [k, v] : f["properties"].items()) {
        if (!uri && k == "id" && !v.is_null()) uri = scalar_text(v);
        attrs.emplace_back(k, scalar_text(v));
      }
    }
    for (auto& g : parts) {
      g.set_id(next_id_++);
      pending_.push_back({std::move(g), uri, attrs});
    }
    return true;
  }
  return false;
}

Dataset LoadedDataset::take_geometries() {
  Dataset out;
  out.reserve(profiles.size());
  for (auto& p : profiles) out.push_back(std::move(p.geometry));
  return out;
}

std::string LoadedDataset::label(GeometryId id) const {
  if (id < profiles.size() && profiles[id].uri) return *profiles[id].uri;
  return std::to_string(id);
}

LoadedDataset read_dataset(const DatasetDescriptor& d, std::size_t byte_budget) {
  ProfileStream stream(d);
  LoadedDataset out;
  std::size_t bytes = 0;
  while (auto p = stream.next()) {
    bytes += p->geometry.memory_bytes();
    if (bytes > byte_budget) {
      throw MemoryBudgetExceeded("loading " + d.path.string() + " exceeds the memory budget of " +
                                 std::to_string(byte_budget) + " bytes");
    }
    out.profiles.push_back(std::move(*p));
  }
  out.skips = stream.skips();
  return out;
}

ProfileStream stream_target(const DatasetDescriptor& d) { return ProfileStream(d); }

std::size_t estimate_record_count(const DatasetDescriptor& d) {
  if (d.format == DataFormat::GeoJson) {
    ProfileStream s(d);
    std::size_t n = 0;
    while (s.next()) ++n;
    return n;
  }
  std::ifstream in(d.path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + d.path.string());
  std::string line;
  std::size_t n = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && d.has_header) {
      first = false;
      continue;
    }
    first = false;
    if (!blank(line)) ++n;
  }
  return n;
}

LinkWriter::LinkWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoFailure("cannot write " + path.string());
}

void LinkWriter::write(const LinkTriple& t) {
  out_ << t.source << '\t' << t.relation << '\t' << t.target << '\n';
  if (!out_) throw IoFailure("write error on " + path_.string());
  ++count_;
}

void LinkWriter::close() {
  out_.close();
  if (out_.fail()) throw IoFailure("cannot close " + path_.string());
}

std::size_t write_links(std::span<const LinkTriple> links, const std::filesystem::path& path) {
  LinkWriter w(path);
  for (const auto& t : links) w.write(t);
  w.close();
  return w.count();
}

std::vector<LinkTriple> read_links(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::vector<LinkTriple> out;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split_delimited(line, '\t');
    if (f.size() != 3) throw FormatError("link line must have three fields: " + line);
    out.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2])});
  }
  return out;
}

}  // namespace geolink
