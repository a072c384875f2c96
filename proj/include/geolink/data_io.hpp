#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geolink/geometry.hpp"
#include "geolink/wkt.hpp"

namespace geolink {

enum class DataFormat { CsvWkt, TsvWkt, GeoJson };

DataFormat parse_data_format(std::string_view name);
std::string_view data_format_name(DataFormat f) noexcept;

struct DatasetDescriptor {
  std::filesystem::path path;
  DataFormat format = DataFormat::TsvWkt;
  /// Column holding the WKT text (delimited formats).
  int geometry_column = 0;
  /// Column holding the record URI, if any (delimited formats).
  std::optional<int> uri_column;
  char delimiter = '\t';
  bool has_header = false;

  static DatasetDescriptor tsv(std::filesystem::path p, int geometry_column = 0);
  static DatasetDescriptor csv(std::filesystem::path p, int geometry_column = 0);
  static DatasetDescriptor geojson(std::filesystem::path p);
};

using Attributes = std::vector<std::pair<std::string, std::string>>;

/// A parsed record: its geometry plus the textual description around it.
struct GeometryProfile {
  Geometry geometry;
  std::optional<std::string> uri;
  Attributes attributes;
};

struct SkipReport {
  std::size_t parse_error = 0;
  std::size_t unsupported_type = 0;
  std::size_t empty_geometry = 0;
  std::size_t invalid_geometry = 0;

  std::size_t total() const noexcept {
    return parse_error + unsupported_type + empty_geometry + invalid_geometry;
  }
  void count(SkipCause cause) noexcept;
};

/// Single-pass reader yielding valid profiles one at a time. Ids are the
/// 0-based positions among the yielded profiles; MULTI parts get their own
/// ids and share the record's URI. Corrupt records are skipped and counted.
class ProfileStream {
 public:
  explicit ProfileStream(const DatasetDescriptor& d);
  ~ProfileStream();
  ProfileStream(ProfileStream&&) noexcept;
  ProfileStream& operator=(ProfileStream&&) noexcept;

  std::optional<GeometryProfile> next();
  const SkipReport& skips() const noexcept { return skips_; }

 private:
  bool refill();
  bool refill_delimited();
  bool refill_geojson();

  DatasetDescriptor desc_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::deque<GeometryProfile> pending_;
  SkipReport skips_;
  GeometryId next_id_ = 0;

  struct GeoJsonState;
  std::unique_ptr<GeoJsonState> geojson_;
};

struct LoadedDataset {
  std::vector<GeometryProfile> profiles;
  SkipReport skips;

  /// Moves the geometries out, leaving URIs and attributes in place.
  Dataset take_geometries();
  /// Output label of record `id`: its URI when present, the id otherwise.
  std::string label(GeometryId id) const;
};

/// Eagerly reads a dataset. Throws IoFailure, FormatError, or
/// MemoryBudgetExceeded once the loaded geometries exceed `byte_budget`.
LoadedDataset read_dataset(const DatasetDescriptor& d,
                           std::size_t byte_budget = std::numeric_limits<std::size_t>::max());

/// Streams a dataset with one record (plus exploded MULTI parts) in flight.
ProfileStream stream_target(const DatasetDescriptor& d);

/// Number of records, counted without building geometries for delimited
/// formats. Used to choose the indexed side of memory-frugal algorithms.
std::size_t estimate_record_count(const DatasetDescriptor& d);

/// One output link: `source<TAB>relation<TAB>target<LF>`.
struct LinkTriple {
  std::string source;
  std::string relation;
  std::string target;

  friend bool operator==(const LinkTriple&, const LinkTriple&) = default;
  friend auto operator<=>(const LinkTriple&, const LinkTriple&) = default;
};

class LinkWriter {
 public:
  explicit LinkWriter(const std::filesystem::path& path);
  void write(const LinkTriple& t);
  std::size_t count() const noexcept { return count_; }
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t count_ = 0;
};

std::size_t write_links(std::span<const LinkTriple> links, const std::filesystem::path& path);

/// Reads a link file back (used by tests and the report tooling).
std::vector<LinkTriple> read_links(const std::filesystem::path& path);

/// Splits one delimited line honoring double-quoted fields.
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

}  // namespace geolink
