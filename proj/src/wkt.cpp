#include "geolink/wkt.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace geolink {

std::string_view skip_cause_name(SkipCause cause) noexcept {
  switch (cause) {
    case SkipCause::ParseError:
      return "parse_error";
    case SkipCause::UnsupportedType:
      return "unsupported_type";
    case SkipCause::EmptyGeometry:
      return "empty_geometry";
    case SkipCause::InvalidGeometry:
      return "invalid_geometry";
  }
  return "unknown";
}

namespace {

class WktReader {
 public:
  explicit WktReader(std::string_view text) : s_(text) {}

  std::vector<Geometry> parse() {
    const std::string type = keyword();
    if (type.empty()) fail("missing geometry type");
    skip_dimension_tag();
    if (type == "POINT" || type == "MULTIPOINT" || type == "GEOMETRYCOLLECTION") {
      throw WktError(SkipCause::UnsupportedType, "unsupported geometry type " + type);
    }
    std::vector<Geometry> out;
    if (type == "LINESTRING") {
      if (!empty_marker()) out.push_back(make_line(coordinate_list()));
    } else if (type == "POLYGON") {
      if (!empty_marker()) out.push_back(make_polygon(ring_list()));
    } else if (type == "MULTILINESTRING") {
      if (!empty_marker()) {
        expect('(');
        do {
          if (!empty_marker()) out.push_back(make_line(coordinate_list()));
        } while (accept(','));
        expect(')');
      }
    } else if (type == "MULTIPOLYGON") {
      if (!empty_marker()) {
        expect('(');
        do {
          if (!empty_marker()) out.push_back(make_polygon(ring_list()));
        } while (accept(','));
        expect(')');
      }
    } else {
      throw WktError(SkipCause::ParseError, "unknown geometry type " + type);
    }
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    if (out.empty()) throw WktError(SkipCause::EmptyGeometry, "empty geometry");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw WktError(SkipCause::ParseError, what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string keyword() {
    skip_ws();
    std::string word;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(s_[pos_]))));
      ++pos_;
    }
    return word;
  }

  void skip_dimension_tag() {
    const std::size_t save = pos_;
    const std::string tag = keyword();
    if (tag == "Z" || tag == "M" || tag == "ZM") return;
    if (tag == "EMPTY") {
      pos_ = save;
      return;
    }
    pos_ = save;
  }

  bool empty_marker() {
    const std::size_t save = pos_;
    if (keyword() == "EMPTY") return true;
    pos_ = save;
    return false;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  double number() {
    skip_ws();
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    if (begin < end && *begin == '+') ++begin;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  bool at_number() {
    skip_ws();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  std::vector<Coordinate> coordinate_list() {
    expect('(');
    std::vector<Coordinate> coords;
    do {
      Coordinate c;
      c.x = number();
      c.y = number();
      while (at_number()) number();  // Z and M ordinates
      if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
        throw WktError(SkipCause::InvalidGeometry, "non-finite coordinate");
      }
      coords.push_back(c);
    } while (accept(','));
    expect(')');
    return coords;
  }

  std::vector<std::vector<Coordinate>> ring_list() {
    expect('(');
    std::vector<std::vector<Coordinate>> rings;
    do {
      rings.push_back(coordinate_list());
    } while (accept(','));
    expect(')');
    return rings;
  }

  static Geometry make_line(std::vector<Coordinate> coords) {
    try {
      return Geometry::line_string(std::move(coords));
    } catch (const InvalidGeometry& e) {
      throw WktError(SkipCause::InvalidGeometry, e.what());
    }
  }

  static Geometry make_polygon(std::vector<std::vector<Coordinate>> rings) {
    try {
      return Geometry::polygon(std::move(rings));
    } catch (const InvalidGeometry& e) {
      throw WktError(SkipCause::InvalidGeometry, e.what());
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void append_coords(std::string& out, const std::vector<Coordinate>& coords) {
  out.push_back('(');
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i > 0) out.push_back(',');
    append_number(out, coords[i].x);
    out.push_back(' ');
    append_number(out, coords[i].y);
  }
  out.push_back(')');
}

}  // namespace

std::vector<Geometry> parse_wkt(std::string_view text) { return WktReader(text).parse(); }

std::string to_wkt(const Geometry& g) {
  std::string out;
  if (g.is_line()) {
    out = "LINESTRING";
    append_coords(out, g.rings().front());
    return out;
  }
  out = "POLYGON(";
  const auto& rings = g.rings();
  for (std::size_t r = 0; r < rings.size(); ++r) {
    if (r > 0) out.push_back(',');
    append_coords(out, rings[r]);
  }
  out.push_back(')');
  return out;
}

}  // namespace geolink
