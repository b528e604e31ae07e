#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kdx/point.hpp"
#include "kdx/tree.hpp"

// On-disk formats.
//
// Trees: the KDX1 binary format, little-endian throughout.
//   magic "KDX1" | variant u32 (0 interior, 1 bucket) | dim u32 | n u32 |
//   b u32 | node_count u32 | root u32 | node_count node records.
//   Node record: split_dim u32 (0xFFFFFFFF = leaf) | split_value f64 |
//   left u32 | right u32 (0xFFFFFFFF = none) | point_count u32 |
//   point_count x (id u32 | dim x f64).
// Round-tripping a tree through save/load reproduces the file bit-exactly.
//
// Point sets: a text format with an optional "# dim=<d>" header followed by
// one point per line, d comma-separated decimals; the 0-based data-line
// number is the point id. Coordinates are written with 17 significant
// digits, so parse(render(P)) == P exactly.

namespace kdx {

/// Thrown when a tree file is unreadable as KDX1 (bad magic, truncation,
/// inconsistent indices). The CLI maps this to exit code 3.
class TreeFileError : public std::runtime_error {
 public:
  explicit TreeFileError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on malformed text inputs (point files, coordinate lists). The CLI
/// maps this to exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    require(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  void bytes(char* out, std::size_t n) {
    require(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  void require(std::size_t n) const {
    if (pos_ + n > data_.size()) throw TreeFileError("KDX1: truncated file");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string encode_tree(const TreePool& pool, std::uint32_t variant) {
  std::string out;
  out.append("KDX1", 4);
  put_u32(out, variant);
  put_u32(out, static_cast<std::uint32_t>(pool.dim));
  put_u32(out, static_cast<std::uint32_t>(pool.point_count()));
  put_u32(out, pool.bucket_capacity);
  put_u32(out, static_cast<std::uint32_t>(pool.nodes.size()));
  put_u32(out, pool.root);
  for (const TreeNode& node : pool.nodes) {
    put_u32(out, node.split_dim);
    put_f64(out, node.split_value);
    put_u32(out, node.left);
    put_u32(out, node.right);
    put_u32(out, node.point_count);
    for (std::uint32_t slot = node.first_point;
         slot < node.first_point + node.point_count; ++slot) {
      put_u32(out, pool.ids[slot]);
      for (const double c : pool.point_coords(slot)) put_f64(out, c);
    }
  }
  return out;
}

inline TreePool decode_tree(std::string_view data, std::uint32_t& variant_out) {
  ByteReader reader(data);
  char magic[4];
  reader.bytes(magic, 4);
  if (std::memcmp(magic, "KDX1", 4) != 0)
    throw TreeFileError("KDX1: bad magic");
  const std::uint32_t variant = reader.u32();
  if (variant > 1) throw TreeFileError("KDX1: unknown variant tag");

  TreePool pool;
  pool.dim = reader.u32();
  const std::uint32_t n = reader.u32();
  pool.bucket_capacity = reader.u32();
  const std::uint32_t node_count = reader.u32();
  pool.root = reader.u32();
  if (pool.dim < 1) throw TreeFileError("KDX1: dimension must be >= 1");
  if (pool.root != kNoNode && pool.root >= node_count)
    throw TreeFileError("KDX1: root index out of range");
  if ((node_count == 0) != (n == 0))
    throw TreeFileError("KDX1: node/point count mismatch");

  pool.nodes.reserve(node_count);
  pool.coords.reserve(static_cast<std::size_t>(n) * pool.dim);
  pool.ids.reserve(n);
  for (std::uint32_t i = 0; i < node_count; ++i) {
    TreeNode node;
    node.split_dim = reader.u32();
    node.split_value = reader.f64();
    node.left = reader.u32();
    node.right = reader.u32();
    node.point_count = reader.u32();
    if (node.split_dim != kNoPlane && node.split_dim >= pool.dim)
      throw TreeFileError("KDX1: split dimension out of range");
    if ((node.left != kNoNode && node.left >= node_count) ||
        (node.right != kNoNode && node.right >= node_count))
      throw TreeFileError("KDX1: child index out of range");
    if (node.is_leaf() && node.point_count == 0)
      throw TreeFileError("KDX1: leaf without points");
    node.first_point = static_cast<std::uint32_t>(pool.ids.size());
    for (std::uint32_t j = 0; j < node.point_count; ++j) {
      pool.ids.push_back(reader.u32());
      for (std::size_t c = 0; c < pool.dim; ++c) pool.coords.push_back(reader.f64());
    }
    pool.nodes.push_back(node);
  }
  if (pool.ids.size() != n) throw TreeFileError("KDX1: point count mismatch");
  if (!reader.exhausted()) throw TreeFileError("KDX1: trailing bytes");
  variant_out = variant;
  return pool;
}

}  // namespace detail

inline void save_tree(std::ostream& out, const KdTree& tree) {
  const std::string bytes = detail::encode_tree(tree.pool(), 0);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void save_tree(std::ostream& out, const BucketTree& tree) {
  const std::string bytes = detail::encode_tree(tree.pool(), 1);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

using AnyTree = std::variant<KdTree, BucketTree>;

/// Loads either tree variant from a KDX1 stream. Throws TreeFileError on
/// anything that is not a well-formed KDX1 file.
inline AnyTree load_tree(std::istream& in) {
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::uint32_t variant = 0;
  detail::TreePool pool = detail::decode_tree(data, variant);
  if (variant == 0) return KdTree::from_pool(std::move(pool));
  return BucketTree::from_pool(std::move(pool));
}

inline AnyTree load_tree_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TreeFileError("cannot open tree file: " + path);
  return load_tree(in);
}

namespace detail {

inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view token) {
  // Leading/trailing whitespace is tolerated; anything else must parse.
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
    token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r'))
    token.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("malformed number: '" + std::string(token) + "'");
  return value;
}

}  // namespace detail

/// Parses a comma-separated coordinate list ("1.5,2,0.25").
inline std::vector<double> parse_coords(std::string_view line) {
  std::vector<double> coords;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view token = line.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    coords.push_back(detail::parse_double(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return coords;
}

/// Reads the point-file text format. The 0-based data-line number becomes
/// the point id; a "# dim=<d>" header fixes the dimension of an otherwise
/// empty file.
inline PointSet read_point_set(std::istream& in) {
  std::string line;
  bool saw_header = false;
  std::size_t header_dim = 0;
  std::vector<std::vector<double>> rows;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    std::string_view view = line;
    while (!view.empty() && (view.back() == '\r' || view.back() == ' '))
      view.remove_suffix(1);
    if (view.empty()) continue;
    if (first_content_line && view.starts_with("#")) {
      std::string_view rest = view.substr(1);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (!rest.starts_with("dim="))
        throw ParseError("point file: unrecognized header '" + std::string(view) + "'");
      rest.remove_prefix(4);
      std::size_t d = 0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), d);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || d < 1)
        throw ParseError("point file: bad dimension in header");
      saw_header = true;
      header_dim = d;
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    rows.push_back(parse_coords(view));
  }
  if (!saw_header && rows.empty())
    throw ParseError("point file: empty (need a header or at least one point)");

  const std::size_t dim = saw_header ? header_dim : rows.front().size();
  PointSet points(dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim)
      throw ParseError("point file: line " + std::to_string(i) + " has " +
                       std::to_string(rows[i].size()) + " coordinates, expected " +
                       std::to_string(dim));
    points.add(Point(std::move(rows[i]), static_cast<std::uint32_t>(i)));
  }
  return points;
}

inline PointSet read_point_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open point file: " + path);
  return read_point_set(in);
}

/// Writes the point-file text format with a header and 17-significant-digit
/// coordinates. Points are written in set order; ids are implied by line
/// number, so the set must carry ids 0..n-1 in order to round-trip exactly.
inline void write_point_set(std::ostream& out, const PointSet& points) {
  out << "# dim=" << points.dim() << "\n";
  for (const Point& p : points) {
    for (std::size_t c = 0; c < p.coords.size(); ++c) {
      if (c > 0) out << ',';
      out << detail::format_coord(p.coords[c]);
    }
    out << "\n";
  }
}

}  // namespace kdx
