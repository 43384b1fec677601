#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace coreset_forge {

enum class Domain { euclidean, sphere, simplex };

inline std::string_view to_string(Domain d) noexcept {
  switch (d) {
  case Domain::euclidean: return "euclidean";
  case Domain::sphere: return "sphere";
  case Domain::simplex: return "simplex";
  }
  return "euclidean";
}

inline Domain parse_domain(std::string_view s) {
  if (s == "euclidean") return Domain::euclidean;
  if (s == "sphere") return Domain::sphere;
  if (s == "simplex") return Domain::simplex;
  throw ParamError("unknown domain '" + std::string(s) + "'");
}

/// Absolute tolerance for sphere / simplex membership.
inline constexpr double domain_tolerance = 1e-9;

using Point = std::vector<double>;
using PointView = std::span<const double>;

namespace detail {

inline double norm2(PointView x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double coordinate_sum(PointView x) noexcept {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

} // namespace detail

/// Membership check used by kernels and query search; no projection.
inline bool in_domain(Domain domain, PointView x, double tol = domain_tolerance) noexcept {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  switch (domain) {
  case Domain::euclidean: return true;
  case Domain::sphere: return std::abs(detail::norm2(x) - 1.0) <= tol;
  case Domain::simplex:
    for (double v : x)
      if (v < -tol) return false;
    return std::abs(detail::coordinate_sum(x) - 1.0) <= tol;
  }
  return false;
}

/// Nearest point of the domain. Sphere: radial scaling (origin maps to e_0).
/// Simplex: Euclidean projection by the sort-and-threshold rule.
inline void project_to_domain(Domain domain, std::span<double> x) {
  switch (domain) {
  case Domain::euclidean: return;
  case Domain::sphere: {
    const double n = detail::norm2(x);
    if (n == 0.0) {
      std::fill(x.begin(), x.end(), 0.0);
      x[0] = 1.0;
      return;
    }
    for (double& v : x) v /= n;
    return;
  }
  case Domain::simplex: {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      cumulative += sorted[k];
      const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
      if (sorted[k] - t > 0.0) theta = t;
    }
    for (double& v : x) v = std::max(v - theta, 0.0);
    return;
  }
  }
}

/// n points in R^d, row-major, validated against a domain at construction.
/// Inputs within tolerance of the sphere or simplex are projected onto it
/// once here; the stored coordinates are exact members from then on.
class DataSet {
public:
  DataSet(std::vector<double> coords, std::size_t dim, Domain domain, std::string id = {})
      : coords_(std::move(coords)), dim_(dim), domain_(domain), id_(std::move(id)) {
    if (dim_ == 0) throw FormatError("dataset dimension must be at least 1");
    if (coords_.empty()) throw FormatError("dataset must contain at least one point");
    if (coords_.size() % dim_ != 0)
      throw FormatError("coordinate count is not a multiple of the dimension");
    validate_and_project();
  }

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  Domain domain() const noexcept { return domain_; }
  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  PointView point(std::size_t i) const noexcept { return {coords_.data() + i * dim_, dim_}; }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Points at `indices`, in that order. No re-validation or re-projection.
  DataSet subset(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
      if (i >= size()) throw DimensionError("subset index out of range");
      const auto p = point(i);
      out.insert(out.end(), p.begin(), p.end());
    }
    if (out.empty()) throw SizeError("subset must be nonempty");
    return DataSet(std::move(out), dim_, domain_, id_, trusted{});
  }

  friend bool operator==(const DataSet&, const DataSet&) = default;

private:
  struct trusted {};
  DataSet(std::vector<double> coords, std::size_t dim, Domain domain, std::string id, trusted)
      : coords_(std::move(coords)), dim_(dim), domain_(domain), id_(std::move(id)) {}

  // Points already on the domain up to accumulated rounding are kept bit for
  // bit, so a save/load cycle never perturbs them.
  static double rounding_slack(std::size_t d) noexcept {
    return 4.0 * static_cast<double>(d + 1) * std::numeric_limits<double>::epsilon();
  }

  void validate_and_project() {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> p{coords_.data() + i * dim_, dim_};
      for (double v : p)
        if (!std::isfinite(v)) throw DomainError("non-finite coordinate", i);
      switch (domain_) {
      case Domain::euclidean: break;
      case Domain::sphere: {
        const double r = detail::norm2(p);
        if (std::abs(r - 1.0) > domain_tolerance)
          throw DomainError("point not on the unit sphere (norm " + format_real(r) + ")", i);
        if (std::abs(r - 1.0) > rounding_slack(dim_))
          for (double& v : p) v /= r;
        break;
      }
      case Domain::simplex: {
        for (double v : p)
          if (v < -domain_tolerance) throw DomainError("negative simplex coordinate", i);
        const double s = detail::coordinate_sum(p);
        if (std::abs(s - 1.0) > domain_tolerance)
          throw DomainError("simplex coordinates sum to " + format_real(s), i);
        double clamped = 0.0;
        for (double& v : p) clamped += (v = std::max(v, 0.0));
        if (std::abs(clamped - 1.0) > rounding_slack(dim_))
          for (double& v : p) v /= clamped;
        break;
      }
      }
    }
  }

  static std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  }

  std::vector<double> coords_;
  std::size_t dim_;
  Domain domain_;
  std::string id_;
};

// ---------------------------------------------------------------------------
// File formats

inline constexpr char binary_magic[4] = {'K', 'D', 'C', '1'};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::uint32_t read_u32_le(const unsigned char* p) noexcept {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_u32_le(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

inline std::string dataset_id_from_path(const std::filesystem::path& path) {
  return path.stem().string();
}

} // namespace detail

/// Parses the CSV format: header `x0,...,x{d-1}`, one point per row.
inline DataSet parse_csv(std::string_view text, Domain domain, std::string id = {}) {
  std::vector<double> coords;
  std::size_t dim = 0;
  std::size_t row = 0;
  bool have_header = false;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto fields = detail::split_commas(line);
    if (!have_header) {
      for (std::size_t k = 0; k < fields.size(); ++k)
        if (fields[k] != "x" + std::to_string(k))
          throw FormatError("CSV header must be x0,...,x{d-1}; got '" + std::string(fields[k]) + "'");
      dim = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != dim)
      throw FormatError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(dim));
    for (auto f : fields) {
      double v = 0.0;
      const auto* first = f.data();
      const auto* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last || f.empty())
        throw FormatError("non-numeric value '" + std::string(f) + "' in row " + std::to_string(row));
      coords.push_back(v);
    }
    ++row;
  }
  if (!have_header) throw FormatError("empty CSV");
  if (row == 0) throw FormatError("CSV contains no points");
  return DataSet(std::move(coords), dim, domain, std::move(id));
}

/// Parses the binary format: `KDC1`, u32 n, u32 d, n*d f64, all little-endian.
inline DataSet parse_binary(std::span<const unsigned char> bytes, Domain domain, std::string id = {}) {
  static_assert(std::endian::native == std::endian::little, "binary reader assumes little-endian host");
  if (bytes.size() < 12 || std::memcmp(bytes.data(), binary_magic, 4) != 0)
    throw FormatError("missing KDC1 magic");
  const std::uint32_t n = detail::read_u32_le(bytes.data() + 4);
  const std::uint32_t d = detail::read_u32_le(bytes.data() + 8);
  if (n == 0 || d == 0) throw FormatError("binary header declares an empty dataset");
  const std::uint64_t count = static_cast<std::uint64_t>(n) * d;
  if ((bytes.size() - 12) % 8 != 0 || count != (bytes.size() - 12) / 8)
    throw FormatError("binary payload size does not match header (" + std::to_string(n) + "x" +
                      std::to_string(d) + ")");
  std::vector<double> coords(count);
  std::memcpy(coords.data(), bytes.data() + 12, count * 8);
  return DataSet(std::move(coords), d, domain, std::move(id));
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

/// Loads CSV or binary; the format is sniffed from the magic bytes.
inline DataSet load_dataset(const std::filesystem::path& path, Domain domain) {
  const std::string bytes = read_file_bytes(path);
  auto id = detail::dataset_id_from_path(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), binary_magic, 4) == 0)
    return parse_binary({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()}, domain,
                        std::move(id));
  return parse_csv(bytes, domain, std::move(id));
}

inline std::string to_csv(const DataSet& ds) {
  std::ostringstream os;
  for (std::size_t k = 0; k < ds.dim(); ++k) os << (k ? "," : "") << 'x' << k;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = ds.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
    os << '\n';
  }
  return std::move(os).str();
}

inline std::string to_binary(const DataSet& ds) {
  if (ds.size() > std::numeric_limits<std::uint32_t>::max() ||
      ds.dim() > std::numeric_limits<std::uint32_t>::max())
    throw FormatError("dataset too large for the binary format");
  std::string out(binary_magic, 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(ds.size()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(ds.dim()));
  const auto c = ds.coords();
  out.append(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double));
  return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

enum class DataFormat { csv, binary };

inline void save_dataset(const DataSet& ds, const std::filesystem::path& path, DataFormat format) {
  write_text_file(path, format == DataFormat::csv ? to_csv(ds) : to_binary(ds));
}

} // namespace coreset_forge
