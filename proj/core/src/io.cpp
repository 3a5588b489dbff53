#include "embres/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "embres/errors.hpp"
#include "json_convert.hpp"

namespace embres {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 16;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

template <class UInt>
UInt load_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
  return v;
}

template <class UInt>
void store_le(std::vector<unsigned char>& out, UInt v) {
  for (std::size_t b = 0; b < sizeof(UInt); ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::size_t width_of(CloudFormat f) {
  switch (f) {
    case CloudFormat::RawF32: return 4;
    case CloudFormat::RawF64: return 8;
    case CloudFormat::Csv: break;
  }
  fail(ErrorCode::InvalidArgument, "CSV is not a raw format");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

const char* to_string(CloudFormat f) noexcept {
  switch (f) {
    case CloudFormat::Csv: return "csv";
    case CloudFormat::RawF32: return "f32";
    case CloudFormat::RawF64: return "f64";
  }
  return "csv";
}

CloudFormat cloud_format_from_string(const std::string& name) {
  if (name == "csv" || name == "CSV") return CloudFormat::Csv;
  if (name == "f32" || name == "RawF32") return CloudFormat::RawF32;
  if (name == "f64" || name == "RawF64") return CloudFormat::RawF64;
  fail(ErrorCode::InvalidArgument, "unknown cloud format: " + name);
}

CloudFormat cloud_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return CloudFormat::Csv;
  if (ext == ".f32") return CloudFormat::RawF32;
  return CloudFormat::RawF64;
}

PointCloud parse_csv(std::string_view text) {
  std::vector<double> coords;
  std::vector<std::string> labels;
  std::size_t dim = 0;
  std::size_t row = 0;
  bool labelled = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    auto fields = split(line);
    if (row == 0) {
      double probe;
      labelled = !parse_double(fields.front(), probe);
      dim = fields.size() - (labelled ? 1 : 0);
      if (dim == 0) fail(ErrorCode::DimensionMismatch, "row 0 has no coordinates");
    }
    const std::size_t expected = dim + (labelled ? 1 : 0);
    if (fields.size() != expected)
      fail(ErrorCode::DimensionMismatch, "row " + std::to_string(row) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(expected));
    if (labelled) labels.emplace_back(trim(fields.front()));
    for (std::size_t c = 0; c < dim; ++c) {
      double v;
      if (!parse_double(fields[c + (labelled ? 1 : 0)], v))
        fail(ErrorCode::InvalidArgument, "row " + std::to_string(row) + ", col " + std::to_string(c) +
                                             ": not a number");
      if (!std::isfinite(v))
        fail(ErrorCode::NonFiniteValue, "row " + std::to_string(row) + ", col " + std::to_string(c));
      coords.push_back(v);
    }
    ++row;
  }
  if (row == 0) fail(ErrorCode::InvalidArgument, "CSV holds no rows");
  if (labelled) return PointCloud(dim, std::move(coords), std::move(labels));
  return PointCloud(dim, std::move(coords));
}

std::string to_csv(const PointCloud& cloud) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels()) {
      const auto& label = (*cloud.labels())[i];
      if (label.find_first_of(",\n") != std::string::npos)
        fail(ErrorCode::InvalidArgument, "label of row " + std::to_string(i) + " contains a separator");
      out += label;
      out += ',';
    }
    const auto p = cloud.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, p[k]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

PointCloud parse_raw(std::span<const unsigned char> bytes, CloudFormat format) {
  const std::size_t width = width_of(format);
  if (bytes.size() < kHeaderBytes)
    fail(ErrorCode::MalformedHeader, "header needs 16 bytes, got " + std::to_string(bytes.size()));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(ErrorCode::MalformedHeader, "bad magic (expected EMB1)");
  const std::uint64_t N = read_u32(bytes.data() + 4);
  const std::uint64_t n = read_u32(bytes.data() + 8);
  const std::uint32_t declared = read_u32(bytes.data() + 12);
  if (declared != 0 && declared != width)
    fail(ErrorCode::MalformedHeader, "element width " + std::to_string(declared) +
                                         " does not match format " + to_string(format));
  const std::uint64_t expected = N * n * width;
  const std::uint64_t actual = bytes.size() - kHeaderBytes;
  if (expected != actual)
    fail(ErrorCode::MalformedHeader, "payload length mismatch: expected " + std::to_string(expected) +
                                         " bytes, got " + std::to_string(actual));
  std::vector<double> coords(static_cast<std::size_t>(N * n));
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < coords.size(); ++i, p += width) {
    const double v = width == 4 ? static_cast<double>(std::bit_cast<float>(load_le<std::uint32_t>(p)))
                                : std::bit_cast<double>(load_le<std::uint64_t>(p));
    if (!std::isfinite(v))
      fail(ErrorCode::NonFiniteValue, "row " + std::to_string(i / n) + ", col " + std::to_string(i % n));
    coords[i] = v;
  }
  return PointCloud(static_cast<std::size_t>(n), std::move(coords));
}

std::vector<unsigned char> to_raw(const PointCloud& cloud, CloudFormat format) {
  const std::size_t width = width_of(format);
  if (cloud.size() > UINT32_MAX || cloud.dim() > UINT32_MAX)
    fail(ErrorCode::InvalidArgument, "cloud too large for a 32-bit header");
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(cloud.size()));
  put_u32(out, static_cast<std::uint32_t>(cloud.dim()));
  put_u32(out, static_cast<std::uint32_t>(width));
  out.reserve(kHeaderBytes + cloud.coords().size() * width);
  for (double v : cloud.coords()) {
    if (width == 4) {
      store_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      store_le(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  const std::string s = read_text(path);
  return {s.begin(), s.end()};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

PointCloud ingest(const std::filesystem::path& path, CloudFormat format) {
  if (format == CloudFormat::Csv) return parse_csv(read_text(path));
  const auto bytes = read_bytes(path);
  return parse_raw(bytes, format);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format) {
  if (format == CloudFormat::Csv) {
    write_text(path, to_csv(cloud));
    return;
  }
  const auto bytes = to_raw(cloud, format);
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

AggregatorSpec parse_aggregator(std::string_view json) {
  return detail::aggregator_from_json(detail::parse_json(json, "aggregator spec"));
}

AggregatorSpec load_aggregator(const std::filesystem::path& path) {
  return parse_aggregator(read_text(path));
}

std::string aggregator_to_json(const AggregatorSpec& spec) { return detail::to_json(spec).dump(2); }

SynthSpec parse_synth_spec(std::string_view json) {
  return detail::synth_spec_from_json(detail::parse_json(json, "synth spec"));
}

std::string synth_spec_to_json(const SynthSpec& spec) { return detail::to_json(spec).dump(2); }

std::string ground_truth_to_json(const GroundTruth& truth) { return detail::to_json(truth).dump(2); }

}  // namespace embres
