#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embres/context_map.hpp"
#include "embres/point_cloud.hpp"
#include "embres/synth.hpp"

namespace embres {

/// Csv: one point per line, comma separated, optional leading label column.
/// RawF32 / RawF64: 16-byte little-endian header
///   bytes 0-3   magic "EMB1"
///   bytes 4-7   u32 N (rows)
///   bytes 8-11  u32 n (columns)
///   bytes 12-15 u32 element width in bytes (4 or 8; 0 accepted as unspecified)
/// followed by N*n little-endian IEEE floats, row-major.
enum class CloudFormat { Csv, RawF32, RawF64 };

const char* to_string(CloudFormat f) noexcept;
CloudFormat cloud_format_from_string(const std::string& name);
/// ".csv" -> Csv, ".f32" -> RawF32, anything else -> RawF64 for ".f64"/".emb".
CloudFormat cloud_format_from_path(const std::filesystem::path& path);

PointCloud parse_csv(std::string_view text);
std::string to_csv(const PointCloud& cloud);

PointCloud parse_raw(std::span<const unsigned char> bytes, CloudFormat format);
std::vector<unsigned char> to_raw(const PointCloud& cloud, CloudFormat format);

PointCloud ingest(const std::filesystem::path& path, CloudFormat format);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format);

/// {"kind": "Mean"} or {"kind": "SoftmaxAttention", "q": [...], "tau": t}.
AggregatorSpec parse_aggregator(std::string_view json);
AggregatorSpec load_aggregator(const std::filesystem::path& path);
std::string aggregator_to_json(const AggregatorSpec& spec);

SynthSpec parse_synth_spec(std::string_view json);
std::string synth_spec_to_json(const SynthSpec& spec);
std::string ground_truth_to_json(const GroundTruth& truth);

std::string read_text(const std::filesystem::path& path);
std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace embres
