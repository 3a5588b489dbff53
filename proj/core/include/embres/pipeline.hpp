#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "embres/blowup.hpp"
#include "embres/context_map.hpp"
#include "embres/dimension.hpp"
#include "embres/io.hpp"
#include "embres/range_index.hpp"
#include "embres/singularity.hpp"
#include "embres/synth.hpp"
#include "embres/tangent_cone.hpp"

namespace embres {

inline constexpr const char* kToolName = "embres";
inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr int kReportSchemaVersion = 1;

enum class Subcommand { Synth, Detect, Blowup, VerifyTheorem1, ContextMap, Report };

const char* to_string(Subcommand s) noexcept;
Subcommand subcommand_from_string(const std::string& name);

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitTheorem = 3 };

struct RunConfig {
  Subcommand subcommand = Subcommand::Detect;
  std::vector<std::string> inputs;
  std::optional<CloudFormat> input_format;  // unset: from the file extension
  std::string out_dir = "embres-out";
  SingularityParams params;
  ClusterOptions cone;
  std::optional<double> r_loc;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;

  std::vector<std::size_t> centers;      // blowup / verify: explicit centre rows
  std::size_t max_centers = 4;           // otherwise the strongest detected points
  std::vector<std::size_t> profile_ids;  // extra profiles to emit
  std::size_t max_profiles = 64;
  std::size_t dense_divisor = 0;

  std::optional<SynthSpec> synth;
  CloudFormat output_format = CloudFormat::Csv;

  std::string contexts;    // context-map: queries file
  std::string aggregator;  // context-map: aggregator file; empty means Mean

  bool operator==(const RunConfig&) const = default;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view json);

struct PointAnalysisOptions {
  ClusterOptions cone;
  std::optional<double> r_loc;
  std::optional<double> lambda;
  std::size_t dense_divisor = 0;
  std::uint64_t seed = 3;
  bool estimate_cluster_dims = true;
};

/// Tangent cone, blow-up and regularization check at one cloud point.
struct SingularPointAnalysis {
  std::size_t center_id = 0;
  DimensionProfile center_profile;
  PointVerdict center_verdict;
  double r_loc = 0.0;
  TangentConeEstimate cone;
  BlownUpCloud blownup;
  IsomorphismReport isomorphism;
  RegularizationReport regularization;
  // All exceptional points pass and each has lower variation than the centre.
  bool theorem_holds = false;
};

SingularPointAnalysis analyze_singular_point(const PointCloud& cloud, const RangeIndex& index,
                                             std::size_t center_id,
                                             const SingularityParams& resolved,
                                             const PointAnalysisOptions& options,
                                             std::size_t threads = 1);

struct ProfileArtifact {
  std::string name;  // file stem
  DimensionProfile profile;
};

struct ExtraFile {
  std::string name;  // relative to the output directory
  std::string contents;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string report_json;  // full report, timing included
  std::vector<ProfileArtifact> profiles;
  std::vector<ExtraFile> files;
  std::string summary;
};

/// Executes one subcommand. Validation problems raise embres::Error.
RunResult run(const RunConfig& config);

/// Writes report.json, profiles/<name>.csv and extra files under out_dir.
void emit_report(const RunResult& result, const std::filesystem::path& out_dir);

/// Profile as CSV with columns r,V,dim (dim empty where undefined).
std::string profile_csv(const DimensionProfile& profile);

/// Report text with the top-level "timing" member removed.
std::string strip_timing(const std::string& report_json);

}  // namespace embres
