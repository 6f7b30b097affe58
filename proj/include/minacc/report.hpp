#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "minacc/classifiers.hpp"
#include "minacc/eval.hpp"

namespace minacc {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::filesystem::path data_path;
  std::vector<ClassifierKind> classifiers{kAllClassifiers.begin(), kAllClassifiers.end()};
  std::vector<double> fractions{0.5, 0.6, 0.7, 0.8};
  std::size_t rounds = 100;
  Phase phase = Phase::Original;
  std::uint64_t master_seed = 42;
  Hyperparams hp;
  bool stratified = false;
  std::filesystem::path output_dir = "results";
  OutputFormat format = OutputFormat::Json;

  void validate() const;
  ProtocolConfig protocol() const;

  bool operator==(const RunConfig&) const = default;
};

struct Report {
  int schema_version = kReportSchemaVersion;
  std::string tool_version = kToolVersion;
  std::optional<std::string> timestamp;
  std::string dataset_fingerprint;  // 16 hex digits
  std::size_t dataset_size = 0;
  RunConfig config;
  std::vector<RunSummary> summaries;
};

/// Accuracy fraction rendered as a percentage rounded to 8 decimals, the
/// precision the summary blocks use.
double percent8(double accuracy);

/// Rebuilds each summary from its per-trial records and checks every stored
/// statistic against the rebuild exactly. Throws Error on any mismatch.
void verify_report(const Report& report);

nlohmann::ordered_json to_json(const Report& report);

/// Parses an emitted report. Summaries are rebuilt from the per-trial
/// records, and the printed percentages must agree with the rebuild.
Report report_from_json(const nlohmann::json& doc);

std::string hex64(std::uint64_t value);

/// `<classifier>_<fraction>_<phase>.csv`, fraction with two decimals.
std::string trace_file_name(const RunSummary& summary);
inline constexpr const char* kAggregateFileName = "summary.csv";

/// Writes one trace CSV (trial_index,accuracy) per summary plus the
/// aggregate (classifier,fraction,phase,min,mean,max,perfect_count).
/// Accuracies are fractions in shortest round-trip form. Returns the paths
/// written, aggregate last.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<RunSummary>& summaries,
                                                  const std::filesystem::path& out_dir);

/// Shortest decimal text that parses back to `value`.
std::string format_double(double value);

}  // namespace minacc
