#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfmnav/episode.hpp"

namespace sfmnav {

struct MetricsReport {
  double success_rate = 0.0;
  double collision_rate = 0.0;
  std::optional<double> avg_nav_time;  // mean over successful episodes only
  double total_reward = 0.0;           // mean cumulative reward over all episodes
  int episode_count = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws Error on an empty span.
MetricsReport aggregate(std::span<const EpisodeRecord> records);

struct ComparisonRow {
  std::string version;
  MetricsReport report;

  bool operator==(const ComparisonRow&) const = default;
};

/// Rows in the order given; a label may repeat (several runs of one version).
struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

ComparisonTable compare_versions(std::vector<ComparisonRow> reports);

/// Fixed-width text table with four-decimal rates and rewards.
std::string format_table(const ComparisonTable& table);

/// CSV with header `version,success_rate,collision_rate,nav_time,total_reward,episodes`,
/// values printed with four decimals (nav_time empty when absent).
void write_table_csv(const ComparisonTable& table, const std::filesystem::path& path);
ComparisonTable read_table_csv(const std::filesystem::path& path);

/// Rounds every real field to four decimals, the precision of the CSV export.
MetricsReport rounded_to_table_precision(const MetricsReport& report);

/// Single-report JSON written by `evaluate` and read by `compare`.
void write_report_json(const std::string& version, const MetricsReport& report,
                       const std::filesystem::path& path);
ComparisonRow read_report_json(const std::filesystem::path& path);

}  // namespace sfmnav
