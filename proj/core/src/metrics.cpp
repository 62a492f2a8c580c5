#include "sfmnav/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfmnav/error.hpp"

namespace sfmnav {

using json = nlohmann::ordered_json;

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double round4(double v) { return std::stod(fixed4(v)); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

MetricsReport aggregate(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw Error("aggregate: no episode records");

  int successes = 0;
  int collisions = 0;
  double nav_time_sum = 0.0;
  double reward_sum = 0.0;
  for (const EpisodeRecord& r : records) {
    if (r.outcome == Outcome::ReachedGoal) {
      ++successes;
      nav_time_sum += r.nav_time.value_or(0.0);
    } else if (r.outcome == Outcome::Collision) {
      ++collisions;
    }
    reward_sum += r.cumulative_reward;
  }

  const auto n = static_cast<double>(records.size());
  MetricsReport report;
  report.episode_count = static_cast<int>(records.size());
  report.success_rate = successes / n;
  report.collision_rate = collisions / n;
  if (successes > 0) report.avg_nav_time = nav_time_sum / successes;
  report.total_reward = reward_sum / n;
  return report;
}

ComparisonTable compare_versions(std::vector<ComparisonRow> reports) {
  if (reports.empty()) throw Error("compare_versions: no reports");
  return ComparisonTable{std::move(reports)};
}

std::string format_table(const ComparisonTable& table) {
  std::size_t width = 7;
  for (const ComparisonRow& row : table.rows) width = std::max(width, row.version.size());

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s | %12s | %14s | %15s | %12s | %8s\n", static_cast<int>(width), "Version",
                "Success Rate", "Collision Rate", "Navigation Time", "Total Reward", "Episodes");
  out << buf;
  out << std::string(width, '-') << "-+--------------+----------------+-----------------+--------------+---------\n";
  for (const ComparisonRow& row : table.rows) {
    const MetricsReport& r = row.report;
    const std::string nav = r.avg_nav_time ? fixed4(*r.avg_nav_time) : std::string("-");
    std::snprintf(buf, sizeof(buf), "%-*s | %12s | %14s | %15s | %12s | %8d\n", static_cast<int>(width),
                  row.version.c_str(), fixed4(r.success_rate).c_str(), fixed4(r.collision_rate).c_str(), nav.c_str(),
                  fixed4(r.total_reward).c_str(), r.episode_count);
    out << buf;
  }
  return out.str();
}

void write_table_csv(const ComparisonTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "version,success_rate,collision_rate,nav_time,total_reward,episodes\n";
  for (const ComparisonRow& row : table.rows) {
    if (row.version.find(',') != std::string::npos) throw Error("version label contains a comma: " + row.version);
    const MetricsReport& r = row.report;
    out << row.version << ',' << fixed4(r.success_rate) << ',' << fixed4(r.collision_rate) << ','
        << (r.avg_nav_time ? fixed4(*r.avg_nav_time) : std::string()) << ',' << fixed4(r.total_reward) << ','
        << r.episode_count << '\n';
  }
  if (!out) throw Error("failed writing table: " + path.string());
}

ComparisonTable read_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "version,success_rate,collision_rate,nav_time,total_reward,episodes") {
    throw Error("malformed table " + path.string() + " line 1: unexpected header");
  }
  ComparisonTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 6) throw Error("malformed table " + path.string() + " line " + std::to_string(line_no));
    try {
      ComparisonRow row;
      row.version = f[0];
      row.report.success_rate = std::stod(f[1]);
      row.report.collision_rate = std::stod(f[2]);
      if (!f[3].empty()) row.report.avg_nav_time = std::stod(f[3]);
      row.report.total_reward = std::stod(f[4]);
      row.report.episode_count = std::stoi(f[5]);
      table.rows.push_back(std::move(row));
    } catch (const std::logic_error&) {
      throw Error("malformed table " + path.string() + " line " + std::to_string(line_no));
    }
  }
  return table;
}

MetricsReport rounded_to_table_precision(const MetricsReport& report) {
  MetricsReport r = report;
  r.success_rate = round4(r.success_rate);
  r.collision_rate = round4(r.collision_rate);
  if (r.avg_nav_time) r.avg_nav_time = round4(*r.avg_nav_time);
  r.total_reward = round4(r.total_reward);
  return r;
}

void write_report_json(const std::string& version, const MetricsReport& report,
                       const std::filesystem::path& path) {
  json j;
  j["version"] = version;
  j["success_rate"] = report.success_rate;
  j["collision_rate"] = report.collision_rate;
  j["nav_time"] = report.avg_nav_time ? json(*report.avg_nav_time) : json(nullptr);
  j["total_reward"] = report.total_reward;
  j["episodes"] = report.episode_count;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

ComparisonRow read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report: " + path.string());
  try {
    const json j = json::parse(in);
    ComparisonRow row;
    row.version = j.at("version").get<std::string>();
    row.report.success_rate = j.at("success_rate").get<double>();
    row.report.collision_rate = j.at("collision_rate").get<double>();
    if (!j.at("nav_time").is_null()) row.report.avg_nav_time = j.at("nav_time").get<double>();
    row.report.total_reward = j.at("total_reward").get<double>();
    row.report.episode_count = j.at("episodes").get<int>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed report " + path.string() + ": " + e.what());
  }
}

}  // namespace sfmnav
