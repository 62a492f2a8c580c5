#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sfmnav/episode.hpp"

namespace sfmnav {

/// SVG scene: squares for obstacles, circles for agents at their final
/// positions, a goal marker and the robot path with a tick every second.
/// Coordinates inside the scene group are world metres (y up).
void plot_trajectory(const EpisodeRecord& record, const std::filesystem::path& path);
std::string trajectory_svg(const EpisodeRecord& record);

struct ValidationPoint {
  int episode = 0;
  double success_rate = 0.0;

  bool operator==(const ValidationPoint&) const = default;
};

/// Validation records of a training log. Throws Error naming the line on a
/// malformed record and Error when the log has no validation record.
std::vector<ValidationPoint> read_validation_points(const std::filesystem::path& log_path);

struct ValidationSeries {
  std::string label;
  std::vector<ValidationPoint> points;
};

/// Success rate against training episode, one labelled polyline per series.
void plot_validation_curve(const std::vector<ValidationSeries>& series, const std::filesystem::path& path);
std::string validation_svg(const std::vector<ValidationSeries>& series);

}  // namespace sfmnav
