#include "sfmnav/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfmnav/error.hpp"

namespace sfmnav {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::string trajectory_svg(const EpisodeRecord& record) {
  if (record.trajectory.empty()) throw Error("cannot plot an empty trajectory");

  // Scene bounds in metres.
  double lo_x = -5.0, hi_x = 5.0, lo_y = -5.0, hi_y = 5.0;
  auto include = [&](const Vec2& p, double margin) {
    lo_x = std::min(lo_x, p.x - margin);
    hi_x = std::max(hi_x, p.x + margin);
    lo_y = std::min(lo_y, p.y - margin);
    hi_y = std::max(hi_y, p.y + margin);
  };
  for (const TrajectoryFrame& f : record.trajectory) {
    include(f.robot.position, f.robot.radius + 0.5);
    for (const AgentBody& e : f.entities) include(e.position, e.radius + 0.5);
  }
  include(record.trajectory.front().robot.goal, 0.5);

  const double scale = 60.0;  // pixels per metre
  const double width = (hi_x - lo_x) * scale;
  const double height = (hi_y - lo_y) * scale;
  auto px = [&](const Vec2& p) { return Vec2{(p.x - lo_x) * scale, (hi_y - p.y) * scale}; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<g transform=\"matrix(" << fmt(scale) << " 0 0 " << fmt(-scale) << ' ' << fmt(-lo_x * scale) << ' '
    << fmt(hi_y * scale) << ")\">\n";

  for (const SquareObstacle& o : record.obstacles) {
    const double h = o.side / 2.0;
    s << "<rect class=\"obstacle\" x=\"" << fmt(o.center.x - h) << "\" y=\"" << fmt(o.center.y - h)
      << "\" width=\"" << fmt(o.side) << "\" height=\"" << fmt(o.side)
      << "\" fill=\"#888888\" stroke=\"black\" stroke-width=\"0.02\"/>\n";
  }

  const TrajectoryFrame& last = record.trajectory.back();
  const std::size_t entity_count = last.entities.size();
  for (std::size_t e = 0; e < entity_count; ++e) {
    if (last.entities[e].kind != EntityKind::Human) continue;
    s << "<polyline class=\"human-path\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"0.03\" points=\"";
    for (std::size_t k = 0; k < record.trajectory.size(); ++k) {
      const Vec2& p = record.trajectory[k].entities[e].position;
      s << (k ? " " : "") << fmt(p.x) << ',' << fmt(p.y);
    }
    s << "\"/>\n";
  }
  for (const AgentBody& e : last.entities) {
    if (e.kind != EntityKind::Human) continue;
    s << "<circle class=\"human\" cx=\"" << fmt(e.position.x) << "\" cy=\"" << fmt(e.position.y) << "\" r=\""
      << fmt(e.radius) << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"0.03\"/>\n";
  }

  const Vec2 goal = record.trajectory.front().robot.goal;
  s << "<path class=\"goal\" d=\"M " << fmt(goal.x - 0.2) << ' ' << fmt(goal.y) << " L " << fmt(goal.x + 0.2) << ' '
    << fmt(goal.y) << " M " << fmt(goal.x) << ' ' << fmt(goal.y - 0.2) << " L " << fmt(goal.x) << ' '
    << fmt(goal.y + 0.2) << "\" stroke=\"red\" stroke-width=\"0.06\"/>\n";

  s << "<polyline class=\"robot-path\" fill=\"none\" stroke=\"#d4a017\" stroke-width=\"0.05\" points=\"";
  for (std::size_t k = 0; k < record.trajectory.size(); ++k) {
    const Vec2& p = record.trajectory[k].robot.position;
    s << (k ? " " : "") << fmt(p.x) << ',' << fmt(p.y);
  }
  s << "\"/>\n";
  s << "<circle class=\"robot\" cx=\"" << fmt(last.robot.position.x) << "\" cy=\"" << fmt(last.robot.position.y)
    << "\" r=\"" << fmt(last.robot.radius) << "\" fill=\"#f5d76e\" stroke=\"black\" stroke-width=\"0.03\"/>\n";

  // A tick at every whole second after the start.
  std::vector<std::pair<int, Vec2>> ticks;
  for (const TrajectoryFrame& f : record.trajectory) {
    const double whole = std::round(f.time);
    if (whole >= 1.0 && std::fabs(f.time - whole) < 1e-9) ticks.emplace_back(static_cast<int>(whole), f.robot.position);
  }
  for (const auto& [t, p] : ticks) {
    s << "<circle class=\"tick\" cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y)
      << "\" r=\"0.05\" fill=\"black\"/>\n";
  }
  s << "</g>\n";
  for (const auto& [t, p] : ticks) {
    const Vec2 q = px(p);
    s << "<text class=\"tick-label\" x=\"" << fmt(q.x + 6) << "\" y=\"" << fmt(q.y - 4)
      << "\" font-size=\"10\" font-family=\"sans-serif\">" << t << "</text>\n";
  }
  s << "<text x=\"8\" y=\"16\" font-size=\"12\" font-family=\"sans-serif\">env " << record.env_id << ", seed "
    << record.seed << ", " << to_string(record.outcome) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void plot_trajectory(const EpisodeRecord& record, const std::filesystem::path& path) {
  write_text(trajectory_svg(record), path);
}

std::vector<ValidationPoint> read_validation_points(const std::filesystem::path& log_path) {
  std::ifstream in(log_path);
  if (!in) throw Error("cannot open training log: " + log_path.string());
  std::vector<ValidationPoint> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("type")) throw Error("missing record type");
      if (j.at("type").get<std::string>() != "validation") continue;
      points.push_back({j.at("episode").get<int>(), j.at("success_rate").get<double>()});
    } catch (const std::exception& e) {
      throw Error(log_path.string() + ":" + std::to_string(line_no) + ": malformed log record: " + e.what());
    }
  }
  if (points.empty()) throw Error(log_path.string() + ": no validation records");
  return points;
}

std::string validation_svg(const std::vector<ValidationSeries>& series) {
  if (series.empty()) throw Error("no validation series to plot");
  int max_episode = 1;
  for (const ValidationSeries& v : series) {
    if (v.points.empty()) throw Error("validation series '" + v.label + "' is empty");
    for (const ValidationPoint& p : v.points) max_episode = std::max(max_episode, p.episode);
  }

  const double left = 60, right = 160, top = 20, bottom = 50;
  const double plot_w = 480, plot_h = 300;
  const double width = left + plot_w + right, height = top + plot_h + bottom;
  auto x_of = [&](int episode) { return left + plot_w * episode / max_episode; };
  auto y_of = [&](double rate) { return top + plot_h * (1.0 - rate); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect class=\"axes\" x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(plot_w)
    << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double rate = i / 5.0;
    s << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y_of(rate) + 4) << "\" text-anchor=\"end\">"
      << fmt(rate) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const int episode = max_episode * i / 4;
    s << "<text x=\"" << fmt(x_of(episode)) << "\" y=\"" << fmt(top + plot_h + 16) << "\" text-anchor=\"middle\">"
      << episode << "</text>\n";
  }
  s << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 10)
    << "\" text-anchor=\"middle\">episode</text>\n";
  s << "<text x=\"14\" y=\"" << fmt(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << fmt(top + plot_h / 2) << ")\">success rate</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const ValidationSeries& v = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    s << "<polyline class=\"series\" data-label=\"" << xml_escape(v.label) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < v.points.size(); ++i) {
      s << (i ? " " : "") << fmt(x_of(v.points[i].episode)) << ',' << fmt(y_of(v.points[i].success_rate));
    }
    s << "\"/>\n";
    for (const ValidationPoint& p : v.points) {
      s << "<circle class=\"point\" cx=\"" << fmt(x_of(p.episode)) << "\" cy=\"" << fmt(y_of(p.success_rate))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    s << "<line x1=\"" << fmt(left + plot_w + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
      << fmt(left + plot_w + 32) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text class=\"legend\" x=\"" << fmt(left + plot_w + 38) << "\" y=\"" << fmt(ly) << "\">" << xml_escape(v.label)
      << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void plot_validation_curve(const std::vector<ValidationSeries>& series, const std::filesystem::path& path) {
  write_text(validation_svg(series), path);
}

}  // namespace sfmnav
