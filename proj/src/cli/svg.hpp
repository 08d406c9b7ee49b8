#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mppgeo::cli {

using Point2 = Eigen::Vector2d;

struct Style {
  std::string color = "#000000";
  double width = 1.5;
  bool dashed = false;
  double opacity = 1.0;
};

struct Polyline {
  std::vector<Point2> points;
  Style style;
};

struct Marker {
  Point2 at;
  std::string color;
  double radius = 3.5;
};

struct LegendEntry {
  std::string label;
  std::string color;
};

/// One square plot area; data coordinates are fitted with equal aspect.
struct Panel {
  std::string title;
  std::vector<Polyline> lines;
  std::vector<Marker> markers;
  std::vector<LegendEntry> legend;
  /// Draw the bounding frame and extent labels.
  bool axes = true;

  void line(std::vector<Point2> pts, Style style) { lines.push_back({std::move(pts), std::move(style)}); }
};

/// Horizontal row of panels rendered as a standalone SVG document.
class Figure {
 public:
  explicit Figure(std::string title, double panel_size = 360.0) : title_(std::move(title)), size_(panel_size) {}

  Panel& add_panel(std::string title);
  Panel& panel(std::size_t i) { return panels_.at(i); }
  std::string render() const;
  void save(const std::string& path) const;

 private:
  std::string title_;
  double size_;
  std::vector<Panel> panels_;
};

/// Fixed orthographic view of ambient R³ (azimuth 35°, elevation 25°).
Point2 project(double x, double y, double z);

namespace palette {
inline const std::string kMpp = "#d62728";
inline const std::string kGeodesic = "#1f77b4";
inline const std::string kSource = "#2ca02c";
inline const std::string kTarget = "#d62728";
inline const std::string kGrid = "#b0b0b0";
inline const std::string kData = "#555555";
/// Distinct colors for sweep members, cycled.
const std::string& family(std::size_t i);
}  // namespace palette

}  // namespace mppgeo::cli
