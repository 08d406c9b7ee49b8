#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mppgeo::cli {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Bounds {
  Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void add(const Point2& p) {
    if (!p.allFinite()) return;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bool empty() const { return !(lo.x() <= hi.x()); }
};

}  // namespace

Panel& Figure::add_panel(std::string title) {
  panels_.push_back({});
  panels_.back().title = std::move(title);
  return panels_.back();
}

std::string Figure::render() const {
  const double margin = 36.0, header = 28.0;
  const double width = std::max<std::size_t>(panels_.size(), 1) * (size_ + margin) + margin;
  const double height = size_ + 2 * margin + header;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  o << "<text x=\"" << fmt(margin) << "\" y=\"20\" font-size=\"14\">" << escape(title_) << "</text>\n";

  for (std::size_t k = 0; k < panels_.size(); ++k) {
    const Panel& p = panels_[k];
    const double ox = margin + static_cast<double>(k) * (size_ + margin), oy = header + margin;
    Bounds b;
    for (const Polyline& l : p.lines)
      for (const Point2& q : l.points) b.add(q);
    for (const Marker& m : p.markers) b.add(m.at);
    if (b.empty()) b.add({0, 0});
    Point2 span = b.hi - b.lo;
    const double extent = std::max({span.x(), span.y(), 1e-9}) * 1.1;
    const Point2 center = 0.5 * (b.lo + b.hi);
    const double scale = size_ / extent;
    auto px = [&](const Point2& q) {
      return Point2(ox + size_ / 2 + (q.x() - center.x()) * scale, oy + size_ / 2 - (q.y() - center.y()) * scale);
    };

    o << "<g>\n";
    o << "<text x=\"" << fmt(ox) << "\" y=\"" << fmt(oy - 8) << "\" font-size=\"12\">" << escape(p.title)
      << "</text>\n";
    if (p.axes) {
      o << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(size_) << "\" height=\""
        << fmt(size_) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
      const double half = extent / 2;
      o << "<text x=\"" << fmt(ox) << "\" y=\"" << fmt(oy + size_ + 14) << "\" font-size=\"10\" fill=\"#777777\">"
        << label(center.x() - half) << "</text>\n";
      o << "<text x=\"" << fmt(ox + size_) << "\" y=\"" << fmt(oy + size_ + 14)
        << "\" font-size=\"10\" fill=\"#777777\" text-anchor=\"end\">" << label(center.x() + half) << "</text>\n";
      o << "<text x=\"" << fmt(ox - 4) << "\" y=\"" << fmt(oy + size_)
        << "\" font-size=\"10\" fill=\"#777777\" text-anchor=\"end\">" << label(center.y() - half) << "</text>\n";
      o << "<text x=\"" << fmt(ox - 4) << "\" y=\"" << fmt(oy + 10)
        << "\" font-size=\"10\" fill=\"#777777\" text-anchor=\"end\">" << label(center.y() + half) << "</text>\n";
    }
    for (const Polyline& l : p.lines) {
      if (l.points.size() < 2) continue;
      o << "<polyline fill=\"none\" stroke=\"" << l.style.color << "\" stroke-width=\"" << fmt(l.style.width) << '"';
      if (l.style.dashed) o << " stroke-dasharray=\"5,4\"";
      if (l.style.opacity < 1.0) o << " stroke-opacity=\"" << fmt(l.style.opacity) << '"';
      o << " points=\"";
      for (std::size_t i = 0; i < l.points.size(); ++i) {
        if (!l.points[i].allFinite()) continue;
        const Point2 q = px(l.points[i]);
        o << (i ? " " : "") << fmt(q.x()) << ',' << fmt(q.y());
      }
      o << "\"/>\n";
    }
    for (const Marker& m : p.markers) {
      const Point2 q = px(m.at);
      o << "<circle cx=\"" << fmt(q.x()) << "\" cy=\"" << fmt(q.y()) << "\" r=\"" << fmt(m.radius) << "\" fill=\""
        << m.color << "\"/>\n";
    }
    for (std::size_t i = 0; i < p.legend.size(); ++i) {
      const double y = oy + 14 + 14 * static_cast<double>(i);
      o << "<line x1=\"" << fmt(ox + 8) << "\" y1=\"" << fmt(y - 4) << "\" x2=\"" << fmt(ox + 24) << "\" y2=\""
        << fmt(y - 4) << "\" stroke=\"" << p.legend[i].color << "\" stroke-width=\"2\"/>\n";
      o << "<text x=\"" << fmt(ox + 28) << "\" y=\"" << fmt(y) << "\" font-size=\"10\">" << escape(p.legend[i].label)
        << "</text>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void Figure::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render();
}

Point2 project(double x, double y, double z) {
  const double az = 35.0 * M_PI / 180.0, el = 25.0 * M_PI / 180.0;
  const double sx = std::cos(az) * x - std::sin(az) * y;
  const double depth = std::sin(az) * x + std::cos(az) * y;
  return {sx, std::cos(el) * z + std::sin(el) * depth};
}

const std::string& palette::family(std::size_t i) {
  static const std::array<std::string, 8> colors{"#d62728", "#ff7f0e", "#bcbd22", "#2ca02c",
                                                 "#17becf", "#1f77b4", "#9467bd", "#e377c2"};
  return colors[i % colors.size()];
}

}  // namespace mppgeo::cli
