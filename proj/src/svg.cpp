#include "stemboost/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stemboost::svg {

namespace {

std::string px_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Canvas::Canvas(double width, double height) : width_(width), height_(height) {}

void Canvas::rect(double x, double y, double w, double h,
                  const std::string& fill, const std::string& stroke,
                  double stroke_width) {
  body_ += "<rect x=\"" + px_str(x) + "\" y=\"" + px_str(y) + "\" width=\"" +
           px_str(w) + "\" height=\"" + px_str(h) + "\" fill=\"" + fill + "\"";
  if (!stroke.empty())
    body_ += " stroke=\"" + stroke + "\" stroke-width=\"" +
             px_str(stroke_width) + "\"";
  body_ += "/>\n";
}

void Canvas::line(double x1, double y1, double x2, double y2,
                  const std::string& stroke, double width, bool dashed) {
  body_ += "<line x1=\"" + px_str(x1) + "\" y1=\"" + px_str(y1) + "\" x2=\"" +
           px_str(x2) + "\" y2=\"" + px_str(y2) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + px_str(width) + "\"";
  if (dashed) body_ += " stroke-dasharray=\"4 3\"";
  body_ += "/>\n";
}

void Canvas::polyline(const std::vector<std::pair<double, double>>& pts,
                      const std::string& stroke, double width) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke +
           "\" stroke-width=\"" + px_str(width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += px_str(pts[i].first) + "," + px_str(pts[i].second);
  }
  body_ += "\"/>\n";
}

void Canvas::polygon(const std::vector<std::pair<double, double>>& pts,
                     const std::string& fill, const std::string& stroke,
                     double stroke_width) {
  body_ += "<polygon fill=\"" + fill + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + px_str(stroke_width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += px_str(pts[i].first) + "," + px_str(pts[i].second);
  }
  body_ += "\"/>\n";
}

void Canvas::text(double x, double y, const std::string& content, double size,
                  const std::string& anchor, bool vertical) {
  body_ += "<text x=\"" + px_str(x) + "\" y=\"" + px_str(y) +
           "\" font-family=\"sans-serif\" font-size=\"" + px_str(size) +
           "\" text-anchor=\"" + anchor + "\"";
  if (vertical)
    body_ +=
        " transform=\"rotate(-90 " + px_str(x) + " " + px_str(y) + ")\"";
  body_ += ">" + escape(content) + "</text>\n";
}

std::string Canvas::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         px_str(width_) + "\" height=\"" + px_str(height_) +
         "\" viewBox=\"0 0 " + px_str(width_) + " " + px_str(height_) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         body_ + "</svg>\n";
}

Plot::Plot(double width, double height, double x_min, double x_max,
           double y_min, double y_max)
    : width_(width),
      height_(height),
      x_min_(x_min),
      x_max_(x_max),
      y_min_(y_min),
      y_max_(y_max) {
  if (x_max_ <= x_min_) x_max_ = x_min_ + 1.0;
  if (y_max_ <= y_min_) y_max_ = y_min_ + 1.0;
}

double Plot::px(double x) const {
  return left_ + (x - x_min_) / (x_max_ - x_min_) * (right() - left_);
}

double Plot::py(double y) const {
  return bottom() - (y - y_min_) / (y_max_ - y_min_) * (bottom() - top_);
}

void Plot::draw_axes(Canvas& canvas, int x_ticks, int y_ticks,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label) const {
  canvas.line(left_, bottom(), right(), bottom(), "#333333");
  canvas.line(left_, top_, left_, bottom(), "#333333");
  for (int t = 0; t < x_ticks; ++t) {
    const double v =
        x_min_ + (x_max_ - x_min_) * t / std::max(1, x_ticks - 1);
    const double x = px(v);
    canvas.line(x, bottom(), x, bottom() + 4, "#333333");
    canvas.text(x, bottom() + 17, tick_label(v), 10, "middle");
  }
  for (int t = 0; t < y_ticks; ++t) {
    const double v =
        y_min_ + (y_max_ - y_min_) * t / std::max(1, y_ticks - 1);
    const double y = py(v);
    canvas.line(left_ - 4, y, left_, y, "#333333");
    canvas.text(left_ - 7, y + 3.5, tick_label(v), 10, "end");
  }
  if (!title.empty())
    canvas.text((left_ + right()) / 2, top_ - 12, title, 13, "middle");
  if (!x_label.empty())
    canvas.text((left_ + right()) / 2, bottom() + 36, x_label, 11, "middle");
  if (!y_label.empty())
    canvas.text(left_ - 44, (top_ + bottom()) / 2, y_label, 11, "middle",
                true);
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return std::string(buf);
}

std::string lerp_color(const std::string& from, const std::string& to,
                       double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto channel = [&](int offset) {
    const int a = std::stoi(from.substr(static_cast<std::size_t>(offset), 2),
                            nullptr, 16);
    const int b =
        std::stoi(to.substr(static_cast<std::size_t>(offset), 2), nullptr, 16);
    return a + static_cast<int>(std::lround(t * (b - a)));
  };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(1), channel(3),
                channel(5));
  return std::string(buf);
}

}  // namespace stemboost::svg
