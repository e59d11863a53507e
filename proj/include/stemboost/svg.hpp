#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stemboost::svg {

// Minimal SVG builder; all coordinates are pixels, emitted with fixed
// precision so output bytes are stable across runs.
class Canvas {
 public:
  Canvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "", double stroke_width = 1.0);
  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double width = 1.0,
            bool dashed = false);
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double width = 1.5);
  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& fill, const std::string& stroke,
               double stroke_width = 1.0);
  // anchor: "start", "middle", or "end"
  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& anchor = "start", bool vertical = false);

  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
};

// Maps a data rectangle onto a pixel frame with margins and draws the axes.
class Plot {
 public:
  Plot(double width, double height, double x_min, double x_max, double y_min,
       double y_max);

  double px(double x) const;
  double py(double y) const;

  void draw_axes(Canvas& canvas, int x_ticks, int y_ticks,
                 const std::string& title, const std::string& x_label,
                 const std::string& y_label) const;

  double left() const { return left_; }
  double right() const { return width_ - margin_; }
  double top() const { return top_; }
  double bottom() const { return height_ - bottom_; }

 private:
  double width_;
  double height_;
  double x_min_, x_max_, y_min_, y_max_;
  double left_ = 64.0;
  double top_ = 34.0;
  double bottom_ = 46.0;
  double margin_ = 18.0;
};

// Short human-oriented tick label (4 significant digits).
std::string tick_label(double v);

// Linear interpolation between two hex colors, t in [0, 1].
std::string lerp_color(const std::string& from, const std::string& to,
                       double t);

}  // namespace stemboost::svg
