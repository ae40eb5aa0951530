#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace geoquant {

// Minimal SVG canvas for two-dimensional figures: a fixed viewport mapped
// from data coordinates, circles, point markers, and polylines.
class SvgCanvas {
 public:
  SvgCanvas(double xmin, double xmax, double ymin, double ymax, int pixels = 640);

  void add_circle(const Eigen::VectorXd& center, double radius,
                  const std::string& stroke, bool dashed = false);
  void add_dot(const Eigen::VectorXd& p, double pixel_radius, const std::string& fill);
  void add_polyline(const std::vector<Eigen::VectorXd>& points, const std::string& stroke,
                    bool closed = false, bool dashed = false);

  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  double px(double x) const;
  double py(double y) const;
  double scale(double r) const;

  double xmin_, xmax_, ymin_, ymax_;
  int pixels_;
  std::string body_;
};

}  // namespace geoquant
