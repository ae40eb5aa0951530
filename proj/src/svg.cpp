#include "geoquant/svg.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace geoquant {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SvgCanvas::SvgCanvas(double xmin, double xmax, double ymin, double ymax, int pixels)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), pixels_(pixels) {
  if (!(xmax > xmin) || !(ymax > ymin)) {
    throw std::invalid_argument("svg viewport must have positive extent");
  }
}

double SvgCanvas::px(double x) const {
  return (x - xmin_) / (xmax_ - xmin_) * pixels_;
}

double SvgCanvas::py(double y) const {
  return (ymax_ - y) / (ymax_ - ymin_) * pixels_;  // y grows upward
}

double SvgCanvas::scale(double r) const { return r / (xmax_ - xmin_) * pixels_; }

void SvgCanvas::add_circle(const Eigen::VectorXd& center, double radius,
                           const std::string& stroke, bool dashed) {
  body_ += "<circle cx=\"" + num(px(center[0])) + "\" cy=\"" + num(py(center[1])) +
           "\" r=\"" + num(scale(radius)) + "\" fill=\"none\" stroke=\"" + stroke +
           "\"" + (dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
}

void SvgCanvas::add_dot(const Eigen::VectorXd& p, double pixel_radius,
                        const std::string& fill) {
  body_ += "<circle cx=\"" + num(px(p[0])) + "\" cy=\"" + num(py(p[1])) + "\" r=\"" +
           num(pixel_radius) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::add_polyline(const std::vector<Eigen::VectorXd>& points,
                             const std::string& stroke, bool closed, bool dashed) {
  if (points.empty()) return;
  std::string d = "M";
  for (const auto& p : points) {
    d += " " + num(px(p[0])) + "," + num(py(p[1]));
  }
  if (closed) d += " Z";
  body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + stroke + "\"" +
           (dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
}

std::string SvgCanvas::str() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(pixels_) + "\" height=\"" + std::to_string(pixels_) +
                    "\" viewBox=\"0 0 " + std::to_string(pixels_) + " " +
                    std::to_string(pixels_) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

void SvgCanvas::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg file '" + path + "'");
  out << str();
}

}  // namespace geoquant
