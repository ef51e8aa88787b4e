#include "dualmink/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dualmink {

namespace {

std::string fmt(double v, const char* spec = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

using Rgb = std::array<double, 3>;

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
}

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(std::lround(c[0])), int(std::lround(c[1])),
                int(std::lround(c[2])));
  return buf;
}

// Dark blue to yellow.
std::string sequential(double t) {
  static const Rgb lo{48, 18, 110}, mid{33, 145, 140}, hi{253, 231, 37};
  t = std::clamp(t, 0.0, 1.0);
  return hex(t < 0.5 ? mix(lo, mid, 2 * t) : mix(mid, hi, 2 * t - 1));
}

// Blue, white, red around zero.
std::string diverging(double t) {
  static const Rgb lo{33, 102, 172}, mid{247, 247, 247}, hi{178, 24, 43};
  t = std::clamp(t, -1.0, 1.0);
  return hex(t < 0 ? mix(mid, lo, -t) : mix(mid, hi, t));
}

void panel(std::ostringstream& os, const SphereGrid& g, const Field& v, double x0, double y0, const std::string& title,
           bool centered) {
  const int nlat = g.resolution().first, nlon = g.resolution().second;
  const double w = 360.0, hgt = 180.0;
  const double cw = w / nlon, ch = hgt / nlat;
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  const double span = centered ? std::max(std::abs(lo), std::abs(hi)) : hi - lo;
  os << "<g class=\"panel\">\n";
  os << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 - 8) << "\" font-size=\"13\">" << title << " [min "
     << fmt(lo, "%.4g") << ", max " << fmt(hi, "%.4g") << "]</text>\n";
  for (int i = 0; i < nlat; ++i) {
    for (int k = 0; k < nlon; ++k) {
      const double x = v(g.node_index(i, k));
      const std::string color =
          centered ? diverging(span > 0 ? x / span : 0.0) : sequential(span > 0 ? (x - lo) / span : 0.5);
      os << "<rect x=\"" << fmt(x0 + k * cw) << "\" y=\"" << fmt(y0 + i * ch) << "\" width=\"" << fmt(cw + 0.05)
         << "\" height=\"" << fmt(ch + 0.05) << "\" fill=\"" << color << "\"/>\n";
    }
  }
  os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(hgt)
     << "\" fill=\"none\" stroke=\"#333\"/>\n</g>\n";
}

}  // namespace

std::string boundary_svg(const SupportFunction& h) {
  if (h.dim() != 1) throw std::invalid_argument("boundary_svg: needs n = 1");
  const BodyGeometry geo = evaluate_geometry(h);
  const double extent = std::max(1.0, geo.rho.maxCoeff());
  const double size = 500.0, c = size / 2, scale = 0.9 * c / extent;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << ' ' << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"0\" y1=\"" << c << "\" x2=\"" << size << "\" y2=\"" << c << "\" stroke=\"#ccc\"/>\n";
  os << "<line x1=\"" << c << "\" y1=\"0\" x2=\"" << c << "\" y2=\"" << size << "\" stroke=\"#ccc\"/>\n";
  os << "<circle id=\"unit-circle\" cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << fmt(scale)
     << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n";
  os << "<path id=\"boundary\" fill=\"none\" stroke=\"#b2182b\" stroke-width=\"2\" d=\"";
  for (Index i = 0; i < geo.boundary.rows(); ++i) {
    os << (i ? " L" : "M") << fmt(c + scale * geo.boundary(i, 0)) << ',' << fmt(c - scale * geo.boundary(i, 1));
  }
  os << " Z\"/>\n";
  os << "<text x=\"10\" y=\"20\" font-size=\"13\">max |Dh| " << fmt(geo.rho.maxCoeff(), "%.6g") << ", min |Dh| "
     << fmt(geo.rho.minCoeff(), "%.6g") << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(const SupportFunction& h, const Field& density_error) {
  if (h.dim() != 2) throw std::invalid_argument("heatmap_svg: needs n = 2");
  if (density_error.size() != h.values().size()) throw std::invalid_argument("heatmap_svg: size mismatch");
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"240\" viewBox=\"0 0 800 240\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  panel(os, h.grid(), h.values(), 20, 40, "h", false);
  panel(os, h.grid(), density_error, 420, 40, "g/f - 1", true);
  os << "</svg>\n";
  return os.str();
}

}  // namespace dualmink
