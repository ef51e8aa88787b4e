#include "dualmink/modes.hpp"

#include <cmath>

namespace dualmink {

namespace {

double legendre_sup(int degree, int order) {
  double best = 0.0;
  constexpr int samples = 4000;
  for (int s = 0; s <= samples; ++s) {
    const double mu = -1.0 + 2.0 * s / samples;
    best = std::max(best, std::abs(std::assoc_legendre(unsigned(degree), unsigned(order), mu)));
  }
  return best;
}

}  // namespace

bool HarmonicMode::valid_for(int dim) const {
  if (degree < 0 || order < 0) return false;
  if (dim == 1) return order == 0 && !(sine && degree == 0);
  return order <= degree && !(sine && order == 0);
}

std::string HarmonicMode::str(int dim) const {
  if (dim == 1) {
    return std::string(sine ? "sin(" : "cos(") + std::to_string(degree) + "θ)";
  }
  return std::string(sine ? "Ys(" : "Yc(") + std::to_string(degree) + "," + std::to_string(order) + ")";
}

Field evaluate_mode(const SphereGrid& grid, const HarmonicMode& mode) {
  if (!mode.valid_for(grid.dim())) {
    throw std::invalid_argument("invalid mode " + mode.str(grid.dim()));
  }
  Field v(grid.size());
  if (grid.dim() == 1) {
    for (Index i = 0; i < grid.size(); ++i) {
      const double a = mode.degree * grid.angle(i);
      v(i) = mode.sine ? std::sin(a) : std::cos(a);
    }
  } else {
    const double scale = 1.0 / legendre_sup(mode.degree, mode.order);
    for (Index i = 0; i < grid.size(); ++i) {
      const double mu = grid.nodes()(i, 2);
      const double p = std::assoc_legendre(unsigned(mode.degree), unsigned(mode.order), mu);
      const double a = mode.order * grid.longitude(i);
      v(i) = scale * p * (mode.sine ? std::sin(a) : std::cos(a));
    }
  }
  return mode.even() ? project_even(grid, v) : v;
}

}  // namespace dualmink
