// Trigonometric modes on the circle and real spherical harmonics on S^2,
// used for perturbations and right-hand sides.
#ifndef DUALMINK_MODES_HPP
#define DUALMINK_MODES_HPP

#include "dualmink/sphere_grid.hpp"

#include <string>

namespace dualmink {

/// n=1: cos(k theta) or sin(k theta).
/// n=2: P_k^m(cos theta) cos(m phi) or sin(m phi), scaled to unit sup-norm.
struct HarmonicMode {
  int degree = 0;
  int order = 0;
  bool sine = false;

  /// Antipodal parity is (-1)^degree.
  bool even() const { return degree % 2 == 0; }
  bool valid_for(int dim) const;
  std::string str(int dim) const;

  bool operator==(const HarmonicMode&) const = default;
};

/// Samples the mode at every node; even modes are projected so the result is
/// exactly even.
Field evaluate_mode(const SphereGrid& grid, const HarmonicMode& mode);

}  // namespace dualmink

#endif  // DUALMINK_MODES_HPP
