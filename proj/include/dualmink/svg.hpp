// Static SVG figures of solved bodies.
#ifndef DUALMINK_SVG_HPP
#define DUALMINK_SVG_HPP

#include "dualmink/convex_body.hpp"

#include <string>

namespace dualmink {

/// n=1: the boundary curve F = grad h + h x over the unit circle.
std::string boundary_svg(const SupportFunction& h);

/// n=2: longitude-latitude heat maps of h and of the relative density error.
std::string heatmap_svg(const SupportFunction& h, const Field& density_error);

}  // namespace dualmink

#endif  // DUALMINK_SVG_HPP
