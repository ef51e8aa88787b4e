// Convex bodies described by their support functions on a sphere grid:
// derived geometry, distances, normalization and closed-form reference bodies.
#ifndef DUALMINK_CONVEX_BODY_HPP
#define DUALMINK_CONVEX_BODY_HPP

#include "dualmink/document.hpp"
#include "dualmink/modes.hpp"
#include "dualmink/sphere_grid.hpp"

#include <vector>

namespace dualmink {

class NonConvexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Support function samples h(x_j) > 0. When even() is set the samples are
/// bit-identical at antipodal nodes.
class SupportFunction {
 public:
  SupportFunction(GridPtr grid, Field values, bool even);

  /// Projects onto even functions first.
  static SupportFunction make_even(GridPtr grid, const Field& values);

  const SphereGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Field& values() const { return values_; }
  bool even() const { return even_; }
  int dim() const { return grid_->dim(); }

 private:
  GridPtr grid_;
  Field values_;
  bool even_;
};

/// Everything the support function determines at each node.
struct BodyGeometry {
  Derivatives derivatives;           // grad h, Hessian h_ij, Laplacian
  Eigen::MatrixXd boundary;          // F = grad h + h x, one row per node
  Field rho;                         // |Dh| = sqrt(h^2 + |grad h|^2)
  std::vector<FrameMatrix> curvature;  // b_ij = h_ij + h delta_ij
  Field sigma1;                      // trace b = Laplacian h + n h
  Field sigma_n;                     // det b
  Field kappa;                       // 1 / sigma_n
  Eigen::MatrixXd radii;             // eigenvalues of b, ascending per row
  double min_radius = 0.0;
  bool valid = false;                // strictly convex at every node
};

BodyGeometry evaluate_geometry(const SupportFunction& h);
/// Same on raw samples; no positivity requirement (used on trial iterates).
BodyGeometry evaluate_geometry(const SphereGrid& grid, const Field& h);

struct RoundtripStats {
  double max_residual = 0.0;
  double rms_residual = 0.0;
};

/// Resamples |Dh| onto the grid as a radial function, rebuilds
/// h = rho^2 / sqrt(|grad rho|^2 + rho^2) and compares with h at the
/// corresponding normals. Throws NonConvexError on invalid geometry or a
/// non-injective normal map.
RoundtripStats radial_support_roundtrip(const SupportFunction& h);

/// ( mean over the sphere of |h1 - h2|^2 )^(1/2)
double l2_distance(const SupportFunction& h1, const SupportFunction& h2);
/// max |h1 - h2| over nodes
double hausdorff_distance(const SupportFunction& h1, const SupportFunction& h2);
/// max over nodes of H(x) + H(-x), H = max(h1, h2)
double diameter_union(const SupportFunction& h1, const SupportFunction& h2);

/// h / (mean of h)
SupportFunction normalize_body(const SupportFunction& h);

/// Unit ball (h = r) on the same grid.
SupportFunction ball_like(const SupportFunction& h, double r = 1.0);

struct AnalyticBody {
  enum class Kind { ball, ellipsoid, perturbed_ball };

  Kind kind = Kind::ball;
  double radius = 1.0;
  std::vector<double> axes;  // ellipsoid semi-axes, dim+1 of them
  double amplitude = 0.0;    // perturbed ball: 1 + amplitude * mode
  HarmonicMode mode;

  static AnalyticBody ball(double r);
  static AnalyticBody ellipsoid(std::vector<double> semi_axes);
  static AnalyticBody perturbed_ball(double amplitude, HarmonicMode mode);

  std::string str() const;
  bool operator==(const AnalyticBody&) const = default;
};

/// Samples the closed-form support function. Throws std::invalid_argument for
/// bad parameters and NonConvexError when a perturbation breaks convexity.
SupportFunction analytic_support(const AnalyticBody& body, GridPtr grid);

/// Writes / reads a [body] section: dim, resolution, scheme, even, values.
void write_body(Document& doc, const SupportFunction& h, const std::string& section = "body");
SupportFunction read_body(const Document& doc, const std::string& section = "body");

}  // namespace dualmink

#endif  // DUALMINK_CONVEX_BODY_HPP
