// Dual curvature density and numerical checks of the stability chain.
#ifndef DUALMINK_VERIFIER_HPP
#define DUALMINK_VERIFIER_HPP

#include "dualmink/convex_body.hpp"

#include <iosfwd>
#include <string>

namespace dualmink {

/// g = h sigma_n rho^(q-n-1) per node, with its extremes.
struct DualDensity {
  double q = 0.0;
  Field g;
  double max = 0.0;
  double min = 0.0;
  double ratio = 1.0;
};

/// Throws NonConvexError when the geometry is not strictly convex.
DualDensity dual_density(const BodyGeometry& geo, const Field& h, double q);
DualDensity dual_density(const SupportFunction& h, double q);

struct StabilityConstants {
  double c1 = 0.0;    // cap measure / (2 |S^n|)
  double beta = 0.0;  // 1 / (sqrt(n+1) c1)
};

StabilityConstants compute_beta(int dim);

/// lhs <= rhs + max(1e-10, 1e-8 |rhs|)
bool inequality_holds(double lhs, double rhs);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct StabilityReport {
  int dim = 0;
  double q = 0.0;
  bool q_in_range = true;  // n-3 <= q <= n+1
  double ratio = 1.0;      // M / m
  double epsilon = 0.0;    // M / m - 1
  double delta2 = 0.0;     // between the normalized body and B_1
  double delta_h = 0.0;
  double diameter = 0.0;   // of the union with B_1
  double c1 = 0.0;
  double beta = 0.0;
  double bound = 0.0;      // beta sqrt(epsilon)
  bool pass = false;       // delta2 <= bound + 1e-10
  InequalityCheck prop33;
  InequalityCheck gradient_step;  // (n+1+eps) int |grad h|^2 <= n eps int h^2
  InequalityCheck poincare;
  double schneider = 0.0;
};

/// Throws std::invalid_argument for a non-even body and NonConvexError for
/// invalid geometry. A q outside [n-3, n+1] is reported, not rejected.
StabilityReport check_stability(const SupportFunction& h, double q);

/// The test function is first made orthogonal to h sigma_n.
InequalityCheck check_spectral_inequality(const SupportFunction& h, const Field& f_test);
/// Same with the caller's orthogonalized function returned.
InequalityCheck check_spectral_inequality(const SupportFunction& h, const Field& f_test, Field* projected);

InequalityCheck check_X_alpha_inequality(const SupportFunction& h, double alpha);

InequalityCheck check_prop33(const SupportFunction& h, double q);

/// n int (u - mean u)^2 <= int |grad u|^2
InequalityCheck poincare_step(const SphereGrid& grid, const Field& u);

/// delta2^2 diam^n / deltaH^(n+2), +inf when deltaH = 0.
double check_schneider(const SupportFunction& h1, const SupportFunction& h2);

struct BoundsSummary {
  double min_h = 0.0;
  double max_h = 0.0;
  double max_grad = 0.0;
  double h_ratio = 1.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
};

BoundsSummary c0_c1_report(const SupportFunction& h);

/// Smooth random even test function with decaying coefficients.
Field random_even_field(const SphereGrid& grid, std::uint64_t seed, int max_degree = 8);

void write_report(Document& doc, const StabilityReport& r, const std::string& section = "stability");
void write_bounds(Document& doc, const BoundsSummary& b, const std::string& section = "bounds");
void write_density(Document& doc, const DualDensity& d, const std::string& section = "density");

/// Columns: index, then node coordinates, then g.
void write_density_csv(std::ostream& os, const SphereGrid& grid, const DualDensity& d);

}  // namespace dualmink

#endif  // DUALMINK_VERIFIER_HPP
