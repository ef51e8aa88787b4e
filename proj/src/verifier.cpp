#include "dualmink/verifier.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace dualmink {

namespace {

BodyGeometry require_convex(const SupportFunction& h) {
  BodyGeometry geo = evaluate_geometry(h);
  if (!geo.valid) throw NonConvexError("body is not strictly convex (min radius " + format_real(geo.min_radius) + ")");
  return geo;
}

double dot_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Index i) { return a.row(i).dot(b.row(i)); }

Field squared_gradient(const Derivatives& d) { return d.gradient.rowwise().squaredNorm(); }

}  // namespace

DualDensity dual_density(const BodyGeometry& geo, const Field& h, double q) {
  if (!geo.valid) throw NonConvexError("dual density needs a strictly convex body");
  if (h.minCoeff() <= 0.0) throw NonConvexError("dual density needs h > 0");
  const int n = static_cast<int>(geo.derivatives.gradient.cols());
  DualDensity d;
  d.q = q;
  d.g = (h.array() * geo.sigma_n.array() * geo.rho.array().pow(q - (n + 1))).matrix();
  d.max = d.g.maxCoeff();
  d.min = d.g.minCoeff();
  d.ratio = d.max / d.min;
  return d;
}

DualDensity dual_density(const SupportFunction& h, double q) {
  return dual_density(evaluate_geometry(h), h.values(), q);
}

StabilityConstants compute_beta(int dim) {
  // Cap {<x,w> >= 1/2}: arc of length 2 pi/3 on the circle, area pi on S^2.
  StabilityConstants c;
  if (dim == 1) {
    c.c1 = (2.0 * kPi / 3.0) / (2.0 * 2.0 * kPi);
  } else if (dim == 2) {
    c.c1 = kPi / (2.0 * 4.0 * kPi);
  } else {
    throw std::invalid_argument("compute_beta: dimension must be 1 or 2");
  }
  c.beta = 1.0 / (std::sqrt(dim + 1.0) * c.c1);
  return c;
}

bool inequality_holds(double lhs, double rhs) {
  return lhs <= rhs + std::max(1e-10, 1e-8 * std::abs(rhs));
}

InequalityCheck poincare_step(const SphereGrid& grid, const Field& u) {
  const Field centered = u.array() - sphere_mean(grid, u);
  InequalityCheck c;
  c.lhs = grid.dim() * integrate(grid, centered.array().square().matrix());
  c.rhs = integrate(grid, squared_gradient(grid.differentiate(u)));
  c.pass = inequality_holds(c.lhs, c.rhs);
  return c;
}

InequalityCheck check_prop33(const SupportFunction& h, double q) {
  const BodyGeometry geo = require_convex(h);
  const SphereGrid& g = h.grid();
  const DualDensity d = dual_density(geo, h.values(), q);
  InequalityCheck c;
  c.lhs = g.dim() * integrate(g, geo.rho.array().square().matrix());
  c.rhs = d.ratio * integrate(g, (h.values().array() * geo.sigma1.array()).matrix());
  c.pass = inequality_holds(c.lhs, c.rhs);
  return c;
}

StabilityReport check_stability(const SupportFunction& h, double q) {
  if (!h.even() && !is_even(h.grid(), h.values())) {
    throw std::invalid_argument("check_stability: the body must be origin-symmetric (even h)");
  }
  const SphereGrid& g = h.grid();
  const int n = g.dim();
  const BodyGeometry geo = require_convex(h);
  const DualDensity d = dual_density(geo, h.values(), q);
  const StabilityConstants k = compute_beta(n);

  StabilityReport r;
  r.dim = n;
  r.q = q;
  r.q_in_range = q >= n - 3.0 && q <= n + 1.0;
  r.ratio = d.ratio;
  r.epsilon = d.ratio - 1.0;
  const SupportFunction bar = normalize_body(SupportFunction(h.grid_ptr(), h.values(), true));
  const SupportFunction ball = ball_like(bar);
  r.delta2 = l2_distance(bar, ball);
  r.delta_h = hausdorff_distance(bar, ball);
  r.diameter = diameter_union(bar, ball);
  r.c1 = k.c1;
  r.beta = k.beta;
  r.bound = k.beta * std::sqrt(std::max(r.epsilon, 0.0));
  r.pass = r.delta2 <= r.bound + 1e-10;

  r.prop33 = check_prop33(h, q);
  const double grad2 = integrate(g, squared_gradient(geo.derivatives));
  r.gradient_step.lhs = (n + 1 + r.epsilon) * grad2;
  r.gradient_step.rhs = n * r.epsilon * integrate(g, h.values().array().square().matrix());
  r.gradient_step.pass = inequality_holds(r.gradient_step.lhs, r.gradient_step.rhs);
  r.poincare = poincare_step(g, h.values());
  r.schneider = check_schneider(bar, ball);
  return r;
}

InequalityCheck check_spectral_inequality(const SupportFunction& h, const Field& f_test) {
  return check_spectral_inequality(h, f_test, nullptr);
}

InequalityCheck check_spectral_inequality(const SupportFunction& h, const Field& f_test, Field* projected) {
  const SphereGrid& g = h.grid();
  if (f_test.size() != g.size()) throw std::invalid_argument("check_spectral_inequality: test function size mismatch");
  const BodyGeometry geo = require_convex(h);
  const Field w = (h.values().array() * geo.sigma_n.array()).matrix();
  const Field f = f_test.array() - integrate(g, (f_test.array() * w.array()).matrix()) / integrate(g, w);
  const Derivatives df = g.differentiate(f);

  Field energy(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const FrameVector grad = df.gradient_at(i);
    const FrameMatrix inv = geo.curvature[std::size_t(i)].inverse();
    const double hi = h.values()(i);
    energy(i) = hi * hi * geo.sigma_n(i) * grad.dot(inv * grad);
  }
  InequalityCheck c;
  c.lhs = g.dim() * integrate(g, (f.array().square() * w.array()).matrix());
  c.rhs = integrate(g, energy);
  c.pass = inequality_holds(c.lhs, c.rhs);
  if (projected) *projected = f;
  return c;
}

InequalityCheck check_X_alpha_inequality(const SupportFunction& h, double alpha) {
  const SphereGrid& g = h.grid();
  const int n = g.dim();
  const BodyGeometry geo = require_convex(h);
  const Field& hv = h.values();
  // |X| >= h > 0, so every power of |X| below is finite.
  if (geo.rho.minCoeff() <= 0.0) throw NonConvexError("|X| vanished");
  const Field dv = (hv.array() * geo.sigma_n.array()).matrix();
  const Derivatives drho = g.differentiate(geo.rho);
  const auto rho = geo.rho.array();

  const double volume = integrate(g, dv);
  SpaceVector moment(n + 1);
  const Field weight = (rho.pow(alpha / 2.0) * dv.array()).matrix();
  for (int k = 0; k <= n; ++k) moment(k) = integrate(g, (weight.array() * geo.boundary.col(k).array()).matrix());

  Field cross(g.size());
  for (Index i = 0; i < g.size(); ++i) cross(i) = dot_rows(geo.derivatives.gradient, drho.gradient, i);

  InequalityCheck c;
  c.lhs = n * integrate(g, (rho.pow(alpha + 2.0) * dv.array()).matrix());
  c.rhs = n * moment.squaredNorm() / volume +
          integrate(g, (rho.pow(alpha) * hv.array() * geo.sigma1.array() * dv.array()).matrix()) +
          (alpha * alpha / 4.0 + alpha) *
              integrate(g, (rho.pow(alpha - 1.0) * hv.array() * cross.array() * dv.array()).matrix());
  c.pass = inequality_holds(c.lhs, c.rhs);
  return c;
}

double check_schneider(const SupportFunction& h1, const SupportFunction& h2) {
  const double dh = hausdorff_distance(h1, h2);
  if (dh == 0.0) return std::numeric_limits<double>::infinity();
  const int n = h1.dim();
  const double d2 = l2_distance(h1, h2);
  return d2 * d2 * std::pow(diameter_union(h1, h2), n) / std::pow(dh, n + 2);
}

BoundsSummary c0_c1_report(const SupportFunction& h) {
  const BodyGeometry geo = evaluate_geometry(h);
  BoundsSummary b;
  b.min_h = h.values().minCoeff();
  b.max_h = h.values().maxCoeff();
  b.max_grad = std::sqrt(squared_gradient(geo.derivatives).maxCoeff());
  b.h_ratio = b.max_h / b.min_h;
  b.min_radius = geo.radii.minCoeff();
  b.max_radius = geo.radii.maxCoeff();
  b.min_rho = geo.rho.minCoeff();
  b.max_rho = geo.rho.maxCoeff();
  return b;
}

Field random_even_field(const SphereGrid& grid, std::uint64_t seed, int max_degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f = Field::Constant(grid.size(), u(rng));
  for (int k = 2; k <= max_degree; k += 2) {
    const double scale = 1.0 / (k * k);
    if (grid.dim() == 1) {
      f += scale * u(rng) * evaluate_mode(grid, {k, 0, false});
      f += scale * u(rng) * evaluate_mode(grid, {k, 0, true});
    } else {
      for (int m = 0; m <= k; ++m) {
        f += scale * u(rng) * evaluate_mode(grid, {k, m, false});
        if (m > 0) f += scale * u(rng) * evaluate_mode(grid, {k, m, true});
      }
    }
  }
  return f;
}

void write_report(Document& doc, const StabilityReport& r, const std::string& section) {
  Section& s = doc.section(section);
  s.set("dim", r.dim);
  s.set("q", r.q);
  s.set("q_in_range", r.q_in_range);
  s.set("ratio", r.ratio);
  s.set("epsilon", r.epsilon);
  s.set("delta2", r.delta2);
  s.set("delta_h", r.delta_h);
  s.set("diameter", r.diameter);
  s.set("c1", r.c1);
  s.set("beta", r.beta);
  s.set("bound", r.bound);
  s.set("pass", r.pass);
  s.set("prop33_lhs", r.prop33.lhs);
  s.set("prop33_rhs", r.prop33.rhs);
  s.set("prop33_pass", r.prop33.pass);
  s.set("gradient_step_lhs", r.gradient_step.lhs);
  s.set("gradient_step_rhs", r.gradient_step.rhs);
  s.set("gradient_step_pass", r.gradient_step.pass);
  s.set("poincare_lhs", r.poincare.lhs);
  s.set("poincare_rhs", r.poincare.rhs);
  s.set("poincare_pass", r.poincare.pass);
  s.set("schneider", r.schneider);
}

void write_bounds(Document& doc, const BoundsSummary& b, const std::string& section) {
  Section& s = doc.section(section);
  s.set("min_h", b.min_h);
  s.set("max_h", b.max_h);
  s.set("max_grad", b.max_grad);
  s.set("h_ratio", b.h_ratio);
  s.set("min_radius", b.min_radius);
  s.set("max_radius", b.max_radius);
  s.set("min_rho", b.min_rho);
  s.set("max_rho", b.max_rho);
}

void write_density(Document& doc, const DualDensity& d, const std::string& section) {
  Section& s = doc.section(section);
  s.set("q", d.q);
  s.set("max", d.max);
  s.set("min", d.min);
  s.set("ratio", d.ratio);
  s.set("g", d.g);
}

void write_density_csv(std::ostream& os, const SphereGrid& grid, const DualDensity& d) {
  os << "index";
  const char* axes[] = {"x", "y", "z"};
  for (int k = 0; k <= grid.dim(); ++k) os << ',' << axes[k];
  os << ",g\n";
  for (Index i = 0; i < grid.size(); ++i) {
    os << i;
    for (int k = 0; k <= grid.dim(); ++k) os << ',' << format_real(grid.nodes()(i, k));
    os << ',' << format_real(d.g(i)) << '\n';
  }
}

}  // namespace dualmink
