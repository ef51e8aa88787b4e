#include "dualmink/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dualmink {

namespace {

void require_same_grid(const SupportFunction& a, const SupportFunction& b, const char* op) {
  const SphereGrid& ga = a.grid();
  const SphereGrid& gb = b.grid();
  if (&ga != &gb && (ga.dim() != gb.dim() || !(ga.resolution() == gb.resolution()))) {
    throw std::invalid_argument(std::string(op) + ": support functions live on different grids");
  }
}

// Linear interpolation of a 2*pi-periodic sample sequence at increasing angles.
double periodic_interp(const std::vector<double>& angles, const Field& values, double target) {
  const double a0 = angles.front();
  double t = std::fmod(target - a0, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  t += a0;
  const auto n = angles.size();
  const auto it = std::upper_bound(angles.begin(), angles.end(), t);
  const std::size_t hi = std::size_t(it - angles.begin()) % n;
  const std::size_t lo = (hi + n - 1) % n;
  double a_lo = angles[lo];
  double a_hi = angles[hi];
  if (hi == 0) a_hi += 2.0 * kPi;
  const double span = a_hi - a_lo;
  if (span <= 0) return values(Index(lo));
  const double s = (t - a_lo) / span;
  return (1.0 - s) * values(Index(lo)) + s * values(Index(hi));
}

RoundtripStats roundtrip_circle(const SupportFunction& h, const BodyGeometry& geo) {
  const SphereGrid& grid = h.grid();
  const Index n = grid.size();

  // Angles of u_j = F_j / |F_j|, unwrapped; injectivity means strictly increasing.
  std::vector<double> psi(static_cast<std::size_t>(n));
  double prev = std::atan2(geo.boundary(0, 1), geo.boundary(0, 0));
  psi[0] = prev;
  for (Index j = 1; j < n; ++j) {
    const double a = std::atan2(geo.boundary(j, 1), geo.boundary(j, 0));
    const double step = std::remainder(a - prev, 2.0 * kPi);
    if (step <= 0) throw NonConvexError("radial_support_roundtrip: normal map is not injective");
    psi[std::size_t(j)] = psi[std::size_t(j - 1)] + step;
    prev = a;
  }
  if (psi.back() - psi.front() >= 2.0 * kPi) {
    throw NonConvexError("radial_support_roundtrip: normal map winds more than once");
  }

  Field rho(n);
  for (Index k = 0; k < n; ++k) rho(k) = periodic_interp(psi, geo.rho, grid.angle(k));
  const Field drho = grid.differentiate(rho).gradient.col(0);

  std::vector<double> grid_angles(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) grid_angles[std::size_t(k)] = grid.angle(k);

  RoundtripStats stats;
  double sum_sq = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double r = rho(k);
    const double rebuilt = r * r / std::sqrt(drho(k) * drho(k) + r * r);
    const double normal_angle = grid.angle(k) + std::atan2(-drho(k), r);
    const double original = periodic_interp(grid_angles, h.values(), normal_angle);
    const double e = std::abs(rebuilt - original);
    stats.max_residual = std::max(stats.max_residual, e);
    sum_sq += e * e;
  }
  stats.rms_residual = std::sqrt(sum_sq / double(n));
  return stats;
}

RoundtripStats roundtrip_sphere(const SupportFunction& h, const BodyGeometry& geo) {
  const SphereGrid& grid = h.grid();
  const Index n = grid.size();
  const Field& hv = h.values();

  Eigen::MatrixXd u(n, 3);
  Eigen::MatrixXd grad_rho(n, 3);
  for (Index j = 0; j < n; ++j) {
    u.row(j) = geo.boundary.row(j) / geo.rho(j);
    // Tangential gradient of rho at u_j, from rho u - grad rho parallel to the normal x_j.
    grad_rho.row(j) = geo.rho(j) * u.row(j) - (geo.rho(j) * geo.rho(j) / hv(j)) * grid.nodes().row(j);
  }

  Field rho(n);
  for (Index k = 0; k < n; ++k) {
    const Eigen::RowVector3d target = grid.nodes().row(k);
    Index best = 0;
    (u * target.transpose()).maxCoeff(&best);
    rho(k) = geo.rho(best) + grad_rho.row(best).dot(target - u.row(best));
  }
  const Derivatives d = grid.differentiate(rho);

  RoundtripStats stats;
  double sum_sq = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double r = rho(k);
    const SpaceVector g = d.gradient(k, 0) * grid.frame(k, 0) + d.gradient(k, 1) * grid.frame(k, 1);
    const double rebuilt = r * r / std::sqrt(g.squaredNorm() + r * r);
    const SpaceVector normal = (r * grid.node(k) - g).normalized();
    const Index p = grid.nearest_node(normal);
    const SpaceVector grad_h = geo.derivatives.gradient(p, 0) * grid.frame(p, 0) +
                               geo.derivatives.gradient(p, 1) * grid.frame(p, 1);
    const double original = hv(p) + grad_h.dot(normal - grid.node(p));
    const double e = std::abs(rebuilt - original);
    stats.max_residual = std::max(stats.max_residual, e);
    sum_sq += e * e;
  }
  stats.rms_residual = std::sqrt(sum_sq / double(n));
  return stats;
}

}  // namespace

SupportFunction::SupportFunction(GridPtr grid, Field values, bool even)
    : grid_(std::move(grid)), values_(std::move(values)), even_(even) {
  if (!grid_) throw std::invalid_argument("SupportFunction: null grid");
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("SupportFunction: expected one value per node");
  }
  if (!values_.allFinite() || values_.minCoeff() <= 0.0) {
    throw std::invalid_argument("SupportFunction: h must be positive (origin in the interior)");
  }
  if (even_ && !is_even(*grid_, values_)) {
    throw std::invalid_argument("SupportFunction: values flagged even differ at antipodal nodes");
  }
}

SupportFunction SupportFunction::make_even(GridPtr grid, const Field& values) {
  const Field v = project_even(*grid, values);
  return SupportFunction(std::move(grid), v, true);
}

BodyGeometry evaluate_geometry(const SupportFunction& h) {
  return evaluate_geometry(h.grid(), h.values());
}

BodyGeometry evaluate_geometry(const SphereGrid& grid, const Field& h) {
  const int dim = grid.dim();
  const Index n = grid.size();
  BodyGeometry geo;
  geo.derivatives = grid.differentiate(h);
  const auto& grad = geo.derivatives.gradient;

  geo.boundary.resize(n, dim + 1);
  geo.rho.resize(n);
  geo.curvature.resize(std::size_t(n));
  geo.sigma1.resize(n);
  geo.sigma_n.resize(n);
  geo.kappa.resize(n);
  geo.radii.resize(n, dim);
  for (Index i = 0; i < n; ++i) {
    SpaceVector f = h(i) * grid.node(i);
    for (int k = 0; k < dim; ++k) f += grad(i, k) * grid.frame(i, k);
    geo.boundary.row(i) = f.transpose();
    geo.rho(i) = std::sqrt(h(i) * h(i) + grad.row(i).squaredNorm());

    FrameMatrix b = geo.derivatives.hessian_at(i);
    b.diagonal().array() += h(i);
    geo.curvature[std::size_t(i)] = b;
    geo.sigma1(i) = b.trace();
    if (dim == 1) {
      geo.sigma_n(i) = b(0, 0);
      geo.radii(i, 0) = b(0, 0);
    } else {
      geo.sigma_n(i) = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
      const double half_tr = 0.5 * geo.sigma1(i);
      const double disc = std::hypot(0.5 * (b(0, 0) - b(1, 1)), b(0, 1));
      geo.radii(i, 0) = half_tr - disc;
      geo.radii(i, 1) = half_tr + disc;
    }
    geo.kappa(i) = 1.0 / geo.sigma_n(i);
  }
  geo.min_radius = geo.radii.col(0).minCoeff();
  geo.valid = std::isfinite(geo.min_radius) && geo.min_radius > 0.0 && geo.radii.allFinite();
  return geo;
}

RoundtripStats radial_support_roundtrip(const SupportFunction& h) {
  const BodyGeometry geo = evaluate_geometry(h);
  if (!geo.valid) throw NonConvexError("radial_support_roundtrip: body is not strictly convex");
  return h.dim() == 1 ? roundtrip_circle(h, geo) : roundtrip_sphere(h, geo);
}

double l2_distance(const SupportFunction& h1, const SupportFunction& h2) {
  require_same_grid(h1, h2, "l2_distance");
  const Field diff = h1.values() - h2.values();
  return std::sqrt(std::max(0.0, sphere_mean(h1.grid(), diff.cwiseAbs2())));
}

double hausdorff_distance(const SupportFunction& h1, const SupportFunction& h2) {
  require_same_grid(h1, h2, "hausdorff_distance");
  return (h1.values() - h2.values()).cwiseAbs().maxCoeff();
}

double diameter_union(const SupportFunction& h1, const SupportFunction& h2) {
  require_same_grid(h1, h2, "diameter_union");
  const Field hull = h1.values().cwiseMax(h2.values());
  const auto& anti = h1.grid().antipode();
  double diam = 0.0;
  for (Index i = 0; i < hull.size(); ++i) diam = std::max(diam, hull(i) + hull(anti[std::size_t(i)]));
  return diam;
}

SupportFunction normalize_body(const SupportFunction& h) {
  const double mean = sphere_mean(h.grid(), h.values());
  return SupportFunction(h.grid_ptr(), h.values() / mean, h.even());
}

SupportFunction ball_like(const SupportFunction& h, double r) {
  return SupportFunction(h.grid_ptr(), Field::Constant(h.grid().size(), r), true);
}

AnalyticBody AnalyticBody::ball(double r) {
  AnalyticBody b;
  b.kind = Kind::ball;
  b.radius = r;
  return b;
}

AnalyticBody AnalyticBody::ellipsoid(std::vector<double> semi_axes) {
  AnalyticBody b;
  b.kind = Kind::ellipsoid;
  b.axes = std::move(semi_axes);
  return b;
}

AnalyticBody AnalyticBody::perturbed_ball(double amplitude, HarmonicMode mode) {
  AnalyticBody b;
  b.kind = Kind::perturbed_ball;
  b.amplitude = amplitude;
  b.mode = mode;
  return b;
}

std::string AnalyticBody::str() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::ball:
      os << "ball(" << radius << ")";
      break;
    case Kind::ellipsoid: {
      os << (axes.size() == 2 ? "ellipse(" : "ellipsoid(");
      for (std::size_t i = 0; i < axes.size(); ++i) os << (i ? "," : "") << axes[i];
      os << ")";
      break;
    }
    case Kind::perturbed_ball:
      os << "perturbed(" << amplitude << "," << mode.degree << "," << mode.order << ","
         << (mode.sine ? "sin" : "cos") << ")";
      break;
  }
  return os.str();
}

SupportFunction analytic_support(const AnalyticBody& body, GridPtr grid) {
  const Index n = grid->size();
  Field h(n);
  switch (body.kind) {
    case AnalyticBody::Kind::ball:
      if (!(body.radius > 0)) throw std::invalid_argument("analytic_support: ball radius must be positive");
      h.setConstant(body.radius);
      return SupportFunction(std::move(grid), h, true);

    case AnalyticBody::Kind::ellipsoid: {
      if (int(body.axes.size()) != grid->dim() + 1) {
        throw std::invalid_argument("analytic_support: ellipsoid needs dim+1 semi-axes");
      }
      Eigen::RowVectorXd a2(grid->dim() + 1);
      for (std::size_t k = 0; k < body.axes.size(); ++k) {
        if (!(body.axes[k] > 0)) throw std::invalid_argument("analytic_support: semi-axes must be positive");
        a2(Index(k)) = body.axes[k] * body.axes[k];
      }
      for (Index i = 0; i < n; ++i) {
        h(i) = std::sqrt((grid->nodes().row(i).array().square() * a2.array()).sum());
      }
      return SupportFunction(std::move(grid), h, true);
    }

    case AnalyticBody::Kind::perturbed_ball: {
      if (!(body.amplitude >= 0)) throw std::invalid_argument("analytic_support: amplitude must be non-negative");
      if (!body.mode.even()) throw std::invalid_argument("analytic_support: perturbation mode must be even");
      h = Field::Ones(n) + body.amplitude * evaluate_mode(*grid, body.mode);
      if (h.minCoeff() <= 0) throw NonConvexError("analytic_support: perturbed support function is not positive");
      const BodyGeometry geo = evaluate_geometry(*grid, h);
      if (!geo.valid) {
        throw NonConvexError("analytic_support: perturbation " + body.str() +
                             " is not convex (min principal radius " + format_real(geo.min_radius) + ")");
      }
      return SupportFunction(std::move(grid), h, true);
    }
  }
  throw std::invalid_argument("analytic_support: unknown body kind");
}

void write_body(Document& doc, const SupportFunction& h, const std::string& section) {
  const SphereGrid& g = h.grid();
  Section& s = doc.section(section);
  s.set("dim", g.dim());
  if (g.dim() == 1) {
    s.set("resolution", Value(std::vector<std::int64_t>{g.resolution().first}));
  } else {
    s.set("resolution", Value(std::vector<std::int64_t>{g.resolution().first, g.resolution().second}));
  }
  s.set("scheme", to_string(g.scheme()));
  s.set("even", Value(h.even()));
  s.set("values", h.values());
}

SupportFunction read_body(const Document& doc, const std::string& section) {
  const Section& s = doc.at(section);
  const int dim = int(s.get_int("dim"));
  const auto res = s.get_ints("resolution");
  if (res.empty() || res.size() > 2) throw ParseError("[" + section + "] resolution: expected 1 or 2 sizes");
  Resolution r{int(res[0]), res.size() == 2 ? int(res[1]) : 0};
  const DiffScheme scheme = s.has("scheme") ? scheme_from_string(s.get_string("scheme")) : DiffScheme::spectral;
  auto grid = SphereGrid::build(dim, r, scheme);
  Field values = s.get_vector("values");
  if (values.size() != grid->size()) {
    throw ParseError("[" + section + "] values: expected " + std::to_string(grid->size()) + " samples");
  }
  return SupportFunction(std::move(grid), std::move(values), s.get_bool("even"));
}

}  // namespace dualmink
