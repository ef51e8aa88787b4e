#include "dualmink/solver.hpp"

#include "dualmink/verifier.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualmink {

namespace {

constexpr double kSingularRcond = 1e-12;
constexpr double kAmplificationLimit = 1e12;

double weighted_l2(const SphereGrid& grid, const Field& v) {
  if (!v.allFinite()) return std::numeric_limits<double>::infinity();
  return std::sqrt(integrate(grid, v.array().square().matrix()));
}

double sup_norm(const Field& v) {
  if (!v.allFinite()) return std::numeric_limits<double>::infinity();
  return v.cwiseAbs().maxCoeff();
}

struct LinearSolve {
  Field x;
  bool ok = true;
  std::string message;
};

LinearSolve solve_reduced(const SphereGrid& grid, const SparseMatrix& a, const Field& rhs) {
  LinearSolve out;
  if (grid.dim() == 2 && grid.scheme() == DiffScheme::fd4) {
    Eigen::SparseMatrix<double> col(a);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(col);
    if (lu.info() != Eigen::Success) {
      out.ok = false;
      out.message = "sparse LU failed: " + lu.lastErrorMessage();
      return out;
    }
    out.x = lu.solve(rhs);
    const double scale = std::max(sup_norm(rhs), std::numeric_limits<double>::min());
    if (!out.x.allFinite() || sup_norm(out.x) > kAmplificationLimit * scale) {
      out.ok = false;
      out.message = "linearized operator is numerically singular (step amplification " +
                    format_real(sup_norm(out.x) / scale) + ")";
    }
    return out;
  }
  const Eigen::MatrixXd dense(a);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    out.ok = false;
    out.message = "linearized operator is numerically singular (rcond " + format_real(rcond) + ")";
    return out;
  }
  out.x = lu.solve(rhs);
  return out;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SolverConfig::validate(int dim) const {
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (homotopy_steps < 1) throw std::invalid_argument("homotopy_steps must be at least 1");
  if (max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be at least 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw std::invalid_argument("min_step must lie in (0, 1]");
  if (!(convexity_floor > 0.0)) throw std::invalid_argument("convexity_floor must be positive");
  if (max_bisections < 0) throw std::invalid_argument("max_bisections must be non-negative");
  if (!std::isfinite(q)) throw std::invalid_argument("q must be finite");
  if (!override_q_range && !(q > 0.0 && q <= dim)) {
    throw std::invalid_argument("q = " + format_real(q) + " is outside (0, " + std::to_string(dim) +
                                "]; pass the q-range override to run it anyway");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::line_search_failed: return "line_search_failed";
    case SolveStatus::singular: return "singular";
    case SolveStatus::homotopy_breakdown: return "homotopy_breakdown";
  }
  return "unknown";
}

SolveStatus status_from_string(const std::string& name) {
  for (auto s : {SolveStatus::converged, SolveStatus::max_iterations, SolveStatus::line_search_failed,
                 SolveStatus::singular, SolveStatus::homotopy_breakdown}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown solve status '" + name + "'");
}

Field residual(const SphereGrid& grid, const Field& h, const Field& f, double q) {
  if (h.size() != grid.size() || f.size() != grid.size()) throw std::invalid_argument("residual: size mismatch");
  const BodyGeometry geo = evaluate_geometry(grid, h);
  if (!geo.valid || h.minCoeff() <= 0.0) return Field::Constant(grid.size(), std::numeric_limits<double>::infinity());
  const int n = grid.dim();
  return (geo.sigma_n.array().log() + h.array().log() + (q - n - 1) * geo.rho.array().log() - f.array().log())
      .matrix();
}

Field residual(const SupportFunction& h, const Field& f, double q) {
  return residual(h.grid(), h.values(), f, q);
}

OperatorCoefficients jacobian_coefficients(const SphereGrid& grid, const Field& h, double q) {
  const BodyGeometry geo = evaluate_geometry(grid, h);
  if (!geo.valid) throw NonConvexError("linearization needs a strictly convex body");
  const int n = grid.dim();
  const Index size = grid.size();
  const double a = q - n - 1;
  OperatorCoefficients c;
  c.c11.resize(size);
  c.c1.resize(size);
  c.c0.resize(size);
  if (n == 2) {
    c.c12.resize(size);
    c.c22.resize(size);
    c.c2.resize(size);
  }
  for (Index i = 0; i < size; ++i) {
    const FrameMatrix inv = geo.curvature[std::size_t(i)].inverse();
    const double r2 = geo.rho(i) * geo.rho(i);
    c.c11(i) = inv(0, 0);
    c.c1(i) = a * geo.derivatives.gradient(i, 0) / r2;
    if (n == 2) {
      c.c12(i) = 2.0 * inv(0, 1);
      c.c22(i) = inv(1, 1);
      c.c2(i) = a * geo.derivatives.gradient(i, 1) / r2;
    }
    c.c0(i) = inv.trace() + 1.0 / h(i) + a * h(i) / r2;
  }
  return c;
}

SparseMatrix linearize(const SupportFunction& h, double q) {
  return h.grid().assemble(jacobian_coefficients(h.grid(), h.values(), q));
}

SparseMatrix linearize_even(const SupportFunction& h, double q) {
  return h.grid().assemble_even(jacobian_coefficients(h.grid(), h.values(), q));
}

Field prepare_density(const SphereGrid& grid, const Field& f) {
  if (f.size() != grid.size()) throw std::invalid_argument("density: expected one value per node");
  if (!f.allFinite() || f.minCoeff() <= 0.0) throw std::invalid_argument("density must be finite and positive");
  const Field even = project_even(grid, f);
  if ((even - f).cwiseAbs().maxCoeff() > 1e-12 * f.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("density must be even: f(x) = f(-x)");
  }
  return even;
}

SolveResult newton_solve(const SupportFunction& h0, const Field& f_in, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const SphereGrid& grid = h0.grid();
  cfg.validate(grid.dim());
  if (!h0.even() && !is_even(grid, h0.values())) throw std::invalid_argument("newton_solve: initial body must be even");
  const Field f = prepare_density(grid, f_in);

  Field h = h0.values();
  Field g = residual(grid, h, f, cfg.q);
  SolveResult r(SupportFunction(h0.grid_ptr(), h, true));
  if (!g.allFinite()) {
    r.status = SolveStatus::line_search_failed;
    r.message = "initial body is not strictly convex";
    r.residual_inf = r.residual_l2 = std::numeric_limits<double>::infinity();
    r.seconds = elapsed(start);
    return r;
  }
  double g2 = weighted_l2(grid, g);
  double step = 0.0;

  for (int iter = 0;; ++iter) {
    const BodyGeometry geo = evaluate_geometry(grid, h);
    r.newton.push_back({sup_norm(g), g2, step, geo.min_radius});
    r.iterations = iter;
    if (sup_norm(g) <= cfg.newton_tol) {
      r.status = SolveStatus::converged;
      break;
    }
    if (iter == cfg.max_newton_iters) {
      r.status = SolveStatus::max_iterations;
      r.message = "no convergence after " + std::to_string(iter) + " Newton iterations";
      break;
    }
    const SparseMatrix jac = grid.assemble_even(jacobian_coefficients(grid, h, cfg.q));
    const LinearSolve lin = solve_reduced(grid, jac, -grid.restrict_even(g));
    if (!lin.ok) {
      r.status = SolveStatus::singular;
      r.message = lin.message;
      break;
    }
    const Field eta = grid.expand_even(lin.x);

    bool accepted = false;
    for (double s = 1.0; s >= cfg.min_step; s *= cfg.shrink) {
      const Field trial = project_even(grid, h + s * eta);
      const double floor = cfg.convexity_floor * sphere_mean(grid, trial);
      if (trial.minCoeff() <= 0.0) continue;
      const BodyGeometry tg = evaluate_geometry(grid, trial);
      if (!tg.valid || tg.min_radius <= floor) continue;
      const Field gt = residual(grid, trial, f, cfg.q);
      const double gt2 = weighted_l2(grid, gt);
      if (gt2 < g2) {
        h = trial;
        g = gt;
        g2 = gt2;
        step = s;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.status = SolveStatus::line_search_failed;
      r.message = "no acceptable step down to " + format_real(cfg.min_step);
      break;
    }
  }

  r.h = SupportFunction(h0.grid_ptr(), h, true);
  r.converged = r.status == SolveStatus::converged;
  r.residual_inf = sup_norm(g);
  r.residual_l2 = g2;
  r.seconds = elapsed(start);
  return r;
}

SolveResult solve_homotopy(const GridPtr& grid, const Field& f_in, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate(grid->dim());
  const Field f = prepare_density(*grid, f_in);
  const Field one = Field::Ones(grid->size());

  SupportFunction h(grid, one, true);
  SolveResult last(h);
  std::vector<HomotopyRecord> trace;
  const double base = 1.0 / cfg.homotopy_steps;
  double t = 0.0, dt = base;
  int bisections = 0;
  bool broke = false;

  while (t < 1.0) {
    const double t_next = (t + dt >= 1.0 - 1e-14) ? 1.0 : t + dt;
    const Field ft = (1.0 - t_next) * one + t_next * f;
    SolveResult step = newton_solve(h, ft, cfg);
    trace.push_back({t_next, t_next - t, step.converged, step.iterations, step.residual_inf});
    if (step.converged) {
      h = step.h;
      t = t_next;
      last = std::move(step);
      bisections = 0;
      dt = std::min(base, 2.0 * dt);
      continue;
    }
    last = std::move(step);
    if (++bisections > cfg.max_bisections) {
      broke = true;
      break;
    }
    dt *= 0.5;
  }

  SolveResult r = std::move(last);
  r.trace = std::move(trace);
  if (broke) {
    const SolveStatus inner = r.status;
    r.converged = false;
    r.status = inner == SolveStatus::singular ? SolveStatus::singular : SolveStatus::homotopy_breakdown;
    r.message = "homotopy stalled at t = " + format_real(t) + " after " + std::to_string(cfg.max_bisections) +
                " bisections (" + to_string(inner) + (r.message.empty() ? "" : ": " + r.message) + ")";
    r.h = h;
    const Field g = residual(*grid, h.values(), f, cfg.q);
    r.residual_inf = sup_norm(g);
    r.residual_l2 = weighted_l2(*grid, g);
  }
  r.seconds = elapsed(start);
  return r;
}

UniquenessReport uniqueness_probe(const Field& f, const SolverConfig& cfg, const std::vector<SupportFunction>& inits,
                                  double tolerance) {
  UniquenessReport rep;
  const Index k = Index(inits.size());
  rep.pairwise = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::optional<SupportFunction>> out;
  for (const auto& init : inits) {
    SolveResult r = newton_solve(init, f, cfg);
    rep.converged.push_back(r.converged);
    rep.status.push_back(to_string(r.status));
    if (r.converged) {
      out.emplace_back(r.h);
    } else {
      out.emplace_back();
    }
  }
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      if (!out[std::size_t(i)] || !out[std::size_t(j)]) continue;
      const double d = hausdorff_distance(*out[std::size_t(i)], *out[std::size_t(j)]);
      rep.pairwise(i, j) = d;
      rep.max_distance = std::max(rep.max_distance, d);
    }
  }
  rep.same_solution = rep.max_distance <= tolerance;
  return rep;
}

Field manufacture_density(const AnalyticBody& body, const GridPtr& grid, double q) {
  const SupportFunction h = analytic_support(body, grid);
  if (body.kind == AnalyticBody::Kind::perturbed_ball) return dual_density(h, q).g;

  // Ellipsoid x -> A^2 x / h on the boundary, det b = (prod A)^2 / h^(n+2).
  const int n = grid->dim();
  std::vector<double> axes = body.axes;
  if (body.kind == AnalyticBody::Kind::ball) axes.assign(std::size_t(n + 1), body.radius);
  double prod = 1.0;
  for (double a : axes) prod *= a;
  Field g(grid->size());
  for (Index i = 0; i < grid->size(); ++i) {
    double f2 = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double a2 = axes[std::size_t(k)] * axes[std::size_t(k)];
      const double x = grid->nodes()(i, k);
      f2 += a2 * a2 * x * x;
    }
    const double hi = h.values()(i);
    g(i) = prod * prod * std::pow(hi, -(n + 1)) * std::pow(std::sqrt(f2) / hi, q - n - 1);
  }
  return project_even(*grid, g);
}

void write_config(Document& doc, const SolverConfig& cfg, const std::string& section) {
  Section& s = doc.section(section);
  s.set("q", cfg.q);
  s.set("homotopy_steps", cfg.homotopy_steps);
  s.set("newton_tol", cfg.newton_tol);
  s.set("max_newton_iters", cfg.max_newton_iters);
  s.set("shrink", cfg.shrink);
  s.set("min_step", cfg.min_step);
  s.set("convexity_floor", cfg.convexity_floor);
  s.set("max_bisections", cfg.max_bisections);
  s.set("override_q_range", cfg.override_q_range);
}

SolverConfig read_config(const Document& doc, const std::string& section) {
  SolverConfig cfg;
  if (!doc.has(section)) return cfg;
  const Section& s = doc.at(section);
  if (s.has("q")) cfg.q = s.get_real("q");
  if (s.has("homotopy_steps")) cfg.homotopy_steps = int(s.get_int("homotopy_steps"));
  if (s.has("newton_tol")) cfg.newton_tol = s.get_real("newton_tol");
  if (s.has("max_newton_iters")) cfg.max_newton_iters = int(s.get_int("max_newton_iters"));
  if (s.has("shrink")) cfg.shrink = s.get_real("shrink");
  if (s.has("min_step")) cfg.min_step = s.get_real("min_step");
  if (s.has("convexity_floor")) cfg.convexity_floor = s.get_real("convexity_floor");
  if (s.has("max_bisections")) cfg.max_bisections = int(s.get_int("max_bisections"));
  if (s.has("override_q_range")) cfg.override_q_range = s.get_bool("override_q_range");
  return cfg;
}

void write_result(Document& doc, const SolveResult& r, const Field& f, const SolverConfig& cfg) {
  write_config(doc, cfg);
  doc.section("density").set("f", f);
  write_body(doc, r.h);

  Section& res = doc.section("result");
  res.set("converged", r.converged);
  res.set("status", to_string(r.status));
  res.set("message", r.message.c_str());
  res.set("residual_inf", r.residual_inf);
  res.set("residual_l2", r.residual_l2);
  res.set("iterations", r.iterations);

  const auto column = [](const auto& rows, auto get) {
    Field v(Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v(Index(i)) = get(rows[i]);
    return v;
  };
  const auto int_column = [](const auto& rows, auto get) {
    std::vector<std::int64_t> v;
    for (const auto& row : rows) v.push_back(get(row));
    return v;
  };
  Section& tr = doc.section("trace");
  tr.set("t", column(r.trace, [](const HomotopyRecord& x) { return x.t; }));
  tr.set("dt", column(r.trace, [](const HomotopyRecord& x) { return x.dt; }));
  tr.set("converged", Value(int_column(r.trace, [](const HomotopyRecord& x) { return std::int64_t(x.converged); })));
  tr.set("iterations", Value(int_column(r.trace, [](const HomotopyRecord& x) { return std::int64_t(x.iterations); })));
  tr.set("residual_inf", column(r.trace, [](const HomotopyRecord& x) { return x.residual_inf; }));

  Section& nw = doc.section("newton");
  nw.set("residual_inf", column(r.newton, [](const NewtonRecord& x) { return x.residual_inf; }));
  nw.set("residual_l2", column(r.newton, [](const NewtonRecord& x) { return x.residual_l2; }));
  nw.set("step", column(r.newton, [](const NewtonRecord& x) { return x.step; }));
  nw.set("min_radius", column(r.newton, [](const NewtonRecord& x) { return x.min_radius; }));

  doc.section("timing").set("seconds", r.seconds);
}

StoredResult read_result(const Document& doc) {
  SupportFunction h = read_body(doc);
  StoredResult out(read_config(doc), doc.at("density").get_vector("f"), h);
  if (out.f.size() != h.grid().size()) throw ParseError("[density] f has the wrong number of samples");
  const Section& res = doc.at("result");
  out.converged = res.get_bool("converged");
  out.status = status_from_string(res.get_string("status"));
  out.residual_inf = res.get_real("residual_inf");
  return out;
}

}  // namespace dualmink
