// Damped Newton and homotopy continuation for
//   h det(b) |Dh|^(q-n-1) = f   on the sphere, h even.
#ifndef DUALMINK_SOLVER_HPP
#define DUALMINK_SOLVER_HPP

#include "dualmink/convex_body.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualmink {

struct SolverConfig {
  double q = 1.0;
  int homotopy_steps = 10;
  double newton_tol = 1e-10;
  int max_newton_iters = 40;
  double shrink = 0.5;
  double min_step = 1.0 / 1024.0;
  double convexity_floor = 1e-8;  // relative to mean h
  int max_bisections = 10;
  bool override_q_range = false;

  /// Throws std::invalid_argument on bad values, and on q outside (0, n]
  /// unless override_q_range is set.
  void validate(int dim) const;
  bool operator==(const SolverConfig&) const = default;
};

enum class SolveStatus { converged, max_iterations, line_search_failed, singular, homotopy_breakdown };

const char* to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& name);

struct NewtonRecord {
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  double step = 0.0;        // accepted line-search step, 0 before the first update
  double min_radius = 0.0;  // smallest eigenvalue of b
};

/// One corrector run along the homotopy.
struct HomotopyRecord {
  double t = 0.0;
  double dt = 0.0;
  bool converged = false;
  int iterations = 0;
  double residual_inf = 0.0;
};

struct SolveResult {
  explicit SolveResult(SupportFunction body) : h(std::move(body)) {}

  SupportFunction h;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::string message;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  int iterations = 0;
  std::vector<NewtonRecord> newton;    // last corrector
  std::vector<HomotopyRecord> trace;   // empty for a plain Newton solve
  double seconds = 0.0;
};

/// G = log det b + log h + (q-n-1) log rho - log f. Where the body is not
/// strictly convex every entry is +inf, so any norm of it rejects the iterate.
Field residual(const SphereGrid& grid, const Field& h, const Field& f, double q);
Field residual(const SupportFunction& h, const Field& f, double q);

/// Coefficients of the derivative of G:
///   b^{ij}(eta_ij + eta delta_ij) + eta/h + (q-n-1)(h eta + <grad h, grad eta>)/rho^2
OperatorCoefficients jacobian_coefficients(const SphereGrid& grid, const Field& h, double q);

SparseMatrix linearize(const SupportFunction& h, double q);
/// Restricted to even functions, acting on representative values.
SparseMatrix linearize_even(const SupportFunction& h, double q);

/// Checks size, positivity and evenness (to 1e-12 relative) and returns the
/// exactly even projection.
Field prepare_density(const SphereGrid& grid, const Field& f);

SolveResult newton_solve(const SupportFunction& h0, const Field& f, const SolverConfig& cfg);

/// Continuation f_t = (1-t) + t f from the unit ball.
SolveResult solve_homotopy(const GridPtr& grid, const Field& f, const SolverConfig& cfg);

struct UniquenessReport {
  std::vector<bool> converged;
  std::vector<std::string> status;
  Eigen::MatrixXd pairwise;  // Hausdorff distances, NaN where a run failed
  double max_distance = 0.0;
  bool same_solution = true;  // every converged pair within tolerance
};

UniquenessReport uniqueness_probe(const Field& f, const SolverConfig& cfg, const std::vector<SupportFunction>& inits,
                                  double tolerance = 1e-6);

/// Density g of the body at index q: closed form for balls and ellipsoids,
/// numerical geometry for perturbed balls.
Field manufacture_density(const AnalyticBody& body, const GridPtr& grid, double q);

void write_config(Document& doc, const SolverConfig& cfg, const std::string& section = "solver");
SolverConfig read_config(const Document& doc, const std::string& section = "solver");

/// Sections: solver, density (f), body (h), result, trace, newton, timing.
void write_result(Document& doc, const SolveResult& r, const Field& f, const SolverConfig& cfg);

struct StoredResult {
  StoredResult(SolverConfig c, Field density, SupportFunction body)
      : config(c), f(std::move(density)), h(std::move(body)) {}

  SolverConfig config;
  Field f;
  SupportFunction h;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  double residual_inf = 0.0;
};

StoredResult read_result(const Document& doc);

}  // namespace dualmink

#endif  // DUALMINK_SOLVER_HPP
