// Right-hand side specifications:
//   1 + 0.05*cos(2θ) - 0.01*sin(4theta)      (n=1)
//   1 + 0.05*Yc(2,0) + 0.02*Ys(4,3)          (n=2)
//   manufacture:ellipse(1.2,1.0)  manufacture:ellipsoid(1.1,1,1)
//   manufacture:ball(2)  manufacture:perturbed(0.1,cos(2θ))
// Odd modes are rejected when parsing.
#ifndef DUALMINK_FSPEC_HPP
#define DUALMINK_FSPEC_HPP

#include "dualmink/convex_body.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualmink {

struct ModeTerm {
  double amplitude = 0.0;
  HarmonicMode mode;
  bool operator==(const ModeTerm&) const = default;
};

struct FSpec {
  int dim = 1;
  double constant = 1.0;
  std::vector<ModeTerm> terms;
  std::optional<AnalyticBody> manufactured;

  /// Canonical text; parse_fspec(str(), dim) reproduces the value exactly.
  std::string str() const;
  /// Sup-norm of f - 1 implied by the series (manufactured: NaN).
  double perturbation() const;
  bool operator==(const FSpec&) const = default;
};

/// Throws ParseError on malformed text, odd modes or modes invalid for dim.
FSpec parse_fspec(const std::string& text, int dim);

/// Samples f on the grid; manufactured bodies need the index q.
Field evaluate_fspec(const FSpec& spec, const GridPtr& grid, double q);

}  // namespace dualmink

#endif  // DUALMINK_FSPEC_HPP
