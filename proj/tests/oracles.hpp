// Closed-form reference fields used as independent oracles by the unit tests.
#ifndef DUALMINK_TESTS_ORACLES_HPP
#define DUALMINK_TESTS_ORACLES_HPP

#include "dualmink/sphere_grid.hpp"

#include <cmath>
#include <random>

namespace dualmink::testing {

/// f(x) = exp(<a, x>) restricted to the sphere. With s = <a, x>:
///   grad f            = f (a - s x)
///   Hess f (e_i, e_j) = f (a_i a_j - s delta_ij),  a_i = <a, e_i>
///   Laplacian f       = f (|a|^2 - s^2 - n s)
struct ExpField {
  SpaceVector a;

  Field values(const SphereGrid& g) const {
    Field v(g.size());
    for (Index i = 0; i < g.size(); ++i) v(i) = std::exp(a.dot(g.node(i)));
    return v;
  }
  Field laplacian(const SphereGrid& g) const {
    Field v(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      const double s = a.dot(g.node(i));
      v(i) = std::exp(s) * (a.squaredNorm() - s * s - g.dim() * s);
    }
    return v;
  }
  double gradient(const SphereGrid& g, Index i, int k) const {
    return std::exp(a.dot(g.node(i))) * a.dot(g.frame(i, k));
  }
  double hessian(const SphereGrid& g, Index i, int k, int l) const {
    const double s = a.dot(g.node(i));
    return std::exp(s) * (a.dot(g.frame(i, k)) * a.dot(g.frame(i, l)) - (k == l ? s : 0.0));
  }
};

inline SpaceVector random_direction(int dim, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal;
  SpaceVector a(dim + 1);
  for (int k = 0; k <= dim; ++k) a(k) = normal(rng);
  return scale * a.normalized();
}

/// Real spherical harmonic P_k^m(cos theta) cos(m phi) sampled on the grid.
inline Field harmonic(const SphereGrid& g, int k, int m) {
  Field v(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    v(i) = std::assoc_legendre(unsigned(k), unsigned(m), g.nodes()(i, 2)) * std::cos(m * g.longitude(i));
  }
  return v;
}

}  // namespace dualmink::testing

#endif  // DUALMINK_TESTS_ORACLES_HPP
