// Discretized unit circle / unit two-sphere: nodes, quadrature, antipodal
// pairing and tangential differential operators.
#ifndef DUALMINK_SPHERE_GRID_HPP
#define DUALMINK_SPHERE_GRID_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dualmink {

using Index = Eigen::Index;
using Field = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Per-node tangent-frame quantities; n <= 2 so storage stays on the stack.
using FrameVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using FrameMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using SpaceVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

inline constexpr double kPi = std::numbers::pi;

/// Differentiation scheme for the angular derivatives.
///   spectral: Fourier collocation (n=1); double-Fourier-sphere collocation (n=2).
///   fd4:      fourth-order centred differences in every angle (n=2 only).
enum class DiffScheme { spectral, fd4 };

const char* to_string(DiffScheme scheme);
DiffScheme scheme_from_string(const std::string& name);

/// Grid size: {N, 0} on the circle, {N_lat, N_lon} on the two-sphere.
struct Resolution {
  int first = 0;
  int second = 0;
  bool operator==(const Resolution&) const = default;
};

/// Tangential derivatives of a node field, expressed in the grid's fixed
/// orthonormal frame. Hessian columns are (11) for n=1 and (11, 12, 22) for n=2.
struct Derivatives {
  Eigen::MatrixXd gradient;
  Eigen::MatrixXd hessian;
  Field laplacian;

  FrameVector gradient_at(Index i) const { return gradient.row(i).transpose(); }
  FrameMatrix hessian_at(Index i) const;
};

/// Coefficients of a second-order operator
///   (L eta) = c11 eta_11 + c12 eta_12 + c22 eta_22 + c1 eta_1 + c2 eta_2 + c0 eta
/// with covariant derivatives in the frame. c12 multiplies the single
/// off-diagonal entry, so a symmetric contraction A^{ij} eta_ij uses c12 = 2 A^{12}.
/// Unused (n=1) coefficients stay empty.
struct OperatorCoefficients {
  Field c11, c12, c22, c1, c2, c0;
};

class SphereGrid {
 public:
  /// Throws std::invalid_argument on unsupported dim, odd or too small sizes.
  static std::shared_ptr<const SphereGrid> build(int dim, Resolution res,
                                                 DiffScheme scheme = DiffScheme::spectral);

  int dim() const { return dim_; }
  Index size() const { return nodes_.rows(); }
  Resolution resolution() const { return res_; }
  DiffScheme scheme() const { return scheme_; }

  /// size() x (dim+1) unit vectors.
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  SpaceVector node(Index i) const { return nodes_.row(i).transpose(); }
  const Field& weights() const { return weights_; }
  const std::vector<Index>& antipode() const { return antipode_; }
  double total_measure() const { return dim_ == 1 ? 2.0 * kPi : 4.0 * kPi; }

  /// Frame vector e_k (k < dim) at node i, in R^{dim+1}.
  SpaceVector frame(Index i, int k) const;

  /// One index per antipodal pair (the smaller one), in increasing order.
  const std::vector<Index>& even_representatives() const { return reps_; }

  /// Polar angle (n=1) or colatitude (n=2) and longitude of node i.
  double angle(Index i) const { return angle_(i); }
  double longitude(Index i) const { return dim_ == 2 ? lon_(i) : 0.0; }

  Derivatives differentiate(const Field& values) const;

  /// Full operator as a sparse matrix on node values.
  SparseMatrix assemble(const OperatorCoefficients& coeffs) const;

  /// Operator restricted to even functions: rows at the representatives,
  /// columns summing each antipodal pair.
  SparseMatrix assemble_even(const OperatorCoefficients& coeffs) const;

  /// Even function from representative values, and the reverse restriction.
  Field expand_even(const Field& rep_values) const;
  Field restrict_even(const Field& values) const;

  /// Index of the node closest (in angle) to a unit direction.
  Index nearest_node(const SpaceVector& direction) const;

  Index node_index(int lat, int lon) const { return Index(lat) * res_.second + lon; }

 private:
  SphereGrid() = default;
  void build_circle();
  void build_two_sphere();

  int dim_ = 1;
  Resolution res_;
  DiffScheme scheme_ = DiffScheme::spectral;
  Eigen::MatrixXd nodes_;
  Field weights_;
  Field angle_, lon_;
  std::vector<Index> antipode_;
  std::vector<Index> reps_;

  // n=1: d1_, d2_ in the polar angle.
  // n=2: d1_, d2_ in colatitude (pole-reflected), dlon_, dlon2_ in longitude.
  SparseMatrix d1_, d2_, dlon_, dlon2_;
  Field inv_sin_, cot_;
  SparseMatrix expand_;  // size() x reps
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Quadrature sum  sum_j w_j v_j.
template <typename Derived>
double integrate(const SphereGrid& grid, const Eigen::MatrixBase<Derived>& values) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("integrate: expected one value per node");
  }
  return grid.weights().dot(values.derived().template cast<double>());
}

/// Mean over the sphere.
template <typename Derived>
double sphere_mean(const SphereGrid& grid, const Eigen::MatrixBase<Derived>& values) {
  return integrate(grid, values) / grid.total_measure();
}

/// (v + v∘antipode)/2.
template <typename Derived>
Field project_even(const SphereGrid& grid, const Eigen::MatrixBase<Derived>& values) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("project_even: expected one value per node");
  }
  const auto& anti = grid.antipode();
  Field out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    out(i) = 0.5 * (values(i) + values(anti[std::size_t(i)]));
  }
  return out;
}

template <typename Derived>
bool is_even(const SphereGrid& grid, const Eigen::MatrixBase<Derived>& values) {
  const auto& anti = grid.antipode();
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) != values(anti[std::size_t(i)])) return false;
  }
  return true;
}

/// Fourier collocation matrices on n equispaced points of a 2*pi period.
Eigen::MatrixXd fourier_first_derivative(int n);
Eigen::MatrixXd fourier_second_derivative(int n);

}  // namespace dualmink

#endif  // DUALMINK_SPHERE_GRID_HPP
