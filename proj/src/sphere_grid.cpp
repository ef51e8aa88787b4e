#include "dualmink/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dualmink {

namespace {

using Triplet = Eigen::Triplet<double>;

// Negative-sum trick: a derivative matrix must annihilate constants.
void fix_diagonal(Eigen::MatrixXd& d) {
  for (Index i = 0; i < d.rows(); ++i) {
    d(i, i) = 0.0;
    d(i, i) = -d.row(i).sum();
  }
}

Eigen::MatrixXd fd4_first_derivative(int n) {
  const double h = 2.0 * kPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double c1 = 8.0 / (12.0 * h), c2 = -1.0 / (12.0 * h);
  for (int i = 0; i < n; ++i) {
    d(i, (i + 1) % n) += c1;
    d(i, (i + n - 1) % n) -= c1;
    d(i, (i + 2) % n) += c2;
    d(i, (i + n - 2) % n) -= c2;
  }
  fix_diagonal(d);
  return d;
}

Eigen::MatrixXd fd4_second_derivative(int n) {
  const double h = 2.0 * kPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double c1 = 16.0 / (12.0 * h * h), c2 = -1.0 / (12.0 * h * h);
  for (int i = 0; i < n; ++i) {
    d(i, (i + 1) % n) += c1;
    d(i, (i + n - 1) % n) += c1;
    d(i, (i + 2) % n) += c2;
    d(i, (i + n - 2) % n) += c2;
  }
  fix_diagonal(d);
  return d;
}

Eigen::MatrixXd circle_first(int n, DiffScheme scheme) {
  return scheme == DiffScheme::spectral ? fourier_first_derivative(n) : fd4_first_derivative(n);
}

Eigen::MatrixXd circle_second(int n, DiffScheme scheme) {
  return scheme == DiffScheme::spectral ? fourier_second_derivative(n) : fd4_second_derivative(n);
}

SparseMatrix to_sparse(const std::vector<Triplet>& t, Index rows, Index cols) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return m;
}

SparseMatrix select_rows(const SparseMatrix& m, const std::vector<Index>& rows) {
  std::vector<Triplet> t;
  t.reserve(std::size_t(m.nonZeros() / std::max<Index>(1, m.rows()) + 1) * rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (SparseMatrix::InnerIterator it(m, rows[r]); it; ++it) {
      t.emplace_back(Index(r), it.col(), it.value());
    }
  }
  return to_sparse(t, Index(rows.size()), m.cols());
}

SparseMatrix diagonal(const Field& d) {
  SparseMatrix m(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(std::size_t(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d(i));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Field gather(const Field& v, const std::vector<Index>& idx) {
  Field out(Index(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(Index(i)) = v(idx[i]);
  return out;
}

}  // namespace

const char* to_string(DiffScheme scheme) {
  return scheme == DiffScheme::spectral ? "spectral" : "fd4";
}

DiffScheme scheme_from_string(const std::string& name) {
  if (name == "spectral") return DiffScheme::spectral;
  if (name == "fd4") return DiffScheme::fd4;
  throw std::invalid_argument("unknown differentiation scheme '" + name + "'");
}

Eigen::MatrixXd fourier_first_derivative(int n) {
  const double h = 2.0 * kPi / n;
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sign / std::tan(k * h / 2.0);
    }
  }
  fix_diagonal(d);
  return d;
}

Eigen::MatrixXd fourier_second_derivative(int n) {
  const double h = 2.0 * kPi / n;
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double s = std::sin(k * h / 2.0);
      d(i, j) = -0.5 * sign / (s * s);
    }
  }
  // Exact value is -pi^2/(3h^2) - 1/6; the row-sum form keeps constants in the kernel.
  fix_diagonal(d);
  return d;
}

FrameMatrix Derivatives::hessian_at(Index i) const {
  if (hessian.cols() == 1) {
    FrameMatrix m(1, 1);
    m(0, 0) = hessian(i, 0);
    return m;
  }
  FrameMatrix m(2, 2);
  m << hessian(i, 0), hessian(i, 1), hessian(i, 1), hessian(i, 2);
  return m;
}

std::shared_ptr<const SphereGrid> SphereGrid::build(int dim, Resolution res, DiffScheme scheme) {
  std::shared_ptr<SphereGrid> grid(new SphereGrid());
  grid->dim_ = dim;
  grid->res_ = res;
  grid->scheme_ = scheme;
  if (dim == 1) {
    if (res.first % 2 != 0) {
      throw std::invalid_argument("build_grid: odd resolution " + std::to_string(res.first) +
                                  " has no antipodal pairing");
    }
    if (res.first < 16) throw std::invalid_argument("build_grid: circle needs N >= 16");
    grid->res_.second = 0;
    grid->build_circle();
  } else if (dim == 2) {
    if (res.second % 2 != 0) {
      throw std::invalid_argument("build_grid: odd longitude count " + std::to_string(res.second) +
                                  " has no antipodal pairing");
    }
    if (res.first < 8 || res.second < 16) {
      throw std::invalid_argument("build_grid: two-sphere needs N_lat >= 8 and N_lon >= 16");
    }
    grid->build_two_sphere();
  } else {
    throw std::invalid_argument("build_grid: dim must be 1 or 2");
  }

  const Index n = grid->size();
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    if (i < grid->antipode_[std::size_t(i)]) grid->reps_.push_back(i);
  }
  for (std::size_t r = 0; r < grid->reps_.size(); ++r) {
    t.emplace_back(grid->reps_[r], Index(r), 1.0);
    t.emplace_back(grid->antipode_[std::size_t(grid->reps_[r])], Index(r), 1.0);
  }
  grid->expand_ = to_sparse(t, n, Index(grid->reps_.size()));
  return grid;
}

void SphereGrid::build_circle() {
  const int n = res_.first;
  const int half = n / 2;
  nodes_.resize(n, 2);
  angle_.resize(n);
  for (int j = 0; j < half; ++j) {
    const double theta = 2.0 * kPi * j / n;
    nodes_(j, 0) = std::cos(theta);
    nodes_(j, 1) = std::sin(theta);
    nodes_(j + half, 0) = -nodes_(j, 0);
    nodes_(j + half, 1) = -nodes_(j, 1);
  }
  for (int j = 0; j < n; ++j) angle_(j) = 2.0 * kPi * j / n;
  weights_ = Field::Constant(n, 2.0 * kPi / n);
  antipode_.resize(std::size_t(n));
  for (int j = 0; j < n; ++j) antipode_[std::size_t(j)] = (j + half) % n;

  d1_ = circle_first(n, scheme_).sparseView();
  d2_ = circle_second(n, scheme_).sparseView();
}

void SphereGrid::build_two_sphere() {
  const int nlat = res_.first;
  const int nlon = res_.second;
  const int half_lon = nlon / 2;
  const Index n = Index(nlat) * nlon;
  const double dtheta = kPi / nlat;

  Field sin_lat(nlat), cos_lat(nlat), w_lat(nlat);
  for (int i = 0; i < nlat; ++i) {
    const int mirror = nlat - 1 - i;
    if (mirror < i) {
      sin_lat(i) = sin_lat(mirror);
      cos_lat(i) = -cos_lat(mirror);
      w_lat(i) = w_lat(mirror);
      continue;
    }
    const double theta = (i + 0.5) * dtheta;
    sin_lat(i) = std::sin(theta);
    cos_lat(i) = (mirror == i) ? 0.0 : std::cos(theta);
    // Fejer's first rule in mu = cos(theta).
    double s = 0.0;
    for (int j = 1; j <= nlat / 2; ++j) s += std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
    w_lat(i) = (2.0 / nlat) * (1.0 - 2.0 * s);
  }
  Field cos_lon(nlon), sin_lon(nlon);
  for (int k = 0; k < half_lon; ++k) {
    const double phi = 2.0 * kPi * k / nlon;
    cos_lon(k) = std::cos(phi);
    sin_lon(k) = std::sin(phi);
    cos_lon(k + half_lon) = -cos_lon(k);
    sin_lon(k + half_lon) = -sin_lon(k);
  }

  nodes_.resize(n, 3);
  weights_.resize(n);
  angle_.resize(n);
  lon_.resize(n);
  inv_sin_.resize(n);
  cot_.resize(n);
  antipode_.resize(std::size_t(n));
  for (int i = 0; i < nlat; ++i) {
    for (int k = 0; k < nlon; ++k) {
      const Index p = node_index(i, k);
      nodes_(p, 0) = sin_lat(i) * cos_lon(k);
      nodes_(p, 1) = sin_lat(i) * sin_lon(k);
      nodes_(p, 2) = cos_lat(i);
      weights_(p) = w_lat(i) * 2.0 * kPi / nlon;
      angle_(p) = (i + 0.5) * dtheta;
      lon_(p) = 2.0 * kPi * k / nlon;
      inv_sin_(p) = 1.0 / sin_lat(i);
      cot_(p) = cos_lat(i) / sin_lat(i);
      antipode_[std::size_t(p)] = node_index(nlat - 1 - i, (k + half_lon) % nlon);
    }
  }

  // Colatitude derivatives along the great circle through longitudes k and k+pi:
  // circle position p < nlat is (p, k); p >= nlat is (2 nlat - 1 - p, k + pi).
  const int m = 2 * nlat;
  const Eigen::MatrixXd c1 = circle_first(m, scheme_);
  const Eigen::MatrixXd c2 = circle_second(m, scheme_);
  std::vector<Triplet> t1, t2;
  for (int i = 0; i < nlat; ++i) {
    for (int k = 0; k < nlon; ++k) {
      const Index row = node_index(i, k);
      const int kk = (k + half_lon) % nlon;
      for (int p = 0; p < m; ++p) {
        const Index col = p < nlat ? node_index(p, k) : node_index(m - 1 - p, kk);
        if (c1(i, p) != 0.0) t1.emplace_back(row, col, c1(i, p));
        if (c2(i, p) != 0.0) t2.emplace_back(row, col, c2(i, p));
      }
    }
  }
  d1_ = to_sparse(t1, n, n);
  d2_ = to_sparse(t2, n, n);

  const Eigen::MatrixXd l1 = circle_first(nlon, scheme_);
  const Eigen::MatrixXd l2 = circle_second(nlon, scheme_);
  t1.clear();
  t2.clear();
  for (int i = 0; i < nlat; ++i) {
    for (int k = 0; k < nlon; ++k) {
      for (int l = 0; l < nlon; ++l) {
        if (l1(k, l) != 0.0) t1.emplace_back(node_index(i, k), node_index(i, l), l1(k, l));
        if (l2(k, l) != 0.0) t2.emplace_back(node_index(i, k), node_index(i, l), l2(k, l));
      }
    }
  }
  dlon_ = to_sparse(t1, n, n);
  dlon2_ = to_sparse(t2, n, n);
}

SpaceVector SphereGrid::frame(Index i, int k) const {
  SpaceVector e(dim_ + 1);
  if (dim_ == 1) {
    e << -nodes_(i, 1), nodes_(i, 0);
    return e;
  }
  const double st = 1.0 / inv_sin_(i);
  const double ct = nodes_(i, 2);
  const double cp = nodes_(i, 0) / st;
  const double sp = nodes_(i, 1) / st;
  if (k == 0) {
    e << ct * cp, ct * sp, -st;
  } else {
    e << -sp, cp, 0.0;
  }
  return e;
}

Derivatives SphereGrid::differentiate(const Field& values) const {
  if (values.size() != size()) {
    throw std::invalid_argument("differentiate: expected one value per node");
  }
  Derivatives d;
  if (dim_ == 1) {
    d.gradient = d1_ * values;
    d.hessian = d2_ * values;
    d.laplacian = d.hessian.col(0);
    return d;
  }
  const Field vt = d1_ * values;
  const Field vtt = d2_ * values;
  const Field vp = dlon_ * values;
  const Field vpp = dlon2_ * values;
  const Field vtp = d1_ * vp;

  d.gradient.resize(size(), 2);
  d.gradient.col(0) = vt;
  d.gradient.col(1) = inv_sin_.cwiseProduct(vp);
  d.hessian.resize(size(), 3);
  d.hessian.col(0) = vtt;
  d.hessian.col(1) = inv_sin_.cwiseProduct(vtp - cot_.cwiseProduct(vp));
  d.hessian.col(2) = inv_sin_.cwiseAbs2().cwiseProduct(vpp) + cot_.cwiseProduct(vt);
  d.laplacian = d.hessian.col(0) + d.hessian.col(2);
  return d;
}

SparseMatrix SphereGrid::assemble(const OperatorCoefficients& c) const {
  if (dim_ == 1) {
    SparseMatrix m = SparseMatrix(diagonal(c.c11) * d2_);
    m += SparseMatrix(diagonal(c.c1) * d1_);
    m += diagonal(c.c0);
    return m;
  }
  const Field a2 = c.c12.cwiseProduct(inv_sin_);
  const Field a3 = c.c22.cwiseProduct(inv_sin_.cwiseAbs2());
  const Field a4 = c.c22.cwiseProduct(cot_) + c.c1;
  const Field a5 = (c.c2 - c.c12.cwiseProduct(cot_)).cwiseProduct(inv_sin_);
  const SparseMatrix mixed = d1_ * dlon_;
  SparseMatrix m = diagonal(c.c11) * d2_;
  m += SparseMatrix(diagonal(a2) * mixed);
  m += SparseMatrix(diagonal(a3) * dlon2_);
  m += SparseMatrix(diagonal(a4) * d1_);
  m += SparseMatrix(diagonal(a5) * dlon_);
  m += diagonal(c.c0);
  return m;
}

SparseMatrix SphereGrid::assemble_even(const OperatorCoefficients& c) const {
  const auto term = [&](const Field& coeff, const SparseMatrix& op) -> SparseMatrix {
    return SparseMatrix(diagonal(gather(coeff, reps_)) * SparseMatrix(select_rows(op, reps_) * expand_));
  };
  SparseMatrix c0 = diagonal(gather(c.c0, reps_));
  if (dim_ == 1) {
    SparseMatrix m = term(c.c11, d2_);
    m += term(c.c1, d1_);
    m += c0;
    return m;
  }
  const Field a2 = c.c12.cwiseProduct(inv_sin_);
  const Field a3 = c.c22.cwiseProduct(inv_sin_.cwiseAbs2());
  const Field a4 = c.c22.cwiseProduct(cot_) + c.c1;
  const Field a5 = (c.c2 - c.c12.cwiseProduct(cot_)).cwiseProduct(inv_sin_);
  SparseMatrix mixed = select_rows(d1_, reps_) * SparseMatrix(dlon_ * expand_);
  SparseMatrix m = SparseMatrix(diagonal(gather(a2, reps_)) * mixed);
  m += term(c.c11, d2_);
  m += term(a3, dlon2_);
  m += term(a4, d1_);
  m += term(a5, dlon_);
  m += c0;
  return m;
}

Field SphereGrid::expand_even(const Field& rep_values) const {
  if (rep_values.size() != Index(reps_.size())) {
    throw std::invalid_argument("expand_even: expected one value per antipodal pair");
  }
  return expand_ * rep_values;
}

Field SphereGrid::restrict_even(const Field& values) const {
  return gather(values, reps_);
}

Index SphereGrid::nearest_node(const SpaceVector& u) const {
  if (dim_ == 1) {
    double a = std::atan2(u(1), u(0));
    if (a < 0) a += 2.0 * kPi;
    const int n = res_.first;
    return Index(std::lround(a / (2.0 * kPi / n))) % n;
  }
  const int nlat = res_.first, nlon = res_.second;
  const double theta = std::acos(std::clamp(u(2), -1.0, 1.0));
  double phi = std::atan2(u(1), u(0));
  if (phi < 0) phi += 2.0 * kPi;
  const int i0 = int(std::lround(theta / (kPi / nlat) - 0.5));
  const int k0 = int(std::lround(phi / (2.0 * kPi / nlon)));
  Index best = 0;
  double best_dot = -2.0;
  for (int i = std::max(0, i0 - 1); i <= std::min(nlat - 1, i0 + 1); ++i) {
    const bool polar = i <= 1 || i >= nlat - 2;
    const int span = polar ? nlon : 3;
    for (int s = 0; s < span; ++s) {
      const int k = polar ? s : ((k0 - 1 + s) % nlon + nlon) % nlon;
      const Index p = node_index(i, k);
      const double dot = nodes_.row(p).dot(u.transpose());
      if (dot > best_dot) {
        best_dot = dot;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace dualmink
