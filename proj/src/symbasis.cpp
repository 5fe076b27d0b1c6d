#include "symstat/symbasis.hpp"

#include <cmath>
#include <optional>

#include "symstat/errors.hpp"
#include "symstat/parallel.hpp"

namespace symstat {

namespace {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Scalar irrep_entry(const PointGroup& group, int p, int g, int i, int j) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return group.irreps().real(p, g)(i, j);
  } else {
    return group.irreps().complex(p, g)(i, j);
  }
}

template <class Scalar>
MatrixX<Scalar> projector(const PointGroup& group, std::span<const Eigen::MatrixXd> wigner, int p, int i, int j) {
  const int d = group.irrep_dim(p);
  const auto n = wigner.front().rows();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, n);
  for (int g = 0; g < group.size(); ++g) {
    Scalar c = irrep_entry<Scalar>(group, p, g, i, j);
    if constexpr (!std::is_same_v<Scalar, double>) c = std::conj(c);
    out += c * wigner[g].template cast<Scalar>();
  }
  return out * (static_cast<double>(d) / group.size());
}

// Orthonormal basis of the range of a Hermitian projector, picking columns
// greedily by residual norm (lowest index on ties) so the result is
// reproducible bit for bit.
template <class Scalar>
MatrixX<Scalar> range_basis(const MatrixX<Scalar>& proj, int rank) {
  MatrixX<Scalar> resid = proj;
  MatrixX<Scalar> basis(proj.rows(), rank);
  for (int k = 0; k < rank; ++k) {
    const Eigen::VectorXd norms = resid.colwise().norm().transpose();
    const double top = norms.maxCoeff();
    if (!(top > 1e-8)) raise(ErrorKind::InternalError, "projector rank below its trace");
    Eigen::Index pick = 0;
    while (norms[pick] < (1.0 - 1e-10) * top) ++pick;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> q = resid.col(pick) / norms[pick];
    basis.col(k) = q;
    resid -= q * (q.adjoint() * resid);
  }
  if (rank < proj.cols() && resid.colwise().norm().maxCoeff() > 1e-6)
    raise(ErrorKind::InternalError, "projector rank above its trace");
  return basis;
}

// D(R_g) for every element. Elements that are products of two already
// known ones come from a matrix product; only the rest go through the
// harmonic fit, which is far more expensive at high l.
std::vector<Eigen::MatrixXd> group_wigner(const PointGroup& group, int l) {
  const int order = group.size();
  std::vector<Eigen::MatrixXd> d(order);
  std::vector<int> known{0};
  d[0] = Eigen::MatrixXd::Identity(2 * l + 1, 2 * l + 1);
  while (static_cast<int>(known.size()) < order) {
    bool grew = false;
    for (int g = 1; g < order; ++g) {
      if (d[g].size() != 0) continue;
      for (size_t ia = 1; ia < known.size() && d[g].size() == 0; ++ia)
        for (size_t ib = 1; ib < known.size(); ++ib)
          if (group.multiply(known[ia], known[ib]) == g) {
            d[g] = d[known[ia]] * d[known[ib]];
            break;
          }
      if (d[g].size() != 0) {
        known.push_back(g);
        grew = true;
      }
    }
    if (grew) continue;
    for (int g = 1; g < order; ++g)
      if (d[g].size() == 0) {
        d[g] = real_wigner_d(l, group.element(g)).matrix;
        known.push_back(g);
        break;
      }
  }
  return d;
}

template <class Scalar>
std::vector<std::vector<MatrixX<Scalar>>> build_slice(const PointGroup& group, int l) {
  require(l >= 0, ErrorKind::InvalidArgument, "degree must be >= 0");
  const auto wigner = group_wigner(group, l);
  const int nrep = group.irrep_count();
  std::vector<std::vector<MatrixX<Scalar>>> coeffs(nrep);
  int total = 0;
  for (int p = 0; p < nrep; ++p) {
    const int d = group.irrep_dim(p);
    std::vector<MatrixX<Scalar>> column_ops;
    for (int i = 0; i < d; ++i) column_ops.push_back(projector<Scalar>(group, wigner, p, i, 0));
    const double trace = std::real(column_ops[0].trace());
    const int rank = static_cast<int>(std::lround(trace));
    if (std::abs(trace - rank) > 1e-6) raise(ErrorKind::InternalError, "non-integer projector trace");
    if (rank == 0) continue;
    const MatrixX<Scalar> seeds = range_basis<Scalar>(column_ops[0], rank);
    for (int n = 0; n < rank; ++n) {
      MatrixX<Scalar> b(d, 2 * l + 1);
      for (int i = 0; i < d; ++i) b.row(i) = (column_ops[i] * seeds.col(n)).transpose();
      coeffs[p].push_back(std::move(b));
    }
    total += d * rank;
  }
  if (total != 2 * l + 1)
    raise(ErrorKind::InternalError, "basis components at l=" + std::to_string(l) + " sum to " +
                                        std::to_string(total) + ", expected " + std::to_string(2 * l + 1));
  return coeffs;
}

}  // namespace

AngularSlice::AngularSlice(int l, std::vector<std::vector<Eigen::MatrixXd>> coeffs)
    : l_(l), coeffs_(std::move(coeffs)) {}

const Eigen::MatrixXd& AngularSlice::coeff(int p, int n) const {
  if (p < 0 || p >= irrep_count() || n < 0 || n >= multiplicity(p))
    raise(ErrorKind::NotFound, "no basis function (p=" + std::to_string(p) + ", l=" + std::to_string(l_) +
                                   ", n=" + std::to_string(n) + ")");
  return coeffs_[p][n];
}

ComplexAngularSlice::ComplexAngularSlice(int l, std::vector<std::vector<Eigen::MatrixXcd>> coeffs)
    : l_(l), coeffs_(std::move(coeffs)) {}

const Eigen::MatrixXcd& ComplexAngularSlice::coeff(int p, int n) const {
  if (p < 0 || p >= static_cast<int>(coeffs_.size()) || n < 0 || n >= multiplicity(p))
    raise(ErrorKind::NotFound, "no complex basis function");
  return coeffs_[p][n];
}

AngularSlice build_angular_basis(const PointGroup& group, int l) {
  require(group.has_real_irreps(), ErrorKind::InvalidArgument,
          "build_angular_basis needs real irreps; use build_complex_angular_basis");
  return AngularSlice(l, build_slice<double>(group, l));
}

ComplexAngularSlice build_complex_angular_basis(const PointGroup& group, int l) {
  return ComplexAngularSlice(l, build_slice<cdouble>(group, l));
}

Eigen::MatrixXd generalized_projector(const PointGroup& group, std::span<const Eigen::MatrixXd> wigner, int p,
                                      int i, int j) {
  return projector<double>(group, wigner, p, i, j);
}

Eigen::VectorXd evaluate_angular(const AngularSlice& slice, int p, int n, const Vec3& u) {
  const auto& b = slice.coeff(p, n);
  Eigen::VectorXd y(2 * slice.degree() + 1);
  real_sph_harm_degree(slice.degree(), u, std::span<double>(y.data(), y.size()));
  return b * y;
}

Eigen::VectorXd evaluate_angular(const AngularSlice& slice, int p, int n, const Direction& u) {
  return evaluate_angular(slice, p, n, u.unit_vector());
}

AngularBasisSet::AngularBasisSet(std::shared_ptr<const PointGroup> group, std::vector<AngularSlice> slices)
    : group_(std::move(group)), slices_(std::move(slices)) {}

AngularBasisSet build_angular_basis_set(std::shared_ptr<const PointGroup> group, int l_max, int workers) {
  require(l_max >= 0, ErrorKind::InvalidArgument, "l_max must be >= 0");
  std::vector<std::optional<AngularSlice>> built(l_max + 1);
  // Largest degrees first: they dominate the cost.
  parallel_for(l_max + 1, workers, [&](int k) { built[l_max - k].emplace(build_angular_basis(*group, l_max - k)); });

  std::vector<AngularSlice> slices;
  slices.reserve(l_max + 1);
  for (auto& s : built) slices.push_back(std::move(*s));
  return AngularBasisSet(std::move(group), std::move(slices));
}

std::vector<std::vector<int>> tabulate_counts(const PointGroup& group, int l_max) {
  const int order = group.size();
  std::vector<double> angle(order);
  for (int g = 0; g < order; ++g) {
    angle[g] = std::acos(std::clamp((group.element(g).trace() - 1.0) / 2.0, -1.0, 1.0));
  }
  std::vector<std::vector<int>> counts(l_max + 1, std::vector<int>(group.irrep_count(), 0));
  for (int l = 0; l <= l_max; ++l) {
    for (int p = 0; p < group.irrep_count(); ++p) {
      cdouble acc = 0.0;
      for (int g = 0; g < order; ++g) {
        const double t = angle[g];
        const double chi = t < 1e-12 ? 2.0 * l + 1.0 : std::sin((2.0 * l + 1.0) * t / 2.0) / std::sin(t / 2.0);
        acc += chi * std::conj(group.irreps().character(p, g));
      }
      const double m = acc.real() / order;
      const long r = std::lround(m);
      if (std::abs(m - r) > 1e-6 || std::abs(acc.imag()) / order > 1e-6)
        raise(ErrorKind::InternalError, "non-integer irrep multiplicity");
      counts[l][p] = static_cast<int>(r);
    }
  }
  return counts;
}

}  // namespace symstat
