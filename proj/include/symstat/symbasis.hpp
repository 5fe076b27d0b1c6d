#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "symstat/harmonics.hpp"
#include "symstat/pointgroup.hpp"

namespace symstat {

/// Symmetry-adapted angular functions of one degree l.
///
/// For irrep p and multiplicity index n, coeff(p, n) is a d_p x (2l+1)
/// matrix B with I_{p;l,n}(u) = B * Y_l(u). The functions satisfy
///   B_{p,n} B_{p',n'}^T = delta delta I           (orthonormality)
///   I_{p;l,n}(R_g^{-1} u) = Gamma^p(g)^T I(u)     (transformation)
class AngularSlice {
 public:
  AngularSlice(int l, std::vector<std::vector<Eigen::MatrixXd>> coeffs);

  int degree() const { return l_; }
  int irrep_count() const { return static_cast<int>(coeffs_.size()); }
  /// N_n(p, l).
  int multiplicity(int p) const { return static_cast<int>(coeffs_.at(p).size()); }
  /// Throws NotFound for absent (p, n).
  const Eigen::MatrixXd& coeff(int p, int n) const;

 private:
  int l_;
  std::vector<std::vector<Eigen::MatrixXd>> coeffs_;
};

/// Complex-irrep counterpart used for groups such as C_n (n >= 3).
class ComplexAngularSlice {
 public:
  ComplexAngularSlice(int l, std::vector<std::vector<Eigen::MatrixXcd>> coeffs);

  int degree() const { return l_; }
  int multiplicity(int p) const { return static_cast<int>(coeffs_.at(p).size()); }
  const Eigen::MatrixXcd& coeff(int p, int n) const;

 private:
  int l_;
  std::vector<std::vector<Eigen::MatrixXcd>> coeffs_;
};

/// Degree-l slice. Requires real irreps; throws InvalidArgument otherwise,
/// InternalError if the multiplicities fail to add up to 2l+1.
AngularSlice build_angular_basis(const PointGroup& group, int l);

/// Degree-l slice over complex irreps (works for any group).
ComplexAngularSlice build_complex_angular_basis(const PointGroup& group, int l);

/// I_{p;l,n}(u) = B_{p,l,n} Y_l(u).
Eigen::VectorXd evaluate_angular(const AngularSlice& slice, int p, int n, const Vec3& u);
Eigen::VectorXd evaluate_angular(const AngularSlice& slice, int p, int n, const Direction& u);

/// Generalized projection operator P^p_{i,j} = (d_p/N_g) sum_g conj(Gamma^p_{ij}(g)) D_l(R_g),
/// real groups only. Exposed for projector property tests.
Eigen::MatrixXd generalized_projector(const PointGroup& group, std::span<const Eigen::MatrixXd> wigner, int p,
                                      int i, int j);

/// The whole family for 0 <= l <= l_max, shared by the model and imaging code.
class AngularBasisSet {
 public:
  AngularBasisSet(std::shared_ptr<const PointGroup> group, std::vector<AngularSlice> slices);

  const PointGroup& group() const { return *group_; }
  std::shared_ptr<const PointGroup> group_ptr() const { return group_; }
  int l_max() const { return static_cast<int>(slices_.size()) - 1; }
  const AngularSlice& slice(int l) const { return slices_.at(l); }
  int multiplicity(int p, int l) const { return slices_.at(l).multiplicity(p); }

 private:
  std::shared_ptr<const PointGroup> group_;
  std::vector<AngularSlice> slices_;
};

/// Builds every degree up to l_max; degrees are independent and are split
/// over `workers` threads.
AngularBasisSet build_angular_basis_set(std::shared_ptr<const PointGroup> group, int l_max, int workers = 1);

/// counts[l][p] = N_n(p, l), from the character inner product
/// (1/N_g) sum_g chi_l(g) conj(chi^p(g)) with chi_l(theta) = sin((2l+1)theta/2)/sin(theta/2).
std::vector<std::vector<int>> tabulate_counts(const PointGroup& group, int l_max);

}  // namespace symstat
