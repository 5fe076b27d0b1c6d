#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "symstat/pointgroup.hpp"
#include "symstat/radial.hpp"
#include "symstat/symbasis.hpp"

namespace symstat {

/// One (p, zeta = (l, n), q) vector coefficient: d_p consecutive scalars.
struct CoefficientBlock {
  int p = 0;
  int l = 0;
  int n = 0;
  int q = 0;
  int offset = 0;  // flat index of j = 0
  int dim = 1;     // d_p
};

/// Flat ordering of the coefficient vector: p slowest, then (l, n), then q,
/// then the component j fastest. p values are zero-based irrep indices.
class CoefficientIndex {
 public:
  CoefficientIndex() = default;
  CoefficientIndex(const AngularBasisSet& basis, int l_max, int n_q, std::vector<int> p_set);

  int l_max() const { return l_max_; }
  int n_q() const { return n_q_; }
  const std::vector<int>& p_set() const { return p_set_; }
  bool has_irrep(int p) const;

  int n_c() const { return n_c_; }
  int n_vec() const { return static_cast<int>(blocks_.size()); }
  const std::vector<CoefficientBlock>& blocks() const { return blocks_; }
  const CoefficientBlock& block(int b) const { return blocks_.at(b); }
  /// Block index of (p, l, n, q), or -1.
  int find(int p, int l, int n, int q) const;
  /// Blocks belonging to irrep p, in flat order.
  const std::vector<int>& blocks_of(int p) const;
  /// Number of blocks with p = 0 (entries of mu).
  int mean_count() const { return static_cast<int>(blocks_of(0).size()); }

 private:
  int l_max_ = 0;
  int n_q_ = 0;
  int n_c_ = 0;
  std::vector<int> p_set_;
  std::vector<CoefficientBlock> blocks_;
  std::vector<std::vector<int>> by_p_;
};

/// Throws InvalidArgument if p_set has entries outside the group's irreps,
/// is empty, or l_max exceeds the basis.
CoefficientIndex enumerate_coefficients(const AngularBasisSet& basis, int l_max, int n_q, std::vector<int> p_set);

/// Everything needed to turn coefficients into densities and images.
struct SignalModel {
  std::shared_ptr<const AngularBasisSet> angular;
  std::shared_ptr<const RadialBasisSet> radial;
  CoefficientIndex index;

  const PointGroup& group() const { return angular->group(); }
  double radius() const { return radial->radius(); }
};

/// Builds group-independent pieces for the given basis: radial functions on
/// [0, R] and the coefficient index.
std::shared_ptr<const SignalModel> make_model(std::shared_ptr<const AngularBasisSet> angular, double radius,
                                              int l_max, int n_q, std::vector<int> p_set);

/// Reduced parameters.
///   mu: one value per p = 0 block (the only blocks with nonzero mean).
///   v[k]: symmetric matrix over the blocks of irrep p_set[k]; the covariance
///         of block pair (b, b') is v[k](b, b') * I_{d_p}.
struct ModelParams {
  std::shared_ptr<const SignalModel> model;
  Eigen::VectorXd mu;
  std::vector<Eigen::MatrixXd> v;

  bool is_diagonal() const;
  /// Diagonal of all v blocks in flat block order (length N_vec).
  Eigen::VectorXd diag_v() const;
  void set_diag_v(const Eigen::VectorXd& values);
};

/// mu = 0 and diagonal v filled with `variance`.
ModelParams make_params(std::shared_ptr<const SignalModel> model, double variance);
ModelParams params_from_diagonal(std::shared_ptr<const SignalModel> model, Eigen::VectorXd mu, const Eigen::VectorXd& v);

struct ExpandedParams {
  Eigen::VectorXd mean;  // c bar, length N_c
  Eigen::MatrixXd cov;   // V, N_c x N_c
};

/// Throws ConstraintViolation if any v block is not positive definite.
ExpandedParams expand_params(const ModelParams& params);
/// c bar only; no positivity check.
Eigen::VectorXd expand_mean(const ModelParams& params);
/// Diagonal of V. Requires diagonal v.
Eigen::VectorXd expand_var_diagonal(const ModelParams& params);

/// Inverse of expand_params on a constrained (c bar, V) pair.
ModelParams reduce_params(std::shared_ptr<const SignalModel> model, const ExpandedParams& full);

/// phi(x) with rho(x) = c^T phi(x); zero vector outside the support.
Eigen::VectorXd feature_vector(const SignalModel& model, const Vec3& x);

double mean_density(const ModelParams& params, const Vec3& x);
double covariance_density(const ModelParams& params, const Vec3& x1, const Vec3& x2);
double variance_density(const ModelParams& params, const Vec3& x);
double stddev_density(const ModelParams& params, const Vec3& x);

/// c ~ N(c bar, V). Deterministic for a given seed.
Eigen::VectorXd sample_instance(const ModelParams& params, std::uint64_t seed);

/// Allowed (p1, p2) block pairs of C^{c,c} (p1 = tau(p2)) and C^{c,c*}
/// (p1 = p2), zero-based.
struct ConstraintMasks {
  std::vector<std::vector<bool>> cc;
  std::vector<std::vector<bool>> ccstar;
  /// Set for real-irrep groups, where tau is the identity and the two masks
  /// coincide.
  bool real_irreps = false;
};

ConstraintMasks complex_constraint_masks(const PointGroup& group, const ConjugacyMap& cmap);

}  // namespace symstat
