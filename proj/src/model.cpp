#include "symstat/model.hpp"

#include <algorithm>
#include <random>

#include "symstat/errors.hpp"
#include "symstat/harmonics.hpp"

namespace symstat {

CoefficientIndex::CoefficientIndex(const AngularBasisSet& basis, int l_max, int n_q, std::vector<int> p_set)
    : l_max_(l_max), n_q_(n_q) {
  const int nrep = basis.group().irrep_count();
  require(!p_set.empty(), ErrorKind::InvalidArgument, "p_set is empty");
  require(l_max >= 0 && l_max <= basis.l_max(), ErrorKind::InvalidArgument, "l_max outside the angular basis");
  require(n_q >= 1, ErrorKind::InvalidArgument, "N_q must be >= 1");
  std::sort(p_set.begin(), p_set.end());
  p_set.erase(std::unique(p_set.begin(), p_set.end()), p_set.end());
  for (int p : p_set)
    require(p >= 0 && p < nrep, ErrorKind::InvalidArgument, "irrep " + std::to_string(p + 1) + " not in the group");
  p_set_ = std::move(p_set);
  by_p_.assign(nrep, {});
  for (int p : p_set_) {
    const int d = basis.group().irrep_dim(p);
    for (int l = 0; l <= l_max; ++l) {
      for (int n = 0; n < basis.multiplicity(p, l); ++n) {
        for (int q = 0; q < n_q; ++q) {
          by_p_[p].push_back(static_cast<int>(blocks_.size()));
          blocks_.push_back({p, l, n, q, n_c_, d});
          n_c_ += d;
        }
      }
    }
  }
}

bool CoefficientIndex::has_irrep(int p) const {
  return std::binary_search(p_set_.begin(), p_set_.end(), p);
}

int CoefficientIndex::find(int p, int l, int n, int q) const {
  if (p < 0 || p >= static_cast<int>(by_p_.size())) return -1;
  for (int b : by_p_[p]) {
    const auto& blk = blocks_[b];
    if (blk.l == l && blk.n == n && blk.q == q) return b;
  }
  return -1;
}

const std::vector<int>& CoefficientIndex::blocks_of(int p) const {
  static const std::vector<int> empty;
  if (p < 0 || p >= static_cast<int>(by_p_.size())) return empty;
  return by_p_[p];
}

CoefficientIndex enumerate_coefficients(const AngularBasisSet& basis, int l_max, int n_q, std::vector<int> p_set) {
  return CoefficientIndex(basis, l_max, n_q, std::move(p_set));
}

std::shared_ptr<const SignalModel> make_model(std::shared_ptr<const AngularBasisSet> angular, double radius,
                                              int l_max, int n_q, std::vector<int> p_set) {
  auto m = std::make_shared<SignalModel>();
  m->index = CoefficientIndex(*angular, l_max, n_q, std::move(p_set));
  m->radial = std::make_shared<RadialBasisSet>(radius, l_max, n_q);
  m->angular = std::move(angular);
  return m;
}

bool ModelParams::is_diagonal() const {
  for (const auto& m : v) {
    if (!(m - Eigen::MatrixXd(m.diagonal().asDiagonal())).isZero(0.0)) return false;
  }
  return true;
}

Eigen::VectorXd ModelParams::diag_v() const {
  const auto& idx = model->index;
  Eigen::VectorXd out(idx.n_vec());
  for (size_t k = 0; k < idx.p_set().size(); ++k) {
    const auto& bl = idx.blocks_of(idx.p_set()[k]);
    for (size_t i = 0; i < bl.size(); ++i) out[bl[i]] = v[k](i, i);
  }
  return out;
}

void ModelParams::set_diag_v(const Eigen::VectorXd& values) {
  const auto& idx = model->index;
  require(values.size() == idx.n_vec(), ErrorKind::LengthMismatch, "variance vector length");
  v.resize(idx.p_set().size());
  for (size_t k = 0; k < idx.p_set().size(); ++k) {
    const auto& bl = idx.blocks_of(idx.p_set()[k]);
    v[k] = Eigen::MatrixXd::Zero(bl.size(), bl.size());
    for (size_t i = 0; i < bl.size(); ++i) v[k](i, i) = values[bl[i]];
  }
}

ModelParams make_params(std::shared_ptr<const SignalModel> model, double variance) {
  ModelParams p;
  p.model = std::move(model);
  p.mu = Eigen::VectorXd::Zero(p.model->index.mean_count());
  p.set_diag_v(Eigen::VectorXd::Constant(p.model->index.n_vec(), variance));
  return p;
}

ModelParams params_from_diagonal(std::shared_ptr<const SignalModel> model, Eigen::VectorXd mu,
                                 const Eigen::VectorXd& v) {
  ModelParams p;
  p.model = std::move(model);
  require(mu.size() == p.model->index.mean_count(), ErrorKind::LengthMismatch, "mean vector length");
  p.mu = std::move(mu);
  p.set_diag_v(v);
  return p;
}

Eigen::VectorXd expand_mean(const ModelParams& params) {
  const auto& idx = params.model->index;
  require(params.mu.size() == idx.mean_count(), ErrorKind::LengthMismatch, "mean vector length");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(idx.n_c());
  const auto& bl = idx.blocks_of(0);
  for (size_t i = 0; i < bl.size(); ++i) c[idx.block(bl[i]).offset] = params.mu[i];
  return c;
}

Eigen::VectorXd expand_var_diagonal(const ModelParams& params) {
  require(params.is_diagonal(), ErrorKind::InvalidArgument, "expand_var_diagonal needs diagonal v");
  const auto& idx = params.model->index;
  const Eigen::VectorXd dv = params.diag_v();
  Eigen::VectorXd out(idx.n_c());
  for (int b = 0; b < idx.n_vec(); ++b) {
    const auto& blk = idx.block(b);
    out.segment(blk.offset, blk.dim).setConstant(dv[b]);
  }
  return out;
}

namespace {

void check_positive(const ModelParams& params) {
  const auto& idx = params.model->index;
  require(params.v.size() == idx.p_set().size(), ErrorKind::LengthMismatch, "one v block per irrep in p_set");
  for (size_t k = 0; k < params.v.size(); ++k) {
    const auto& m = params.v[k];
    const auto nb = static_cast<Eigen::Index>(idx.blocks_of(idx.p_set()[k]).size());
    require(m.rows() == nb && m.cols() == nb, ErrorKind::LengthMismatch, "v block size");
    if (nb == 0) continue;
    require(m.diagonal().minCoeff() > 0.0, ErrorKind::ConstraintViolation, "variance parameters must be > 0");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    require(llt.info() == Eigen::Success, ErrorKind::ConstraintViolation, "v block is not positive definite");
  }
}

}  // namespace

ExpandedParams expand_params(const ModelParams& params) {
  check_positive(params);
  const auto& idx = params.model->index;
  ExpandedParams out;
  out.mean = expand_mean(params);
  out.cov = Eigen::MatrixXd::Zero(idx.n_c(), idx.n_c());
  for (size_t k = 0; k < idx.p_set().size(); ++k) {
    const auto& bl = idx.blocks_of(idx.p_set()[k]);
    for (size_t a = 0; a < bl.size(); ++a) {
      for (size_t b = 0; b < bl.size(); ++b) {
        const auto& ba = idx.block(bl[a]);
        const auto& bb = idx.block(bl[b]);
        for (int j = 0; j < ba.dim; ++j) out.cov(ba.offset + j, bb.offset + j) = params.v[k](a, b);
      }
    }
  }
  return out;
}

ModelParams reduce_params(std::shared_ptr<const SignalModel> model, const ExpandedParams& full) {
  const auto& idx = model->index;
  require(full.mean.size() == idx.n_c() && full.cov.rows() == idx.n_c() && full.cov.cols() == idx.n_c(),
          ErrorKind::LengthMismatch, "expanded parameter size");
  ModelParams p;
  p.model = model;
  const auto& b0 = idx.blocks_of(0);
  p.mu.resize(b0.size());
  for (size_t i = 0; i < b0.size(); ++i) p.mu[i] = full.mean[idx.block(b0[i]).offset];
  for (int pp : idx.p_set()) {
    const auto& bl = idx.blocks_of(pp);
    Eigen::MatrixXd m(bl.size(), bl.size());
    for (size_t a = 0; a < bl.size(); ++a)
      for (size_t b = 0; b < bl.size(); ++b) m(a, b) = full.cov(idx.block(bl[a]).offset, idx.block(bl[b]).offset);
    p.v.push_back(std::move(m));
  }
  return p;
}

Eigen::VectorXd feature_vector(const SignalModel& model, const Vec3& x) {
  const auto& idx = model.index;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(idx.n_c());
  const double r = x.norm();
  if (r > model.radius()) return phi;
  const Vec3 u = r > 0.0 ? Vec3(x / r) : Vec3::UnitZ();
  const int lm = idx.l_max();
  std::vector<double> y((lm + 1) * (lm + 1));
  real_sph_harm_upto(lm, u, y);
  Eigen::VectorXd ang;
  int last_p = -1, last_l = -1, last_n = -1;
  for (const auto& blk : idx.blocks()) {
    if (blk.p != last_p || blk.l != last_l || blk.n != last_n) {
      const auto& b = model.angular->slice(blk.l).coeff(blk.p, blk.n);
      ang = b * Eigen::Map<const Eigen::VectorXd>(y.data() + blk.l * blk.l, 2 * blk.l + 1);
      last_p = blk.p;
      last_l = blk.l;
      last_n = blk.n;
    }
    phi.segment(blk.offset, blk.dim) = model.radial->value(blk.l, blk.q, r) * ang;
  }
  return phi;
}

double mean_density(const ModelParams& params, const Vec3& x) {
  return expand_mean(params).dot(feature_vector(*params.model, x));
}

double covariance_density(const ModelParams& params, const Vec3& x1, const Vec3& x2) {
  const auto& idx = params.model->index;
  const Eigen::VectorXd f1 = feature_vector(*params.model, x1);
  const Eigen::VectorXd f2 = feature_vector(*params.model, x2);
  double acc = 0.0;
  for (size_t k = 0; k < idx.p_set().size(); ++k) {
    const auto& bl = idx.blocks_of(idx.p_set()[k]);
    if (bl.empty()) continue;
    const int d = idx.block(bl.front()).dim;
    Eigen::MatrixXd a(bl.size(), d), b(bl.size(), d);
    for (size_t i = 0; i < bl.size(); ++i) {
      a.row(i) = f1.segment(idx.block(bl[i]).offset, d).transpose();
      b.row(i) = f2.segment(idx.block(bl[i]).offset, d).transpose();
    }
    acc += (a.array() * (params.v[k] * b).array()).sum();
  }
  return acc;
}

double variance_density(const ModelParams& params, const Vec3& x) {
  return std::max(0.0, covariance_density(params, x, x));
}

double stddev_density(const ModelParams& params, const Vec3& x) { return std::sqrt(variance_density(params, x)); }

Eigen::VectorXd sample_instance(const ModelParams& params, std::uint64_t seed) {
  check_positive(params);
  const auto& idx = params.model->index;
  Eigen::VectorXd c = expand_mean(params);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (size_t k = 0; k < idx.p_set().size(); ++k) {
    const auto& bl = idx.blocks_of(idx.p_set()[k]);
    if (bl.empty()) continue;
    const int d = idx.block(bl.front()).dim;
    Eigen::MatrixXd z(bl.size(), d);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (int j = 0; j < d; ++j) z(i, j) = normal(rng);
    const Eigen::MatrixXd draw = Eigen::LLT<Eigen::MatrixXd>(params.v[k]).matrixL() * z;
    for (size_t i = 0; i < bl.size(); ++i) c.segment(idx.block(bl[i]).offset, d) += draw.row(i).transpose();
  }
  return c;
}

ConstraintMasks complex_constraint_masks(const PointGroup& group, const ConjugacyMap& cmap) {
  const int nrep = group.irrep_count();
  require(static_cast<int>(cmap.tau.size()) == nrep, ErrorKind::LengthMismatch, "tau size differs from irrep count");
  ConstraintMasks m;
  m.real_irreps = group.has_real_irreps();
  m.cc.assign(nrep, std::vector<bool>(nrep, false));
  m.ccstar.assign(nrep, std::vector<bool>(nrep, false));
  for (int p1 = 0; p1 < nrep; ++p1) {
    for (int p2 = 0; p2 < nrep; ++p2) {
      m.cc[p1][p2] = p1 == cmap.tau[p2];
      m.ccstar[p1][p2] = p1 == p2;
    }
  }
  return m;
}

}  // namespace symstat
