#include "symstat/pointgroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "symstat/errors.hpp"

namespace symstat {

namespace {

using RealRep = std::vector<Eigen::MatrixXd>;

int nearest_element(const std::vector<Mat3>& elements, const Mat3& m, double* distance) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int g = 0; g < static_cast<int>(elements.size()); ++g) {
    const double d = (elements[g] - m).norm();
    if (d < best_d) {
      best_d = d;
      best = g;
    }
  }
  if (distance) *distance = best_d;
  return best;
}

// Rotation angle in [0, pi] and a canonical unit axis.
std::pair<double, Vec3> angle_axis(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(c);
  Vec3 axis = Vec3::UnitZ();
  if (angle < 1e-9) return {0.0, axis};
  if (std::numbers::pi - angle > 1e-6) {
    axis = Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    axis.normalize();
    return {angle, axis};
  }
  // Half turn: R + I = 2 a a^T.
  const Mat3 s = (r + Mat3::Identity()) / 2.0;
  int col = 0;
  s.diagonal().maxCoeff(&col);
  axis = s.col(col).normalized();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) > 1e-9) {
      if (axis[i] < 0) axis = -axis;
      break;
    }
  }
  return {angle, axis};
}

bool element_order(const Mat3& a, const Mat3& b) {
  const auto [ta, xa] = angle_axis(a);
  const auto [tb, xb] = angle_axis(b);
  constexpr double eps = 1e-9;
  if (std::abs(ta - tb) > eps) return ta < tb;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(xa[i] - xb[i]) > eps) return xa[i] < xb[i];
  }
  return false;
}

std::vector<cdouble> characters(const RealRep& rep) {
  std::vector<cdouble> chi(rep.size());
  for (size_t g = 0; g < rep.size(); ++g) chi[g] = rep[g].trace();
  return chi;
}

bool same_characters(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  for (size_t g = 0; g < a.size(); ++g) {
    if (std::abs(a[g] - b[g]) > 1e-8) return false;
  }
  return true;
}

double character_norm(const RealRep& rep) {
  double s = 0.0;
  for (const auto& m : rep) s += m.trace() * m.trace();
  return s / static_cast<double>(rep.size());
}

// Splits a real orthogonal representation into irreducible pieces using the
// eigenspaces of a random element of its commutant algebra.
std::vector<RealRep> decompose(const RealRep& rep, std::mt19937_64& rng, int depth = 0) {
  const int n = static_cast<int>(rep.front().rows());
  if (std::abs(character_norm(rep) - 1.0) < 1e-8) return {rep};
  if (depth > 8) raise(ErrorKind::InternalError, "irrep decomposition did not separate subspaces");

  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) x(i, j) = x(j, i) = normal(rng);
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : rep) avg += t * x * t.transpose();
  avg /= static_cast<double>(rep.size());
  avg = 0.5 * (avg + avg.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(avg);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

  std::vector<RealRep> out;
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    while (stop < n && lam[stop] - lam[stop - 1] < 1e-7 * scale) ++stop;
    const Eigen::MatrixXd u = eig.eigenvectors().middleCols(start, stop - start);
    RealRep sub;
    sub.reserve(rep.size());
    for (const auto& t : rep) sub.push_back(u.transpose() * t * u);
    for (auto& piece : decompose(sub, rng, depth + 1)) out.push_back(std::move(piece));
    start = stop;
  }
  return out;
}

RealRep kronecker(const RealRep& a, const RealRep& b) {
  RealRep out;
  out.reserve(a.size());
  for (size_t g = 0; g < a.size(); ++g) {
    const auto da = a[g].rows();
    const auto db = b[g].rows();
    Eigen::MatrixXd k(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j) k.block(i * db, j * db, db, db) = a[g](i, j) * b[g];
    out.push_back(std::move(k));
  }
  return out;
}

// Real irreps of a finite rotation group, generated from the trivial and
// defining representations by decomposing tensor products.
std::vector<RealRep> real_irreps_from_rotations(const std::vector<Mat3>& elements) {
  const int order = static_cast<int>(elements.size());
  std::vector<RealRep> known;
  known.push_back(RealRep(order, Eigen::MatrixXd::Ones(1, 1)));
  RealRep defining;
  for (const auto& r : elements) defining.push_back(r);
  known.push_back(defining);

  std::vector<std::vector<cdouble>> chars{characters(known[0]), characters(known[1])};
  auto dim_sum = [&] {
    int s = 0;
    for (const auto& k : known) s += static_cast<int>(k.front().rows() * k.front().rows());
    return s;
  };

  std::mt19937_64 rng(0x5eed1c05a);
  for (int round = 0; round < 6 && dim_sum() < order; ++round) {
    const size_t current = known.size();
    for (size_t a = 1; a < current && dim_sum() < order; ++a) {
      for (size_t b = a; b < current && dim_sum() < order; ++b) {
        for (auto& piece : decompose(kronecker(known[a], known[b]), rng)) {
          const auto chi = characters(piece);
          const bool seen = std::any_of(chars.begin(), chars.end(),
                                        [&](const auto& c) { return same_characters(c, chi); });
          if (!seen) {
            chars.push_back(chi);
            known.push_back(std::move(piece));
          }
        }
      }
    }
  }
  if (dim_sum() != order) raise(ErrorKind::InternalError, "irrep search did not complete");
  std::stable_sort(known.begin(), known.end(),
                   [](const RealRep& a, const RealRep& b) { return a.front().rows() < b.front().rows(); });
  return known;
}

}  // namespace

// ---------------------------------------------------------------------------

IrrepTable::IrrepTable(FieldKind kind, std::vector<std::vector<Eigen::MatrixXcd>> mats)
    : kind_(kind), complex_(std::move(mats)) {
  if (kind_ == FieldKind::RealOrthogonal) {
    real_.resize(complex_.size());
    for (size_t p = 0; p < complex_.size(); ++p)
      for (const auto& m : complex_[p]) real_[p].push_back(m.real());
  }
}

IrrepTable IrrepTable::from_real(std::vector<std::vector<Eigen::MatrixXd>> mats) {
  std::vector<std::vector<Eigen::MatrixXcd>> c(mats.size());
  for (size_t p = 0; p < mats.size(); ++p)
    for (const auto& m : mats[p]) c[p].push_back(m.cast<cdouble>());
  IrrepTable t;
  t.kind_ = FieldKind::RealOrthogonal;
  t.complex_ = std::move(c);
  t.real_ = std::move(mats);
  return t;
}

std::vector<int> IrrepTable::dims() const {
  std::vector<int> d;
  for (int p = 0; p < count(); ++p) d.push_back(dim(p));
  return d;
}

const Eigen::MatrixXd& IrrepTable::real(int p, int g) const {
  require(kind_ == FieldKind::RealOrthogonal, ErrorKind::InvalidArgument,
          "real irrep matrices requested from a complex irrep table");
  return real_.at(p).at(g);
}

PointGroup::PointGroup(GroupKind kind, int cyclic_order, std::vector<Mat3> elements, IrrepTable irreps)
    : kind_(kind), cyclic_order_(cyclic_order), elements_(std::move(elements)), irreps_(std::move(irreps)) {
  const int n = size();
  mult_.assign(static_cast<size_t>(n) * n, -1);
  inverse_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double d = 0.0;
      const int g = nearest_element(elements_, elements_[a] * elements_[b], &d);
      if (d < kElementMatchTol) mult_[a * n + b] = g;
      if (g == 0 && d < kElementMatchTol) inverse_[a] = b;
    }
  }
}

std::string PointGroup::name() const {
  switch (kind_) {
    case GroupKind::Icosahedral: return "I";
    case GroupKind::Cyclic: return "C" + std::to_string(cyclic_order_);
    case GroupKind::Trivial: return "trivial";
  }
  return "?";
}

PointGroup build_icosahedral() {
  // Five-fold axis on +z; the generating half turn is about the edge
  // midpoint axis lying in the x-z plane (half the vertex-vertex angle atan 2).
  const double half = std::atan(2.0) / 2.0;
  const Mat3 c5 = Eigen::AngleAxisd(2.0 * std::numbers::pi / 5.0, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 c2 =
      Eigen::AngleAxisd(std::numbers::pi, Vec3(std::sin(half), 0.0, std::cos(half))).toRotationMatrix();

  std::vector<Mat3> elements{Mat3::Identity()};
  for (size_t i = 0; i < elements.size(); ++i) {
    for (const Mat3& gen : {c5, c2}) {
      const Mat3 prod = elements[i] * gen;
      double d = 0.0;
      nearest_element(elements, prod, &d);
      if (d > kElementMatchTol) elements.push_back(prod);
    }
    if (elements.size() > 60) raise(ErrorKind::InternalError, "icosahedral closure exceeded 60 elements");
  }
  if (elements.size() != 60) raise(ErrorKind::InternalError, "icosahedral closure did not reach 60 elements");
  std::sort(elements.begin() + 1, elements.end(), element_order);

  auto reps = real_irreps_from_rotations(elements);
  std::vector<std::vector<Eigen::MatrixXd>> mats(reps.begin(), reps.end());
  PointGroup group(GroupKind::Icosahedral, 0, std::move(elements), IrrepTable::from_real(std::move(mats)));

  const auto report = verify_group(group);
  if (!report.passed() || group.irrep_count() != 5)
    raise(ErrorKind::InternalError, "icosahedral group failed verification");
  return group;
}

PointGroup build_cyclic(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "cyclic group order must be >= 1");
  std::vector<Mat3> elements;
  std::vector<std::vector<Eigen::MatrixXcd>> mats(n);
  for (int k = 0; k < n; ++k) {
    elements.push_back(Eigen::AngleAxisd(2.0 * std::numbers::pi * k / n, Vec3::UnitZ()).toRotationMatrix());
  }
  elements[0] = Mat3::Identity();
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < n; ++k) {
      // Reduce the exponent so exact values (1, i, -1, -i) come out exact.
      const int e = (p * k) % n;
      cdouble z = std::polar(1.0, 2.0 * std::numbers::pi * e / n);
      if (4 * e == n) z = {0.0, 1.0};
      if (2 * e == n) z = {-1.0, 0.0};
      if (4 * e == 3 * n) z = {0.0, -1.0};
      if (e == 0) z = {1.0, 0.0};
      mats[p].push_back(Eigen::MatrixXcd::Constant(1, 1, z));
    }
  }
  const FieldKind kind = n <= 2 ? FieldKind::RealOrthogonal : FieldKind::ComplexUnitary;
  return PointGroup(GroupKind::Cyclic, n, std::move(elements), IrrepTable(kind, std::move(mats)));
}

PointGroup build_trivial() {
  std::vector<std::vector<Eigen::MatrixXd>> mats{{Eigen::MatrixXd::Ones(1, 1)}};
  return PointGroup(GroupKind::Trivial, 1, {Mat3::Identity()}, IrrepTable::from_real(std::move(mats)));
}

PointGroup group_from_name(const std::string& name) {
  if (name == "I" || name == "icosahedral") return build_icosahedral();
  if (name == "trivial" || name == "asym" || name == "C1") return name == "C1" ? build_cyclic(1) : build_trivial();
  if (name.size() > 1 && (name[0] == 'C' || name[0] == 'c')) {
    try {
      size_t used = 0;
      const int n = std::stoi(name.substr(1), &used);
      if (used == name.size() - 1) return build_cyclic(n);
    } catch (const std::logic_error&) {
    }
  }
  raise(ErrorKind::InvalidArgument, "unknown point group '" + name + "'");
}

ConjugacyMap conjugate_irrep_permutation(const PointGroup& group) {
  const auto& irreps = group.irreps();
  const int nrep = irreps.count();
  const int order = group.size();
  ConjugacyMap out;
  out.tau.assign(nrep, -1);
  out.similarity.resize(nrep);

  for (int p = 0; p < nrep; ++p) {
    const int d = irreps.dim(p);
    if (irreps.field_kind() == FieldKind::RealOrthogonal) {
      out.tau[p] = p;
      out.similarity[p] = Eigen::MatrixXcd::Identity(d, d);
      continue;
    }
    for (int t = 0; t < nrep && out.tau[p] < 0; ++t) {
      if (irreps.dim(t) != d) continue;
      bool match = true;
      for (int g = 0; g < order && match; ++g)
        match = std::abs(irreps.character(t, g) - std::conj(irreps.character(p, g))) < 1e-8;
      if (match) out.tau[p] = t;
    }
    if (out.tau[p] < 0) raise(ErrorKind::NotFound, "no irrep matches the conjugate of irrep " + std::to_string(p));

    // Intertwiner S with S conj(G^p) = G^tau S, averaged over the group.
    const int t = out.tau[p];
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd seed = Eigen::MatrixXcd::Identity(d, d);
    for (int attempt = 0; attempt < 4 && s.norm() < 1e-8; ++attempt) {
      s.setZero();
      for (int g = 0; g < order; ++g) s += irreps.complex(t, g) * seed * irreps.complex(p, g).transpose();
      seed = Eigen::MatrixXcd::Random(d, d);
    }
    s *= std::sqrt(static_cast<double>(d)) / s.norm();
    out.similarity[p] = s;
    for (int g = 0; g < order; ++g) {
      const Eigen::MatrixXcd lhs = irreps.complex(p, g).conjugate();
      const Eigen::MatrixXcd rhs = s.inverse() * irreps.complex(t, g) * s;
      if ((lhs - rhs).norm() > 1e-8)
        raise(ErrorKind::NotFound, "conjugate similarity failed for irrep " + std::to_string(p));
    }
  }
  return out;
}

bool ValidationReport::passed() const { return failures().empty(); }

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> f;
  if (!(orthogonality <= kOrthogonalityTol)) f.push_back("orthogonality");
  if (!(determinant <= kOrthogonalityTol)) f.push_back("determinant");
  if (!(closure <= kElementMatchTol)) f.push_back("closure");
  if (!(identity <= kOrthogonalityTol)) f.push_back("identity");
  if (!inverses) f.push_back("inverses");
  if (!(homomorphism <= kHomomorphismTol)) f.push_back("homomorphism");
  if (!(unitarity <= kHomomorphismTol)) f.push_back("unitarity");
  if (!(schur <= kSchurTol)) f.push_back("schur");
  if (!(characters <= kSchurTol)) f.push_back("characters");
  return f;
}

ValidationReport verify_group(const PointGroup& group) {
  ValidationReport rep;
  const auto& el = group.elements();
  const int n = group.size();
  for (const auto& r : el) {
    rep.orthogonality = std::max(rep.orthogonality, (r.transpose() * r - Mat3::Identity()).norm());
    rep.determinant = std::max(rep.determinant, std::abs(r.determinant() - 1.0));
  }
  rep.identity = (el.front() - Mat3::Identity()).norm();

  std::vector<int> prod(static_cast<size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    bool has_inverse = false;
    for (int b = 0; b < n; ++b) {
      double d = 0.0;
      prod[a * n + b] = nearest_element(el, el[a] * el[b], &d);
      rep.closure = std::max(rep.closure, d);
      if ((el[a] * el[b] - Mat3::Identity()).norm() < kElementMatchTol) has_inverse = true;
    }
    rep.inverses = rep.inverses && has_inverse;
  }

  const auto& irreps = group.irreps();
  const int nrep = irreps.count();
  for (int p = 0; p < nrep; ++p) {
    const int d = irreps.dim(p);
    rep.dimension_sum += d * d;
    for (int a = 0; a < n; ++a) {
      const auto& ga = irreps.complex(p, a);
      rep.unitarity = std::max(rep.unitarity, (ga.adjoint() * ga - Eigen::MatrixXcd::Identity(d, d)).norm());
      for (int b = 0; b < n; ++b) {
        rep.homomorphism =
            std::max(rep.homomorphism, (ga * irreps.complex(p, b) - irreps.complex(p, prod[a * n + b])).norm());
      }
    }
  }

  for (int p = 0; p < nrep; ++p) {
    const int dp = irreps.dim(p);
    for (int q = 0; q < nrep; ++q) {
      const int dq = irreps.dim(q);
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dp * dp, dq * dq);
      cdouble chi = 0.0;
      for (int g = 0; g < n; ++g) {
        const auto& a = irreps.complex(p, g);
        const auto& b = irreps.complex(q, g);
        const Eigen::Map<const Eigen::VectorXcd> va(a.data(), dp * dp);
        const Eigen::Map<const Eigen::VectorXcd> vb(b.data(), dq * dq);
        acc += va * vb.adjoint();
        chi += a.trace() * std::conj(b.trace());
      }
      if (p == q) {
        acc -= Eigen::MatrixXcd::Identity(dp * dp, dp * dp) * (static_cast<double>(n) / dp);
        chi -= static_cast<double>(n);
      }
      rep.schur = std::max(rep.schur, acc.cwiseAbs().maxCoeff());
      rep.characters = std::max(rep.characters, std::abs(chi));
    }
  }
  if (rep.dimension_sum != n) rep.characters = std::max(rep.characters, 1.0);
  return rep;
}

nlohmann::json group_to_json(const PointGroup& group) {
  using nlohmann::json;
  json j;
  j["name"] = group.name();
  j["order"] = group.size();
  j["dims"] = group.dims();
  j["field_kind"] = group.has_real_irreps() ? "real_orthogonal" : "complex_unitary";
  json elements = json::array();
  for (const auto& r : group.elements()) {
    json m = json::array();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) m.push_back(r(i, k));
    elements.push_back(m);
  }
  j["elements"] = elements;
  json table = json::array();
  for (int a = 0; a < group.size(); ++a) {
    json row = json::array();
    for (int b = 0; b < group.size(); ++b) row.push_back(group.multiply(a, b));
    table.push_back(row);
  }
  j["multiplication"] = table;
  json irreps = json::array();
  for (int p = 0; p < group.irrep_count(); ++p) {
    json per = json::array();
    for (int g = 0; g < group.size(); ++g) {
      const auto& m = group.irreps().complex(p, g);
      json mj = json::array();
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
          if (group.has_real_irreps())
            mj.push_back(m(i, k).real());
          else
            mj.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
        }
      per.push_back(mj);
    }
    irreps.push_back(per);
  }
  j["irreps"] = irreps;
  return j;
}

}  // namespace symstat
