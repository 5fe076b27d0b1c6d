#include "doctest.h"

#include <cmath>
#include <numbers>

#include "symstat/errors.hpp"
#include "symstat/model.hpp"
#include "symstat/symbasis.hpp"

using namespace symstat;

namespace {

const PointGroup& ico() {
  static const PointGroup g = build_icosahedral();
  return g;
}

std::shared_ptr<const PointGroup> ico_ptr() {
  static const auto g = std::make_shared<const PointGroup>(build_icosahedral());
  return g;
}

}  // namespace

TEST_CASE("degree 0 is the constant identity-irrep function") {
  const auto s = build_angular_basis(ico(), 0);
  REQUIRE(s.multiplicity(0) == 1);
  for (int p = 1; p < 5; ++p) CHECK(s.multiplicity(p) == 0);
  const auto v = evaluate_angular(s, 0, 0, Vec3(0.2, 0.5, -0.3).normalized());
  CHECK(std::abs(v[0]) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)));
}

TEST_CASE("lowest invariant degrees: nothing for l = 1..5, one function at l = 6") {
  for (int l = 1; l <= 5; ++l) CHECK(build_angular_basis(ico(), l).multiplicity(0) == 0);
  CHECK(build_angular_basis(ico(), 6).multiplicity(0) == 1);
}

TEST_CASE("multiplicities add up to 2l+1 and match the character table") {
  const auto counts = tabulate_counts(ico(), 20);
  for (int l = 0; l <= 20; ++l) {
    const auto s = build_angular_basis(ico(), l);
    int total = 0;
    for (int p = 0; p < 5; ++p) {
      CHECK(s.multiplicity(p) == counts[l][p]);
      total += ico().irrep_dim(p) * s.multiplicity(p);
    }
    CHECK(total == 2 * l + 1);
  }
  int at15 = 0;
  for (int p = 0; p < 5; ++p) at15 += ico().irrep_dim(p) * counts[15][p];
  CHECK(at15 == 31);
}

TEST_CASE("quadrature orthonormality of the symmetry-adapted functions") {
  for (int l : {6, 10, 15}) {
    const auto s = build_angular_basis(ico(), l);
    std::vector<Eigen::MatrixXd> rows;
    for (int p = 0; p < 5; ++p)
      for (int n = 0; n < s.multiplicity(p); ++n) rows.push_back(s.coeff(p, n));
    // Stack every B; orthonormal functions means B_all B_all^T = I.
    int total = 0;
    for (const auto& b : rows) total += b.rows();
    Eigen::MatrixXd all(total, 2 * l + 1);
    int r = 0;
    for (const auto& b : rows) {
      all.middleRows(r, b.rows()) = b;
      r += b.rows();
    }
    // Independent check through the sphere rule rather than coefficient algebra.
    const auto& quad = sphere_quadrature(2 * l);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(total, total);
    std::vector<double> y(2 * l + 1);
    for (size_t k = 0; k < quad.size(); ++k) {
      real_sph_harm_degree(l, quad.points[k], y);
      const Eigen::VectorXd f = all * Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
      gram += quad.weights[k] * f * f.transpose();
    }
    CHECK((gram - Eigen::MatrixXd::Identity(total, total)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("transformation property under every group element") {
  const int l = 12;
  const auto s = build_angular_basis(ico(), l);
  const Vec3 u = Vec3(0.31, -0.72, 0.4).normalized();
  double worst = 0.0;
  for (int p = 0; p < 5; ++p)
    for (int n = 0; n < s.multiplicity(p); ++n)
      for (int g = 0; g < 60; ++g) {
        const Vec3 rotated = ico().element(g).transpose() * u;
        const Eigen::VectorXd lhs = evaluate_angular(s, p, n, rotated);
        const Eigen::VectorXd rhs = ico().irreps().real(p, g).transpose() * evaluate_angular(s, p, n, u);
        worst = std::max(worst, (lhs - rhs).norm());
      }
  CHECK(worst < 1e-10);
}

TEST_CASE("identity-irrep functions are invariant") {
  const auto s = build_angular_basis(ico(), 30);
  REQUIRE(s.multiplicity(0) >= 1);
  const Vec3 u = Vec3(-0.1, 0.9, 0.3).normalized();
  for (int n = 0; n < s.multiplicity(0); ++n) {
    const double f0 = evaluate_angular(s, 0, n, u)[0];
    for (int g = 0; g < 60; ++g)
      CHECK(evaluate_angular(s, 0, n, Vec3(ico().element(g) * u))[0] == doctest::Approx(f0).epsilon(1e-9));
  }
}

TEST_CASE("projector properties") {
  const int l = 10;
  const auto d = real_wigner_d_batch(l, ico().elements());
  for (int p = 0; p < 5; ++p) {
    const int dp = ico().irrep_dim(p);
    const Eigen::MatrixXd p11 = generalized_projector(ico(), d, p, 0, 0);
    CHECK((p11 * p11 - p11).norm() < 1e-10);
    CHECK((p11 - p11.transpose()).norm() < 1e-10);
    CHECK(p11.trace() == doctest::Approx(tabulate_counts(ico(), l)[l][p]).epsilon(1e-10));
    for (int i = 0; i < dp; ++i)
      for (int j = 0; j < dp; ++j)
        for (int k = 0; k < dp; ++k) {
          const Eigen::MatrixXd lhs = generalized_projector(ico(), d, p, i, j) * generalized_projector(ico(), d, p, j, k);
          CHECK((lhs - generalized_projector(ico(), d, p, i, k)).norm() < 1e-9);
        }
    // Projectors of distinct irreps annihilate each other.
    for (int pp = 0; pp < 5; ++pp)
      if (pp != p) CHECK((p11 * generalized_projector(ico(), d, pp, 0, 0)).norm() < 1e-10);
  }
}

TEST_CASE("multiplicity equals the rank of the projector (SVD oracle)") {
  for (int l : {7, 16, 21}) {
    const auto d = real_wigner_d_batch(l, ico().elements());
    const auto s = build_angular_basis(ico(), l);
    for (int p = 0; p < 5; ++p) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(generalized_projector(ico(), d, p, 0, 0));
      int rank = 0;
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-8;
      CHECK(rank == s.multiplicity(p));
    }
  }
}

TEST_CASE("rebuilding is bit-identical") {
  const auto a = build_angular_basis(ico(), 18), b = build_angular_basis(ico(), 18);
  for (int p = 0; p < 5; ++p)
    for (int n = 0; n < a.multiplicity(p); ++n) CHECK(a.coeff(p, n) == b.coeff(p, n));
  const auto set1 = build_angular_basis_set(ico_ptr(), 8, 1);
  const auto set2 = build_angular_basis_set(ico_ptr(), 8, 3);
  for (int l = 0; l <= 8; ++l)
    for (int p = 0; p < 5; ++p)
      for (int n = 0; n < set1.multiplicity(p, l); ++n) CHECK(set1.slice(l).coeff(p, n) == set2.slice(l).coeff(p, n));
}

TEST_CASE("enumeration counts") {
  // Identity-irrep functions up to l = 55: 53 of them, so 1060 with 20 radial functions.
  const auto counts = tabulate_counts(ico(), 55);
  int invariant = 0;
  for (int l = 0; l <= 55; ++l) invariant += counts[l][0];
  CHECK(invariant == 53);
  CHECK(invariant * 20 == 1060);

  // All irreps up to l = 10: 33 vector functions (121 scalar components),
  // from the character-table multiplicities.
  const auto set = build_angular_basis_set(ico_ptr(), 10);
  const auto idx = enumerate_coefficients(set, 10, 20, {0, 1, 2, 3, 4});
  int vec = 0;
  for (int l = 0; l <= 10; ++l)
    for (int p = 0; p < 5; ++p) vec += counts[l][p];
  CHECK(vec == 33);
  CHECK(idx.n_vec() == vec * 20);
  CHECK(idx.n_c() == 121 * 20);
}

TEST_CASE("trivial and two-fold groups") {
  const auto t = build_trivial();
  for (int l = 0; l <= 6; ++l) CHECK(build_angular_basis(t, l).multiplicity(0) == 2 * l + 1);
  int total = 0;
  for (int l = 0; l <= 2; ++l) total += build_angular_basis(t, l).multiplicity(0);
  CHECK(total == 9);
  const auto c2 = build_cyclic(2);
  CHECK(build_angular_basis(c2, 3).multiplicity(0) + build_angular_basis(c2, 3).multiplicity(1) == 7);
}

TEST_CASE("complex-irrep groups") {
  const auto c3 = build_cyclic(3);
  CHECK_THROWS_AS(build_angular_basis(c3, 2), Error);
  const int l = 4;
  const auto s = build_complex_angular_basis(c3, l);
  int total = 0;
  for (int p = 0; p < 3; ++p) total += s.multiplicity(p);
  CHECK(total == 2 * l + 1);
  const Vec3 u = Vec3(0.3, 0.4, -0.2).normalized();
  std::vector<double> y(2 * l + 1), yr(2 * l + 1);
  real_sph_harm_degree(l, u, y);
  for (int g = 0; g < 3; ++g) {
    real_sph_harm_degree(l, c3.element(g).transpose() * u, yr);
    const Eigen::VectorXcd yv = Eigen::Map<Eigen::VectorXd>(y.data(), y.size()).cast<cdouble>();
    const Eigen::VectorXcd yrv = Eigen::Map<Eigen::VectorXd>(yr.data(), yr.size()).cast<cdouble>();
    for (int p = 0; p < 3; ++p)
      for (int n = 0; n < s.multiplicity(p); ++n) {
        const Eigen::MatrixXcd& b = s.coeff(p, n);
        CHECK((b * yrv - c3.irreps().complex(p, g).transpose() * (b * yv)).norm() < 1e-10);
      }
  }
}

TEST_CASE("absent coefficients raise NotFound") {
  const auto s = build_angular_basis(ico(), 3);
  try {
    s.coeff(0, 0);
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
  CHECK_THROWS_AS(s.coeff(7, 0), Error);
}
