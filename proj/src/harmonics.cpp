#include "symstat/harmonics.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "symstat/errors.hpp"

namespace symstat {

namespace {

constexpr double kInvSqrt4Pi = 0.28209479177387814347;  // 1/sqrt(4 pi)

// Visits every (l, m >= 0) pair with the scaled Legendre value
// Pbar_lm / sin^m(theta) and (x + i y)^m, for l <= lmax. Working with
// (x + i y)^m instead of sin^m(theta) e^{i m phi} keeps the recurrence
// free of divisions at the poles and bounded at large l.
template <class Visit>
void scaled_legendre(int lmax, int lmin, const Vec3& u, Visit&& visit) {
  const double z = u.z();
  const std::complex<double> w(u.x(), u.y());
  std::complex<double> wm = 1.0;
  double qmm = kInvSqrt4Pi;
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      qmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      wm *= w;
    }
    double q2 = 0.0;
    double q1 = qmm;
    if (m >= lmin) visit(m, m, q1, wm);
    if (m + 1 > lmax) continue;
    double q = std::sqrt(2.0 * m + 3.0) * z * qmm;
    q2 = q1;
    q1 = q;
    if (m + 1 >= lmin) visit(m + 1, m, q1, wm);
    for (int l = m + 2; l <= lmax; ++l) {
      const double ll = static_cast<double>(l) * l;
      const double mm = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
      const double lm1 = static_cast<double>(l - 1) * (l - 1);
      const double b = std::sqrt((lm1 - mm) / (4.0 * lm1 - 1.0));
      q = a * (z * q1 - b * q2);
      q2 = q1;
      q1 = q;
      if (l >= lmin) visit(l, m, q1, wm);
    }
  }
}

}  // namespace

Direction Direction::from_vector(const Vec3& v) {
  const double r = v.norm();
  require(r > 0.0, ErrorKind::InvalidArgument, "direction from zero vector");
  Direction d;
  d.theta = std::acos(std::clamp(v.z() / r, -1.0, 1.0));
  d.phi = std::atan2(v.y(), v.x());
  if (d.phi < 0.0) d.phi += 2.0 * std::numbers::pi;
  return d;
}

Vec3 Direction::unit_vector() const {
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

void real_sph_harm_upto(int lmax, const Vec3& u, std::span<double> out) {
  require(lmax >= 0 && out.size() >= static_cast<size_t>((lmax + 1) * (lmax + 1)), ErrorKind::InvalidArgument,
          "real_sph_harm_upto: output too small");
  scaled_legendre(lmax, 0, u, [&](int l, int m, double q, std::complex<double> wm) {
    const int base = l * l + l;
    if (m == 0) {
      out[base] = q;
    } else {
      out[base + m] = std::numbers::sqrt2 * q * wm.real();
      out[base - m] = std::numbers::sqrt2 * q * wm.imag();
    }
  });
}

void real_sph_harm_degree(int l, const Vec3& u, std::span<double> out) {
  require(l >= 0 && out.size() >= static_cast<size_t>(2 * l + 1), ErrorKind::InvalidArgument,
          "real_sph_harm_degree: output too small");
  scaled_legendre(l, l, u, [&](int, int m, double q, std::complex<double> wm) {
    if (m == 0) {
      out[l] = q;
    } else {
      out[l + m] = std::numbers::sqrt2 * q * wm.real();
      out[l - m] = std::numbers::sqrt2 * q * wm.imag();
    }
  });
}

double real_sph_harm(int l, int m, const Direction& u) {
  require(l >= 0 && std::abs(m) <= l, ErrorKind::InvalidArgument, "real_sph_harm requires |m| <= l");
  std::vector<double> y(2 * l + 1);
  real_sph_harm_degree(l, u.unit_vector(), y);
  return y[m + l];
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
  require(n >= 1, ErrorKind::InvalidArgument, "gauss_legendre needs n >= 1");
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it != 0.0) x.push_back(-*it);
  }
  for (double z : zeros) x.push_back(z);
  if (static_cast<int>(x.size()) != n) raise(ErrorKind::InternalError, "Legendre zero count mismatch");
  nodes.resize(n);
  weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    const double dp = boost::math::legendre_p_prime(n, x[i]);
    nodes[i] = mid + half * x[i];
    weights[i] = half * 2.0 / ((1.0 - x[i] * x[i]) * dp * dp);
  }
}

const SphereQuadrature& sphere_quadrature(int exactness_degree) {
  require(exactness_degree >= 0, ErrorKind::InvalidArgument, "quadrature degree must be >= 0");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SphereQuadrature>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[exactness_degree];
  if (slot) return *slot;

  auto q = std::make_unique<SphereQuadrature>();
  q->exactness = exactness_degree;
  const int n_theta = exactness_degree / 2 + 1;
  const int n_phi = exactness_degree + 1;
  std::vector<double> ct, wt;
  gauss_legendre(n_theta, -1.0, 1.0, ct, wt);
  for (int i = 0; i < n_theta; ++i) {
    for (int k = 0; k < n_phi; ++k) {
      Direction d{std::acos(ct[i]), 2.0 * std::numbers::pi * k / n_phi};
      q->nodes.push_back(d);
      q->points.push_back(d.unit_vector());
      q->weights.push_back(wt[i] * 2.0 * std::numbers::pi / n_phi);
    }
  }
  slot = std::move(q);
  return *slot;
}

namespace {

void check_rotation(const Mat3& r) {
  require((r.transpose() * r - Mat3::Identity()).norm() <= 1e-8 && std::abs(r.determinant() - 1.0) <= 1e-8,
          ErrorKind::InvalidArgument, "real_wigner_d: matrix is not a proper rotation");
}

Eigen::MatrixXd harmonics_at(int l, const std::vector<Vec3>& points, const Mat3* rotate_by_transpose) {
  Eigen::MatrixXd y(points.size(), 2 * l + 1);
  std::vector<double> row(2 * l + 1);
  for (size_t s = 0; s < points.size(); ++s) {
    const Vec3 u = rotate_by_transpose ? Vec3(rotate_by_transpose->transpose() * points[s]) : points[s];
    real_sph_harm_degree(l, u, row);
    for (int m = 0; m < 2 * l + 1; ++m) y(s, m) = row[m];
  }
  return y;
}

}  // namespace

std::vector<Eigen::MatrixXd> real_wigner_d_batch(int l, std::span<const Mat3> rotations) {
  require(l >= 0, ErrorKind::InvalidArgument, "real_wigner_d: l must be >= 0");
  for (const auto& r : rotations) check_rotation(r);

  // Weighted least squares of Y(R^T u_s) against Y(u_s) over the nodes of a
  // rule exact to degree 2l; the normal matrix is the identity up to rounding.
  const auto& quad = sphere_quadrature(2 * l);
  const Eigen::MatrixXd y = harmonics_at(l, quad.points, nullptr);
  const Eigen::Map<const Eigen::VectorXd> w(quad.weights.data(), quad.weights.size());
  const Eigen::MatrixXd yw = (y.array().colwise() * w.array()).matrix();
  const Eigen::LDLT<Eigen::MatrixXd> normal(y.transpose() * yw);

  std::vector<Eigen::MatrixXd> out;
  out.reserve(rotations.size());
  for (const auto& r : rotations) {
    const Eigen::MatrixXd yr = harmonics_at(l, quad.points, &r);
    Eigen::MatrixXd d = normal.solve(yw.transpose() * yr);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.push_back(svd.matrixU() * svd.matrixV().transpose());
  }
  return out;
}

RealWignerD real_wigner_d(int l, const Mat3& rotation) {
  return {l, real_wigner_d_batch(l, std::span<const Mat3>(&rotation, 1)).front()};
}

}  // namespace symstat
