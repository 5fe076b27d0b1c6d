#include "symstat/radial.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "symstat/errors.hpp"
#include "symstat/harmonics.hpp"

namespace symstat {

namespace {

double sph_j(int l, double x) { return boost::math::sph_bessel(static_cast<unsigned>(l), x); }

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

RadialBasis::RadialBasis(double radius, int l, int n_q) : radius_(radius), l_(l) {
  require(radius > 0.0, ErrorKind::InvalidArgument, "radial basis needs R > 0");
  require(l >= 0, ErrorKind::InvalidArgument, "radial basis needs l >= 0");
  require(n_q >= 1, ErrorKind::InvalidArgument, "radial basis needs N_q >= 1");
  for (int q = 1; q <= n_q; ++q) {
    // j_l(x) = sqrt(pi/2x) J_{l+1/2}(x), so the zeros coincide.
    const double g = boost::math::cyl_bessel_j_zero(l + 0.5, q);
    const double jn = sph_j(l + 1, g);
    gamma_.push_back(g);
    jnext_.push_back(jn);
    norm_.push_back(std::sqrt(2.0 / (radius * radius * radius)) / std::abs(jn));
  }
}

double RadialBasis::value(int q, double x) const {
  if (x < 0.0 || x > radius_) return 0.0;
  return norm_.at(q) * sph_j(l_, gamma_.at(q) * x / radius_);
}

double RadialBasis::fourier(int q, double k) const {
  const double a = gamma_.at(q) / radius_;
  const double r = radius_;
  k = std::abs(k);
  // Lommel's integral is singular at k = a; integrate directly there.
  if (std::abs(k - a) * r < 1e-3) return radial_fourier_quadrature(*this, q, k, 0);
  return kSqrt2OverPi * norm_[q] * r * r * a * jnext_[q] * sph_j(l_, k * r) / (a * a - k * k);
}

RadialBasis build_radial_basis(double radius, int l, int n_q) { return RadialBasis(radius, l, n_q); }

RadialBasisSet::RadialBasisSet(double radius, int l_max, int n_q) : radius_(radius), n_q_(n_q) {
  require(l_max >= 0, ErrorKind::InvalidArgument, "radial set needs l_max >= 0");
  for (int l = 0; l <= l_max; ++l) per_l_.emplace_back(radius, l, n_q);
}

double radial_fourier_quadrature(const RadialBasis& basis, int q, double k, int nodes) {
  const double r = basis.radius();
  if (nodes <= 0) {
    const double span = (basis.gamma(q) + std::abs(k) * r) / std::numbers::pi;
    nodes = static_cast<int>(8.0 * span) + 32;
  }
  std::vector<double> x, w;
  gauss_legendre(nodes, 0.0, r, x, w);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) acc += w[i] * basis.value(q, x[i]) * sph_j(basis.degree(), k * x[i]) * x[i] * x[i];
  return kSqrt2OverPi * acc;
}

}  // namespace symstat
