#pragma once

#include <vector>

namespace symstat {

/// Dirichlet spherical-Bessel functions of one order l on [0, R]:
///   psi_q(x) = norm_q * j_l(gamma_q x / R),   j_l(gamma_q) = 0,
/// orthonormal under the x^2-weighted inner product. q is zero-based.
class RadialBasis {
 public:
  RadialBasis(double radius, int l, int n_q);

  double radius() const { return radius_; }
  int degree() const { return l_; }
  int count() const { return static_cast<int>(gamma_.size()); }
  /// q-th positive root of j_l.
  double gamma(int q) const { return gamma_.at(q); }
  double norm(int q) const { return norm_.at(q); }

  /// psi_q(x); zero for x > R.
  double value(int q, double x) const;
  /// h_q(k) = sqrt(2/pi) int_0^R psi_q(x) j_l(k x) x^2 dx, with k an angular
  /// wavenumber (radians per length).
  double fourier(int q, double k) const;

 private:
  double radius_;
  int l_;
  std::vector<double> gamma_;
  std::vector<double> norm_;
  std::vector<double> jnext_;  // j_{l+1}(gamma_q)
};

/// Throws InvalidArgument on nonpositive R, negative l or n_q < 1.
RadialBasis build_radial_basis(double radius, int l, int n_q);

/// One RadialBasis per degree 0..l_max, all with the same R and N_q.
class RadialBasisSet {
 public:
  RadialBasisSet(double radius, int l_max, int n_q);

  double radius() const { return radius_; }
  int l_max() const { return static_cast<int>(per_l_.size()) - 1; }
  int n_q() const { return n_q_; }
  const RadialBasis& degree(int l) const { return per_l_.at(l); }

  double value(int l, int q, double x) const { return per_l_.at(l).value(q, x); }
  double fourier(int l, int q, double k) const { return per_l_.at(l).fourier(q, k); }

 private:
  double radius_;
  int n_q_;
  std::vector<RadialBasis> per_l_;
};

/// sqrt(2/pi) int_0^R psi_q(x) j_l(k x) x^2 dx by Gauss-Legendre with
/// `nodes` points; the closed form in RadialBasis::fourier is checked
/// against this.
double radial_fourier_quadrature(const RadialBasis& basis, int q, double k, int nodes);

}  // namespace symstat
