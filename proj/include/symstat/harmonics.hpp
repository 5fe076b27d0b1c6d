#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "symstat/pointgroup.hpp"

namespace symstat {

/// Spherical angles: colatitude theta in [0, pi], azimuth phi in [0, 2 pi).
struct Direction {
  double theta = 0.0;
  double phi = 0.0;

  static Direction from_vector(const Vec3& v);
  Vec3 unit_vector() const;
};

/// Real orthonormal spherical harmonics without the Condon-Shortley phase:
/// m > 0 carries cos(m phi), m < 0 carries sin(|m| phi).
/// Throws InvalidArgument if |m| > l or l < 0.
double real_sph_harm(int l, int m, const Direction& u);

/// All 2l+1 harmonics of degree l at unit vector u; out[m + l].
void real_sph_harm_degree(int l, const Vec3& u, std::span<double> out);

/// All harmonics with degree <= lmax; out[l*l + l + m], size (lmax+1)^2.
void real_sph_harm_upto(int lmax, const Vec3& u, std::span<double> out);

/// Product rule: Gauss-Legendre in cos(theta) times a uniform azimuth grid.
struct SphereQuadrature {
  int exactness = 0;
  std::vector<Direction> nodes;
  std::vector<Vec3> points;  // unit vectors of `nodes`
  std::vector<double> weights;

  size_t size() const { return weights.size(); }
};

/// Exact for every real harmonic of degree <= exactness_degree.
/// Results are cached; the returned reference stays valid for the process.
const SphereQuadrature& sphere_quadrature(int exactness_degree);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

/// Rotation matrix acting on degree-l real harmonic coefficients so that
/// Y(R^{-1} u) = D(R)^T Y(u), componentwise over m.
struct RealWignerD {
  int l = 0;
  Eigen::MatrixXd matrix;
};

/// Throws InvalidArgument if R is not a rotation to within 1e-8.
RealWignerD real_wigner_d(int l, const Mat3& rotation);

/// Same as real_wigner_d for many rotations; shares node evaluations.
std::vector<Eigen::MatrixXd> real_wigner_d_batch(int l, std::span<const Mat3> rotations);

}  // namespace symstat
