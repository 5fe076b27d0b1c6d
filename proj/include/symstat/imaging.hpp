#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "symstat/model.hpp"

namespace symstat {

/// Square reciprocal-space image grid. Pixel index = iy * side + ix and the
/// frequency of pixel (ix, iy) is ((ix - side/2), (iy - side/2)) / (side *
/// pixel_size) in cycles per length unit, so DC sits at (side/2, side/2).
struct ImageGeometry {
  int side = 0;
  double pixel_size = 1.0;

  int pixels() const { return side * side; }
  double nyquist() const { return 0.5 / pixel_size; }
  Eigen::Vector2d frequency(int pixel) const;
  /// Pixel holding -k for the pixel holding k, or -1 if it falls off the grid.
  int mirror(int pixel) const;
  void validate() const;
};

/// Proper rotation; Euler angles use the z-y-z convention
/// R = Rz(alpha) Ry(beta) Rz(gamma).
struct Orientation {
  Mat3 rotation = Mat3::Identity();

  static Orientation from_euler_zyz(double alpha, double beta, double gamma);
  std::array<double, 3> euler_zyz() const;
};

/// Rotation from a (not necessarily normalized) quaternion (w, x, y, z).
Mat3 quaternion_to_rotation(const Eigen::Vector4d& q);

struct SO3Quadrature {
  std::vector<Mat3> rotations;
  std::vector<double> weights;

  int size() const { return static_cast<int>(rotations.size()); }
};

/// Super-Fibonacci spiral of `count` rotations with weights 1/count.
/// count = 1 gives the identity; a nonzero seed applies one global random
/// rotation to the whole set.
SO3Quadrature so3_quadrature(int count, std::uint64_t seed = 0);

/// Assembles L(z) for one model and image grid. Radial profiles depend only
/// on |k| and are tabulated once; per-orientation work is the angular part.
///
/// Column (p, l, n, q, j) at frequency k is
///   (-i)^l envelope(s) h_{l,q}(s) I_{p,j;l,n}(R^T k_hat),  s = 2 pi |k|,
/// with k embedded as (k_x, k_y, 0). At k = 0 only l = 0 columns are nonzero.
class ProjectionBuilder {
 public:
  ProjectionBuilder(std::shared_ptr<const SignalModel> model, ImageGeometry geometry,
                    std::function<double(double)> envelope = {});

  const SignalModel& model() const { return *model_; }
  const ImageGeometry& geometry() const { return geometry_; }
  int n_c() const { return model_->index.n_c(); }

  /// pixels x N_c complex operator.
  Eigen::MatrixXcd complex_operator(const Mat3& rotation) const;
  /// 2*pixels x N_c real operator: real parts in rows [0, P), imaginary
  /// parts in rows [P, 2P). Even l only touches the real rows, odd l only
  /// the imaginary rows.
  Eigen::MatrixXd real_operator(const Mat3& rotation) const;

 private:
  template <class Sink>
  void assemble(const Mat3& rotation, Sink&& sink) const;

  std::shared_ptr<const SignalModel> model_;
  ImageGeometry geometry_;
  std::vector<Eigen::Vector3d> khat_;  // slice direction per pixel (z = 0)
  std::vector<bool> dc_;
  Eigen::MatrixXd profile_;            // pixels x (l, q) radial values, incl. envelope
};

Eigen::MatrixXcd build_projection_operator(const Orientation& z, const SignalModel& model, const ImageGeometry& geom);

/// Splits complex images into the real layout used by real_operator.
Eigen::MatrixXd to_real_layout(const Eigen::MatrixXcd& images);
Eigen::MatrixXcd from_real_layout(const Eigen::MatrixXd& real, int pixels);

/// Reciprocal-space image stack; column i of `images` is image i.
struct ImageStack {
  ImageGeometry geometry;
  Eigen::MatrixXcd images;  // pixels x N_v
  /// Noise variance of each real component.
  double sigma2 = 0.0;
  double snr = 0.0;
  std::uint64_t seed = 0;
  std::vector<Mat3> true_rotations;
  Eigen::MatrixXd true_coefficients;  // N_c x N_v, empty if unknown

  int count() const { return static_cast<int>(images.cols()); }
  bool has_truth() const { return !true_rotations.empty(); }
};

/// y_i = L(z_i) c_i + w_i with z_i Haar-uniform, c_i ~ N(c bar, V) and
/// white Gaussian noise whose variance makes the mean squared norm of the
/// noise-free images divided by sigma^2 equal to `snr`.
/// Throws InvalidArgument for snr <= 0 or n_v < 1.
ImageStack simulate_images(const ModelParams& params, int n_v, double snr, const ImageGeometry& geom,
                           std::uint64_t seed, int workers = 1);

/// Haar-uniform rotation drawn from a seeded generator.
Mat3 random_rotation(std::uint64_t seed);

/// Seed of stream `index` derived from `base` (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace symstat
