#include "symstat/imaging.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "symstat/errors.hpp"
#include "symstat/harmonics.hpp"
#include "symstat/parallel.hpp"

namespace symstat {

Eigen::Vector2d ImageGeometry::frequency(int pixel) const {
  const int c = side / 2;
  const double scale = 1.0 / (side * pixel_size);
  return {(pixel % side - c) * scale, (pixel / side - c) * scale};
}

int ImageGeometry::mirror(int pixel) const {
  const int c = side / 2;
  const int ix = 2 * c - pixel % side;
  const int iy = 2 * c - pixel / side;
  if (ix < 0 || ix >= side || iy < 0 || iy >= side) return -1;
  return iy * side + ix;
}

void ImageGeometry::validate() const {
  require(side >= 1, ErrorKind::InvalidArgument, "image side must be >= 1");
  require(pixel_size > 0.0 && std::isfinite(pixel_size), ErrorKind::InvalidArgument, "pixel size must be > 0");
}

Orientation Orientation::from_euler_zyz(double alpha, double beta, double gamma) {
  const Mat3 r = (Eigen::AngleAxisd(alpha, Vec3::UnitZ()) * Eigen::AngleAxisd(beta, Vec3::UnitY()) *
                  Eigen::AngleAxisd(gamma, Vec3::UnitZ()))
                     .toRotationMatrix();
  return {r};
}

std::array<double, 3> Orientation::euler_zyz() const {
  const Mat3& r = rotation;
  const double beta = std::acos(std::clamp(r(2, 2), -1.0, 1.0));
  if (std::abs(std::sin(beta)) < 1e-12) {
    // Gimbal lock: put everything in alpha.
    if (r(2, 2) > 0.0) return {std::atan2(r(1, 0), r(0, 0)), beta, 0.0};
    return {std::atan2(-r(1, 0), -r(0, 0)), beta, 0.0};
  }
  return {std::atan2(r(1, 2), r(0, 2)), beta, std::atan2(r(2, 1), -r(2, 0))};
}

Mat3 quaternion_to_rotation(const Eigen::Vector4d& q) {
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Mat3 random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Vector4d q;
  do {
    for (int i = 0; i < 4; ++i) q[i] = normal(rng);
  } while (q.norm() < 1e-12);
  return quaternion_to_rotation(q);
}

SO3Quadrature so3_quadrature(int count, std::uint64_t seed) {
  require(count >= 1, ErrorKind::InvalidArgument, "quadrature count must be >= 1");
  SO3Quadrature quad;
  quad.weights.assign(count, 1.0 / count);
  if (count == 1) {
    quad.rotations.push_back(Mat3::Identity());
  } else {
    constexpr double phi = std::numbers::sqrt2;
    constexpr double psi = 1.533751168755204288118041;
    for (int i = 0; i < count; ++i) {
      const double s = i + 0.5;
      const double t = s / count;
      const double d = 2.0 * std::numbers::pi * s;
      const double r = std::sqrt(t);
      const double big = std::sqrt(1.0 - t);
      const double a = d / phi;
      const double b = d / psi;
      quad.rotations.push_back(
          quaternion_to_rotation({r * std::sin(a), r * std::cos(a), big * std::sin(b), big * std::cos(b)}));
    }
  }
  if (seed != 0) {
    const Mat3 g = random_rotation(seed);
    for (auto& r : quad.rotations) r = g * r;
  }
  return quad;
}

ProjectionBuilder::ProjectionBuilder(std::shared_ptr<const SignalModel> model, ImageGeometry geometry,
                                     std::function<double(double)> envelope)
    : model_(std::move(model)), geometry_(geometry) {
  geometry_.validate();
  const auto& idx = model_->index;
  require(idx.l_max() <= model_->radial->l_max() && idx.n_q() <= model_->radial->n_q(),
          ErrorKind::InvalidArgument, "radial basis does not cover the coefficient index");
  const int npix = geometry_.pixels();
  const int nq = idx.n_q();
  khat_.resize(npix);
  dc_.resize(npix);
  profile_ = Eigen::MatrixXd::Zero(npix, (idx.l_max() + 1) * nq);
  for (int px = 0; px < npix; ++px) {
    const Eigen::Vector2d k = geometry_.frequency(px);
    const double kn = k.norm();
    dc_[px] = kn == 0.0;
    khat_[px] = dc_[px] ? Vec3::UnitZ() : Vec3(k.x() / kn, k.y() / kn, 0.0);
    const double s = 2.0 * std::numbers::pi * kn;
    const double env = envelope ? envelope(s) : 1.0;
    for (int l = 0; l <= idx.l_max(); ++l) {
      if (dc_[px] && l > 0) continue;
      for (int q = 0; q < nq; ++q) profile_(px, l * nq + q) = env * model_->radial->fourier(l, q, s);
    }
  }
}

template <class Sink>
void ProjectionBuilder::assemble(const Mat3& rotation, Sink&& sink) const {
  const auto& idx = model_->index;
  const int lm = idx.l_max();
  const int nq = idx.n_q();
  std::vector<double> y((lm + 1) * (lm + 1));
  Eigen::VectorXd ang;
  for (int px = 0; px < geometry_.pixels(); ++px) {
    real_sph_harm_upto(lm, rotation.transpose() * khat_[px], y);
    int last_p = -1, last_l = -1, last_n = -1;
    for (const auto& blk : idx.blocks()) {
      if (blk.p != last_p || blk.l != last_l || blk.n != last_n) {
        const auto& b = model_->angular->slice(blk.l).coeff(blk.p, blk.n);
        ang = b * Eigen::Map<const Eigen::VectorXd>(y.data() + blk.l * blk.l, 2 * blk.l + 1);
        last_p = blk.p;
        last_l = blk.l;
        last_n = blk.n;
      }
      const double h = profile_(px, blk.l * nq + blk.q);
      // (-i)^l: +1, -i, -1, +i.
      const int phase = blk.l % 4;
      const double sign = (phase == 0 || phase == 3) ? 1.0 : -1.0;
      const bool imaginary = blk.l % 2 == 1;
      for (int j = 0; j < blk.dim; ++j) sink(px, blk.offset + j, sign * h * ang[j], imaginary);
    }
  }
}

Eigen::MatrixXcd ProjectionBuilder::complex_operator(const Mat3& rotation) const {
  Eigen::MatrixXcd out(geometry_.pixels(), n_c());
  assemble(rotation, [&](int row, int col, double value, bool imaginary) {
    out(row, col) = imaginary ? cdouble(0.0, value) : cdouble(value, 0.0);
  });
  return out;
}

Eigen::MatrixXd ProjectionBuilder::real_operator(const Mat3& rotation) const {
  const int npix = geometry_.pixels();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * npix, n_c());
  assemble(rotation, [&](int row, int col, double value, bool imaginary) {
    out(imaginary ? npix + row : row, col) = value;
  });
  return out;
}

Eigen::MatrixXcd build_projection_operator(const Orientation& z, const SignalModel& model, const ImageGeometry& geom) {
  // Aliasing shared_ptr: the builder does not outlive this call.
  std::shared_ptr<const SignalModel> ref(std::shared_ptr<const SignalModel>(), &model);
  return ProjectionBuilder(ref, geom).complex_operator(z.rotation);
}

Eigen::MatrixXd to_real_layout(const Eigen::MatrixXcd& images) {
  const auto p = images.rows();
  Eigen::MatrixXd out(2 * p, images.cols());
  out.topRows(p) = images.real();
  out.bottomRows(p) = images.imag();
  return out;
}

Eigen::MatrixXcd from_real_layout(const Eigen::MatrixXd& real, int pixels) {
  require(real.rows() == 2 * pixels, ErrorKind::LengthMismatch, "real layout has wrong row count");
  Eigen::MatrixXcd out(pixels, real.cols());
  out.real() = real.topRows(pixels);
  out.imag() = real.bottomRows(pixels);
  return out;
}

ImageStack simulate_images(const ModelParams& params, int n_v, double snr, const ImageGeometry& geom,
                           std::uint64_t seed, int workers) {
  require(snr > 0.0 && std::isfinite(snr), ErrorKind::InvalidArgument, "snr must be > 0");
  require(n_v >= 1, ErrorKind::InvalidArgument, "need at least one image");
  const ProjectionBuilder builder(params.model, geom);
  const int npix = geom.pixels();

  ImageStack stack;
  stack.geometry = geom;
  stack.snr = snr;
  stack.seed = seed;
  stack.images.resize(npix, n_v);
  stack.true_rotations.resize(n_v);
  stack.true_coefficients.resize(params.model->index.n_c(), n_v);
  std::vector<double> energy(n_v);

  parallel_for(n_v, workers, [&](int i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const Mat3 rot = random_rotation(derive_seed(s, 0));
    const Eigen::VectorXd c = sample_instance(params, derive_seed(s, 1));
    const Eigen::VectorXcd clean = builder.complex_operator(rot) * c.cast<cdouble>();
    stack.true_rotations[i] = rot;
    stack.true_coefficients.col(i) = c;
    stack.images.col(i) = clean;
    energy[i] = clean.squaredNorm();
  });

  double mean_energy = 0.0;
  for (double e : energy) mean_energy += e;
  mean_energy /= n_v;
  stack.sigma2 = mean_energy / snr;
  const double sigma = std::sqrt(stack.sigma2);

  parallel_for(n_v, workers, [&](int i) {
    std::mt19937_64 rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(i)), 2));
    std::normal_distribution<double> normal;
    for (int px = 0; px < npix; ++px) {
      const double re = normal(rng);
      const double im = normal(rng);
      stack.images(px, i) += sigma * cdouble(re, im);
    }
  });
  return stack;
}

}  // namespace symstat
