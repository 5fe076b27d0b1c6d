#include "symstat/metrics.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "symstat/errors.hpp"
#include "symstat/parallel.hpp"
#include "symstat/symbasis.hpp"

namespace symstat {

VolumeGrid::VolumeGrid(int side_, double voxel_size_)
    : side(side_), voxel_size(voxel_size_), data(static_cast<size_t>(side_) * side_ * side_, 0.0) {
  require(side_ >= 1 && voxel_size_ > 0.0, ErrorKind::InvalidArgument, "volume grid needs side >= 1 and voxel > 0");
}

Vec3 VolumeGrid::position(int ix, int iy, int iz) const {
  const int c = side / 2;
  return Vec3(ix - c, iy - c, iz - c) * voxel_size;
}

double FSCCurve::measure(int s) const { return voxels.at(s) / (4.0 * std::numbers::pi); }

namespace {

std::mutex fftw_mutex;

std::vector<std::complex<double>> unitary_dft(const VolumeGrid& v) {
  const int n = v.side;
  const size_t total = v.size();
  std::vector<std::complex<double>> in(total), out(total);
  for (size_t i = 0; i < total; ++i) in[i] = v.data[i];
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_mutex);
    plan = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_mutex);
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  for (auto& x : out) x *= scale;
  return out;
}

int wrapped(int i, int n) { return i <= (n - 1) / 2 ? i : i - n; }

}  // namespace

FSCCurve fsc(const VolumeGrid& a, const VolumeGrid& b, double shell_width) {
  if (a.side != b.side || a.voxel_size != b.voxel_size || a.size() != b.size())
    raise(ErrorKind::GridMismatch, "FSC needs matching grids");
  require(shell_width > 0.0, ErrorKind::InvalidArgument, "shell width must be > 0");
  const int n = a.side;
  const auto pa = unitary_dft(a);
  const auto pb = unitary_dft(b);
  const double rmax = std::sqrt(3.0) * (n / 2 + 1);
  const int shells = static_cast<int>(std::floor(rmax / shell_width + 0.5)) + 1;
  std::vector<double> cross(shells, 0.0), ea(shells, 0.0), eb(shells, 0.0);
  std::vector<int> count(shells, 0);
  for (int z = 0; z < n; ++z) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double fx = wrapped(x, n), fy = wrapped(y, n), fz = wrapped(z, n);
        const double r = std::sqrt(fx * fx + fy * fy + fz * fz);
        const int s = static_cast<int>(std::floor(r / shell_width + 0.5));
        const size_t i = a.index(x, y, z);
        cross[s] += (pa[i] * std::conj(pb[i])).real();
        ea[s] += std::norm(pa[i]);
        eb[s] += std::norm(pb[i]);
        ++count[s];
      }
    }
  }
  while (!count.empty() && count.back() == 0) {
    count.pop_back();
    cross.pop_back();
    ea.pop_back();
    eb.pop_back();
  }
  FSCCurve c;
  const double dk = shell_width / (n * a.voxel_size);
  for (size_t s = 0; s < count.size(); ++s) {
    c.k.push_back(s * dk);
    const double den = std::sqrt(ea[s] * eb[s]);
    c.fsc.push_back(den > 0.0 ? std::clamp(cross[s] / den, -1.0, 1.0) : 0.0);
    c.energy.push_back(count[s] > 0 ? 4.0 * std::numbers::pi * ea[s] / count[s] : 0.0);
    c.voxels.push_back(count[s]);
  }
  return c;
}

Resolution resolution_at_threshold(const FSCCurve& curve, double threshold) {
  require(curve.size() > 0, ErrorKind::InvalidArgument, "empty FSC curve");
  for (int s = 1; s < curve.size(); ++s) {
    const double hi = curve.fsc[s - 1], lo = curve.fsc[s];
    if (hi >= threshold && lo < threshold) {
      const double t = (hi - threshold) / (hi - lo);
      const double k = curve.k[s - 1] + t * (curve.k[s] - curve.k[s - 1]);
      return {k, 1.0 / k};
    }
  }
  raise(ErrorKind::NoCrossing, "FSC never falls below the threshold");
}

int param_count(EstimationMode mode, int l_max, const PointGroup& group) {
  if (mode == EstimationMode::Asymmetric) return (l_max + 1) * (l_max + 1);
  const auto counts = tabulate_counts(group, l_max);
  int total = 0;
  for (int l = 0; l <= l_max; ++l) {
    if (mode == EstimationMode::SymParticles) {
      total += counts[l][0];
    } else {
      for (int c : counts[l]) total += c;
    }
  }
  return total;
}

std::pair<int, int> resolution_to_limits(double radius, double gamma) {
  require(radius > 0.0 && gamma > 0.0, ErrorKind::InvalidArgument, "radius and resolution must be > 0");
  const int n_q = std::max(1, static_cast<int>(std::lround(radius / gamma)));
  const int l_max = static_cast<int>(std::lround(2.0 * std::numbers::pi * radius / gamma));
  return {l_max, n_q};
}

double rel_l1_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size(), ErrorKind::LengthMismatch, "vectors differ in length");
  const double den = 0.5 * (a.lpNorm<1>() + b.lpNorm<1>());
  return den > 0.0 ? (a - b).lpNorm<1>() / den : 0.0;
}

double rel_l1_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  require(estimate.size() == truth.size(), ErrorKind::LengthMismatch, "vectors differ in length");
  const double den = truth.lpNorm<1>();
  return den > 0.0 ? (estimate - truth).lpNorm<1>() / den : (estimate - truth).lpNorm<1>();
}

VolumeGrid render_volume(const ModelParams& params, VolumeKind kind, int side, double voxel_size, const Vec3& x2,
                         int workers) {
  VolumeGrid out(side, voxel_size);
  const auto& model = *params.model;
  const Eigen::VectorXd cbar = expand_mean(params);
  parallel_for(side, workers, [&](int iz) {
    for (int iy = 0; iy < side; ++iy) {
      for (int ix = 0; ix < side; ++ix) {
        const Vec3 x = out.position(ix, iy, iz);
        double value = 0.0;
        switch (kind) {
          case VolumeKind::Mean: value = cbar.dot(feature_vector(model, x)); break;
          case VolumeKind::StdDev: value = stddev_density(params, x); break;
          case VolumeKind::CovarianceSlice: value = covariance_density(params, x, x2); break;
        }
        out.at(ix, iy, iz) = value;
      }
    }
  });
  return out;
}

}  // namespace symstat
