#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "symstat/estimator.hpp"
#include "symstat/model.hpp"

namespace symstat {

/// Cubic voxel grid; voxel (ix, iy, iz) sits at ((i - side/2) * voxel_size)
/// per axis and is stored at (iz * side + iy) * side + ix.
struct VolumeGrid {
  int side = 0;
  double voxel_size = 1.0;
  std::vector<double> data;

  VolumeGrid() = default;
  VolumeGrid(int side, double voxel_size);
  size_t size() const { return data.size(); }
  size_t index(int ix, int iy, int iz) const { return (static_cast<size_t>(iz) * side + iy) * side + ix; }
  Vec3 position(int ix, int iy, int iz) const;
  double& at(int ix, int iy, int iz) { return data[index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return data[index(ix, iy, iz)]; }
};

/// Shell s covers |k| in [(s - 1/2) w, (s + 1/2) w) with w the shell width
/// in reciprocal voxels; k is reported in cycles per length unit.
struct FSCCurve {
  std::vector<double> k;
  std::vector<double> fsc;
  /// E(k) = int |P(k)|^2 dOmega, estimated as 4 pi times the shell mean of
  /// the unitary DFT power of the first volume.
  std::vector<double> energy;
  std::vector<int> voxels;  // DFT samples per shell

  int size() const { return static_cast<int>(k.size()); }
  /// Weight turning E(k) into shell power: sum_s E_s * measure(s) = sum |P|^2.
  double measure(int s) const;
};

/// Throws GridMismatch if the grids differ.
FSCCurve fsc(const VolumeGrid& a, const VolumeGrid& b, double shell_width = 1.0);

struct Resolution {
  double k = 0.0;       // crossing frequency
  double length = 0.0;  // 1/k
};

/// First downward crossing by linear interpolation. Throws NoCrossing.
Resolution resolution_at_threshold(const FSCCurve& curve, double threshold = 0.5);

/// Variance parameters per radial index for one mode.
int param_count(EstimationMode mode, int l_max, const PointGroup& group);

/// N_q = round(R / gamma) (at least 1), l_max = round(2 pi R / gamma).
std::pair<int, int> resolution_to_limits(double radius, double gamma);

/// |a - b|_1 / (0.5 (|a|_1 + |b|_1)). Throws LengthMismatch.
double rel_l1_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
/// |estimate - truth|_1 / |truth|_1. Throws LengthMismatch.
double rel_l1_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

enum class VolumeKind { Mean, StdDev, CovarianceSlice };

/// Samples mean, standard deviation or C(., x2) on a side^3 grid.
VolumeGrid render_volume(const ModelParams& params, VolumeKind kind, int side, double voxel_size,
                         const Vec3& x2 = Vec3::Zero(), int workers = 1);

}  // namespace symstat
