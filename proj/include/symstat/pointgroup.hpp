#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace symstat {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using cdouble = std::complex<double>;

enum class GroupKind { Icosahedral, Cyclic, Trivial };
enum class FieldKind { RealOrthogonal, ComplexUnitary };

// Tolerances used by construction and verification.
inline constexpr double kOrthogonalityTol = 1e-12;
inline constexpr double kElementMatchTol = 1e-10;
inline constexpr double kHomomorphismTol = 1e-10;
inline constexpr double kSchurTol = 1e-8;

/// Irreducible representation matrices, indexed [irrep][element].
///
/// Irreps are numbered from 0; irrep 0 is always the identity irrep.
/// Matrices are stored in complex form; groups whose irreps are real also
/// keep a real copy so the real code paths never touch complex arithmetic.
class IrrepTable {
 public:
  IrrepTable() = default;
  IrrepTable(FieldKind kind, std::vector<std::vector<Eigen::MatrixXcd>> mats);
  static IrrepTable from_real(std::vector<std::vector<Eigen::MatrixXd>> mats);

  FieldKind field_kind() const { return kind_; }
  int count() const { return static_cast<int>(complex_.size()); }
  int dim(int p) const { return static_cast<int>(complex_.at(p).front().rows()); }
  std::vector<int> dims() const;

  const Eigen::MatrixXcd& complex(int p, int g) const { return complex_.at(p).at(g); }
  /// Throws InvalidArgument for ComplexUnitary tables.
  const Eigen::MatrixXd& real(int p, int g) const;
  cdouble character(int p, int g) const { return complex(p, g).trace(); }

 private:
  FieldKind kind_ = FieldKind::RealOrthogonal;
  std::vector<std::vector<Eigen::MatrixXcd>> complex_;
  std::vector<std::vector<Eigen::MatrixXd>> real_;
};

/// A finite rotation group with its multiplication table and irreps.
/// Element 0 is the identity. Immutable after construction.
class PointGroup {
 public:
  /// Assembles a group from parts. The multiplication table is filled by
  /// nearest-element matching; entries with no match within
  /// kElementMatchTol are set to -1 and reported by verify_group().
  PointGroup(GroupKind kind, int cyclic_order, std::vector<Mat3> elements, IrrepTable irreps);

  GroupKind kind() const { return kind_; }
  /// n for C_n, 1 for the trivial group, 0 otherwise.
  int cyclic_order() const { return cyclic_order_; }
  /// "I", "C<n>" or "trivial".
  std::string name() const;

  int size() const { return static_cast<int>(elements_.size()); }
  const Mat3& element(int g) const { return elements_.at(g); }
  const std::vector<Mat3>& elements() const { return elements_; }
  /// Index of R_{g1} R_{g2}, or -1 if the product left the set.
  int multiply(int g1, int g2) const { return mult_[g1 * size() + g2]; }
  int inverse(int g) const { return inverse_.at(g); }

  const IrrepTable& irreps() const { return irreps_; }
  int irrep_count() const { return irreps_.count(); }
  int irrep_dim(int p) const { return irreps_.dim(p); }
  std::vector<int> dims() const { return irreps_.dims(); }
  bool has_real_irreps() const { return irreps_.field_kind() == FieldKind::RealOrthogonal; }

 private:
  GroupKind kind_;
  int cyclic_order_;
  std::vector<Mat3> elements_;
  std::vector<int> mult_;
  std::vector<int> inverse_;
  IrrepTable irreps_;
};

struct ConjugacyMap {
  /// tau[p] is the irrep equivalent to the complex conjugate of irrep p.
  std::vector<int> tau;
  /// conj(Gamma^p(g)) = S_p^{-1} Gamma^{tau(p)}(g) S_p.
  std::vector<Eigen::MatrixXcd> similarity;
};

struct ValidationReport {
  double orthogonality = 0.0;   // max ||R^T R - I||
  double determinant = 0.0;     // max |det R - 1|
  double closure = 0.0;         // max distance of a product to its nearest element
  double identity = 0.0;        // distance of element 0 from I
  bool inverses = true;
  double homomorphism = 0.0;    // max ||G(g1)G(g2) - G(g1 g2)||
  double unitarity = 0.0;       // max ||G^H G - I||
  double schur = 0.0;           // max Schur orthogonality deviation
  double characters = 0.0;      // max character orthogonality deviation
  int dimension_sum = 0;        // sum_p d_p^2

  bool passed() const;
  std::vector<std::string> failures() const;
};

PointGroup build_icosahedral();
/// C_n about +z. Throws InvalidArgument if n < 1.
PointGroup build_cyclic(int n);
PointGroup build_trivial();
/// Accepts "I", "icosahedral", "C<n>", "trivial".
PointGroup group_from_name(const std::string& name);

/// Throws NotFound if some conjugate irrep has no match in the table.
ConjugacyMap conjugate_irrep_permutation(const PointGroup& group);

ValidationReport verify_group(const PointGroup& group);

/// Row-major matrices; complex entries as [re, im] pairs.
nlohmann::json group_to_json(const PointGroup& group);

}  // namespace symstat
