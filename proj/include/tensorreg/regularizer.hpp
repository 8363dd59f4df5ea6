#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tensorreg/tensor.hpp"

namespace tensorreg {

enum class RegKind {
  EntryL1,
  FiberGroup,
  SliceFrob,
  SliceNuclear,
  MatricizedNuclearSum,
  TensorSpectralDualOnly,
};

std::string to_string(RegKind kind);
RegKind reg_kind_from_string(const std::string& name);

// Which norm is in force, plus its grouping. FiberGroup groups the fibers
// whose free index runs along `mode`; the slice kinds group the matrices
// spanned by `axes` (indexed by the remaining axis). R6 carries the 1/3
// average over the three unfoldings.
struct RegularizerSpec {
  RegKind kind = RegKind::EntryL1;
  std::size_t mode = 0;
  std::array<std::size_t, 2> axes{0, 1};

  static RegularizerSpec entry_l1();
  static RegularizerSpec fiber_group(std::size_t mode = 0);
  static RegularizerSpec slice_frob(std::size_t a = 0, std::size_t b = 1);
  static RegularizerSpec slice_nuclear(std::size_t a = 0, std::size_t b = 1);
  static RegularizerSpec matricized_nuclear();
  static RegularizerSpec tensor_spectral();

  double c_R() const;
  bool has_primal() const { return kind != RegKind::TensorSpectralDualOnly; }
  bool has_prox() const;
  std::size_t slice_axis() const { return 3 - axes[0] - axes[1]; }
  void validate() const;
  std::string describe() const;

  friend bool operator==(const RegularizerSpec&, const RegularizerSpec&) = default;
};

// Disjoint groups for the group-structured kinds (EntryL1, FiberGroup,
// SliceFrob, SliceNuclear). Group g owns index[start[g] .. start[g+1]); for
// slices the members are listed row-major over (axes[0], axes[1]).
struct GroupLayout {
  std::vector<std::size_t> index;
  std::vector<std::size_t> start;
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t count() const { return start.size() - 1; }
};

GroupLayout group_layout(const RegularizerSpec& spec, const Shape& shape);

struct HopmOptions {
  std::size_t restarts = 20;
  std::size_t iters = 200;
  std::uint64_t seed = 0;
  double tol = 1e-12;
};

struct DualOptions {
  HopmOptions hopm;
};

// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kSvdRelativeFloor = 1e-12;

double nuclear_norm(const Eigen::Ref<const Eigen::MatrixXd>& m);
double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& m);

double reg_eval(const RegularizerSpec& spec, const DenseTensor& a);
double reg_dual(const RegularizerSpec& spec, const DenseTensor& a, const DualOptions& opts = {});
// Group (or unfolding, for R6) attaining the dual; first in layout order on ties.
std::size_t reg_dual_argmax(const RegularizerSpec& spec, const DenseTensor& a);
DenseTensor prox(const RegularizerSpec& spec, const DenseTensor& z, double t);
// One element of the subdifferential of R at A (zero groups map to zero).
DenseTensor reg_subgradient(const RegularizerSpec& spec, const DenseTensor& a);

}  // namespace tensorreg
