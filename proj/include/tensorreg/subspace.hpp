#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tensorreg/regularizer.hpp"

namespace tensorreg {

enum class SubspaceRole { ASpace, BSpace };

// Tensors supported on the listed cells.
struct SupportEntries {
  std::vector<std::array<std::size_t, 3>> cells;
};

// Tensors supported on the listed fibers. `pairs` index the two axes other
// than `mode`, in increasing axis order.
struct SupportFibers {
  std::size_t mode = 0;
  std::vector<std::array<std::size_t, 2>> pairs;
};

// Tensors supported on the listed slices along `axis`.
struct SupportSlices {
  std::size_t axis = 2;
  std::vector<std::size_t> indices;
};

// Per-slice projector pairs for the slices along `axis`. Slice j is a matrix
// over the two other axes (smaller axis as rows). The A-space is
// {A_j - P1j' A_j P2j'}, the B-space {P1j A_j P2j}.
struct SlicewiseProjectors {
  std::size_t axis = 2;
  std::vector<Eigen::MatrixXd> row_factors;
  std::vector<Eigen::MatrixXd> col_factors;
  SubspaceRole role = SubspaceRole::ASpace;
};

// A-space is the range of Q, B-space the range of P1 x P2 x P3.
struct TuckerProjectors {
  ProjectorTriple projectors;
  SubspaceRole role = SubspaceRole::ASpace;
};

using SubspaceSpec = std::variant<SupportEntries, SupportFibers, SupportSlices, SlicewiseProjectors, TuckerProjectors>;

enum class ProjectSide { Space, Complement };

DenseTensor subspace_project(const SubspaceSpec& sub, const DenseTensor& a, ProjectSide which);
bool subspace_contains(const SubspaceSpec& sub, const DenseTensor& a, double tol = 1e-12);
std::string subspace_name(const SubspaceSpec& sub);
SubspaceSpec with_role(const SubspaceSpec& sub, SubspaceRole role);

// True when a lemma covers this (regularizer, subspace) pair.
bool is_matched_pair(const RegularizerSpec& spec, const SubspaceSpec& sub);

// R(A + B) - R(A) - c_R R(B), with A first projected onto the complement of
// sub_a and B onto sub_b.
double decomposability_margin(const RegularizerSpec& spec, const SubspaceSpec& sub_a, const SubspaceSpec& sub_b,
                              const DenseTensor& a, const DenseTensor& b);

// R(A + B) - R(B) - c R(A) with the same projections: the weaker form where
// the constant sits on the complement part.
double complement_weighted_margin(const RegularizerSpec& spec, const SubspaceSpec& sub_a,
                                  const SubspaceSpec& sub_b, const DenseTensor& a, const DenseTensor& b, double c);

struct CompatibilityOptions {
  std::size_t samples = 10000;
  std::size_t ascent_steps = 100;
  std::size_t ascent_starts = 8;
  std::uint64_t seed = 0;
  bool monte_carlo = true;
};

struct Compatibility {
  double analytic_bound = 0.0;
  std::optional<double> mc_estimate;  // absent when R has no primal
};

Compatibility compatibility(const RegularizerSpec& spec, const SubspaceSpec& sub, const Shape& shape,
                            const CompatibilityOptions& opts = {});

}  // namespace tensorreg
