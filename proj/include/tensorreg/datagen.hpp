#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tensorreg/problem.hpp"

namespace tensorreg {

enum class ModelClass { Theta1, Theta2, Theta3, Theta4, Theta5, T1, T2, T3, T4 };

std::string to_string(ModelClass c);
ModelClass model_class_from_string(const std::string& name);

// `param` is the sparsity s or the rank r. `axis` is the fiber mode for
// Theta2 and the slice-index axis for Theta3/Theta4; the applied classes fix
// their own layout:
//   T1(s), T2(r): shape (p, m, m), slices indexed by axis 0
//   T3(s):        shape (m, p, m), the lag-fiber layout of a VAR regression
//   T4(r):        pairwise components on shape (d1, d2, d3)
struct ModelClassSpec {
  ModelClass cls = ModelClass::Theta1;
  std::size_t param = 1;
  Shape shape;
  double magnitude = 1.0;
  std::optional<std::size_t> axis;

  std::size_t effective_axis() const;
  void validate() const;
};

DenseTensor gen_truth(const ModelClassSpec& spec, std::uint64_t seed);

struct MembershipReport {
  bool member = false;
  std::string detail;
};
MembershipReport certify_membership(const ModelClassSpec& spec, const DenseTensor& t, double tol = 1e-10);

// Numerical rank: singular values above tol * sigma_max.
std::size_t numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol = 1e-10);

struct PairwiseComponents {
  Eigen::MatrixXd a12, a13, a23;
};
// Sum of the three components broadcast over the missing axis.
DenseTensor pairwise_tensor(const PairwiseComponents& c);
// Recovers centred components as means over one axis each.
PairwiseComponents pairwise_components(const DenseTensor& t);
PairwiseComponents gen_pairwise_components(const Shape& shape, std::size_t r, double magnitude, std::uint64_t seed);

// Covariates are N(0, F F^T) for the supplied factor F, or standard when empty.
struct Design {
  Eigen::MatrixXd covariance_factor;
  bool identity() const { return covariance_factor.size() == 0; }
};

RegressionProblem gen_problem(const DenseTensor& truth, std::size_t n, std::size_t split, double noise_sigma,
                              const Design& design, std::uint64_t seed);

// Exact draw of the sufficient statistics of gen_problem's model without
// materialising samples (Bartlett decomposition of the Wishart gram, and the
// conditional law of the noise cross terms). Needs n >= prod of covariate
// extents.
DesignMoments sample_design_moments(const DenseTensor& truth, std::size_t n, std::size_t split, double noise_sigma,
                                    const Design& design, std::uint64_t seed);

}  // namespace tensorreg
