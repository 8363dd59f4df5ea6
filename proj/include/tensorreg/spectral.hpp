#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensorreg/regularizer.hpp"

namespace tensorreg {

struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;  // descending
  Eigen::MatrixXd v;
};

// Throws SvdFailure if the decomposition does not converge.
ThinSvd thin_svd(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m);

// Proximal map of t * nuclear norm: U max(S - t, 0) V^T.
Eigen::MatrixXd matrix_svt(const Eigen::Ref<const Eigen::MatrixXd>& z, double t);

struct HopmResult {
  double value = 0.0;
  Eigen::VectorXd u, v, w;
  // Objective after each sweep of the restart that produced `value`.
  std::vector<double> trace;
};

// Alternating rank-one maximisation of <A, u o v o w> over unit vectors.
// Start 0 is the leading singular vectors of the unfoldings, the rest are
// Gaussian. The value is attained by the returned factors, so it is a lower
// bound on the spectral norm.
HopmResult hopm_spectral(const DenseTensor& a, const HopmOptions& opts = {});
HopmResult hopm_spectral(const DenseTensor& a, std::size_t restarts, std::size_t iters, std::uint64_t seed = 0);

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  Shape shape;
  RegularizerSpec kind;
  std::string lemma_bound_form;
  double lemma_rate = 0.0;
};

// Rate expression of the width bound for this kind at this shape, without
// its unspecified constant. Returns {tag, value}.
std::pair<std::string, double> width_lemma_rate(const RegularizerSpec& spec, const Shape& shape);

// Monte Carlo estimate of E[R*(G)]. Draw i uses its own stream derived from
// (seed, i), so the estimate does not depend on the worker count.
WidthEstimate gaussian_width_mc(const RegularizerSpec& spec, const Shape& shape, std::size_t draws,
                                std::uint64_t seed, std::size_t threads = 1, const DualOptions& opts = {});

// The standard Gaussian tensor used by draw `index` of gaussian_width_mc.
DenseTensor width_draw(const Shape& shape, std::uint64_t seed, std::size_t index);

}  // namespace tensorreg
