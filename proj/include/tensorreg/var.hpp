#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tensorreg/problem.hpp"

namespace tensorreg {

// x(t+p) = sum_j A_j x(t+p-j) + e(t), e ~ N(0, I).
//
// Regression packaging: the covariate of sample t is the m x p matrix
// X[l, j] = x(t+p-1-j)_l (lag j+1 in column j) and the response is x(t+p),
// so the truth has shape (m, p, m) with T[l, j, k] = (A_{j+1})_{k l}. The
// coefficient tensor in (k, l, j) order is available separately.
class VarModel {
 public:
  VarModel(std::vector<Eigen::MatrixXd> coefficients, bool auto_stabilize = false,
           std::optional<std::size_t> burn_in = std::nullopt);

  std::size_t m() const { return static_cast<std::size_t>(coeffs_.front().rows()); }
  std::size_t p() const { return coeffs_.size(); }
  std::size_t burn_in() const { return burn_in_; }
  const std::vector<Eigen::MatrixXd>& coefficients() const { return coeffs_; }
  bool rescaled() const { return rescaled_; }

  Eigen::MatrixXd companion() const;
  double spectral_radius() const;

 private:
  std::vector<Eigen::MatrixXd> coeffs_;
  std::size_t burn_in_;
  bool rescaled_ = false;
};

double companion_radius(const std::vector<Eigen::MatrixXd>& coefficients);
// Companion spectral radius of the VAR encoded by an (m, p, m) regression truth.
double var_companion_radius(const DenseTensor& regression_truth);

VarModel var_model_from_truth(const DenseTensor& regression_truth, bool auto_stabilize = false);
DenseTensor var_regression_truth(const VarModel& model);
// m x m x p tensor with entry (k, l, j) = (A_{j+1})_{k l}.
DenseTensor var_coefficient_tensor(const VarModel& model);

// Gaussian coefficients with the given entry scale, redrawn until stable.
VarModel random_var_model(std::size_t m, std::size_t p, double scale, std::uint64_t seed);

struct VarSeries {
  Eigen::MatrixXd values;       // length x m, after burn-in
  Eigen::MatrixXd innovations;  // length x m, innovations that produced `values`
};
VarSeries simulate_var(const VarModel& model, std::size_t length, std::uint64_t seed);

// n consecutive (dependent) regression samples from one simulated path.
RegressionProblem gen_var_series(const VarModel& model, std::size_t n, std::uint64_t seed);
// Same path as gen_var_series, summarised without storing samples.
DesignMoments var_design_moments(const VarModel& model, std::size_t n, std::uint64_t seed);

struct SpectralExtrema {
  double mu_min = 0.0;
  double mu_max = 0.0;
  std::size_t grid = 0;
};
// Extremes of the eigenvalues of A(z)^H A(z), A(z) = I - sum_j A_j z^j, on
// the unit circle; the theta grid doubles until both move by less than tol.
SpectralExtrema var_spectral_extrema(const VarModel& model, std::size_t grid = 64, double tol = 1e-6);

// Extreme eigenvalues of the empirical gram of n simulated lag covariates,
// next to the population bounds [1/mu_max, 1/mu_min].
struct SandwichCheck {
  double lower_bound = 0.0, upper_bound = 0.0;
  double gram_min = 0.0, gram_max = 0.0;
  // Relative excursion of the empirical extremes outside the bounds (0 inside).
  double excess() const;
};
SandwichCheck var_sandwich_check(const VarModel& model, std::size_t n, std::uint64_t seed,
                                 const SpectralExtrema& extrema);

}  // namespace tensorreg
