#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tensorreg/regularizer.hpp"

namespace tensorreg {

// Samples (X_i, Y_i) with Y_i = <X_i, T> + noise. X_i has order `split`;
// responses are scalars (empty shape) when the truth has the same order.
struct RegressionProblem {
  std::vector<DenseTensor> covariates;
  std::vector<DenseTensor> responses;
  std::size_t split = 0;
  double noise_sigma = 0.0;
  std::optional<DenseTensor> truth;
  std::map<std::string, std::string> metadata;

  std::size_t n() const { return covariates.size(); }
  Shape covariate_shape() const;
  Shape response_shape() const;
  Shape parameter_shape() const;
  void validate() const;
};

// Sufficient statistics of a problem for the least-squares part:
//   gram  = (1/n) sum x_i x_i^T          (D_M x D_M)
//   cross = (1/n) sum x_i y_i^T          (D_M x D_R)
//   response_energy = (1/n) sum |y_i|^2
// A parameter tensor is viewed as the row-major D_M x D_R matrix of its data.
struct DesignMoments {
  Shape covariate_shape;
  Shape response_shape;
  std::size_t n = 0;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd cross;
  double response_energy = 0.0;

  Shape parameter_shape() const;
  std::size_t dm() const { return static_cast<std::size_t>(gram.rows()); }
  std::size_t dr() const { return static_cast<std::size_t>(cross.cols()); }
  void validate() const;
};

// Accumulates moments in fixed-size row blocks so every producer sums in the
// same order.
class MomentAccumulator {
 public:
  MomentAccumulator(std::size_t dm, std::size_t dr, std::size_t block = 256);
  void add(const double* x, const double* y);
  Eigen::MatrixXd gram_sum();
  Eigen::MatrixXd cross_sum();
  double energy_sum();
  std::size_t count() const { return count_; }

 private:
  void flush();
  std::size_t dm_, dr_, block_, fill_ = 0, count_ = 0;
  Eigen::MatrixXd xb_, yb_;
  Eigen::MatrixXd gram_, cross_;
  double energy_ = 0.0;
};

DesignMoments summarize(const RegressionProblem& problem);

using ParamMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
ParamMatrix as_param_matrix(const DesignMoments& m, const DenseTensor& a);
DenseTensor from_param_matrix(const DesignMoments& m, const Eigen::Ref<const ParamMatrix>& a);

double smooth_loss(const DesignMoments& m, const DenseTensor& a);
DenseTensor smooth_gradient(const DesignMoments& m, const DenseTensor& a);

// (1/2n) sum |Y_i - <A, X_i>|^2 + lambda R(A), evaluated from the samples.
double objective(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda, const DenseTensor& a);
double objective(const DesignMoments& m, const RegularizerSpec& spec, double lambda, const DenseTensor& a);

double empirical_norm(const RegressionProblem& problem, const DenseTensor& delta);
double empirical_norm(const DesignMoments& m, const DenseTensor& delta);

}  // namespace tensorreg
