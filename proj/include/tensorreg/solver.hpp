#pragma once

#include <string>
#include <vector>

#include "tensorreg/problem.hpp"
#include "tensorreg/spectral.hpp"
#include "tensorreg/subspace.hpp"

namespace tensorreg {

struct SolverConfig {
  std::size_t max_iters = 10000;
  double tol = 1e-10;       // relative objective change
  double kkt_tol = 1e-7;
  std::size_t power_iters = 5;
  double divergence_factor = 1e3;
  // ADMM
  double rho = 1.0;
  double admm_tol = 1e-6;   // relative primal and dual residual
  bool balance_rho = true;
  DualOptions dual;
};

enum class SolveStatus { Converged, MaxIters, Diverged };
std::string to_string(SolveStatus s);

struct SolveResult {
  DenseTensor estimate;
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  double lambda = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
};

// First-order optimality certificate: excess of the dual norm of the gradient
// over lambda, plus the alignment gap |<grad, A> + lambda R(A)| / (1 + R(A)).
double kkt_residual(const DesignMoments& m, const RegularizerSpec& spec, double lambda, const DenseTensor& a,
                    const DualOptions& opts = {});
double kkt_residual(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda,
                    const DenseTensor& a, const DualOptions& opts = {});

// Accelerated proximal gradient from zero with backtracking and
// function-value restart.
SolveResult fista_solve(const DesignMoments& m, const RegularizerSpec& spec, double lambda,
                        const SolverConfig& config = {});
SolveResult fista_solve(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda,
                        const SolverConfig& config = {});

// Consensus ADMM for the averaged sum of unfolding nuclear norms. Its
// kkt_residual is built from the dual variables, since the dual norm of the
// sum has no closed form.
SolveResult admm_matricized(const DesignMoments& m, double lambda, const SolverConfig& config = {});
SolveResult admm_matricized(const RegressionProblem& problem, double lambda, const SolverConfig& config = {});

double lambda_rule(const WidthEstimate& width, std::size_t n, double c_u, double c_R, double multiplier = 1.0);
double lambda_rule(double width_mean, std::size_t n, double c_u, double c_R, double multiplier = 1.0);

// Right-hand side of the oracle risk bound, using the analytic compatibility.
double risk_bound_predicted(const RegularizerSpec& spec, const SubspaceSpec& sub, const Shape& shape, double lambda,
                            double c_u, double c_ell);
double risk_bound_prefactor(double c_R, double c_u, double c_ell);

}  // namespace tensorreg
