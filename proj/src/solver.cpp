#include "tensorreg/solver.hpp"

#include <array>
#include <cmath>

#include "tensorreg/errors.hpp"

namespace tensorreg {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::Diverged: return "Diverged";
  }
  return "?";
}

double kkt_residual(const DesignMoments& m, const RegularizerSpec& spec, double lambda, const DenseTensor& a,
                    const DualOptions& opts) {
  DenseTensor g = smooth_gradient(m, a);
  const double r = reg_eval(spec, a);
  const double excess = std::max(0.0, reg_dual(spec, g, opts) - lambda);
  const double gap = std::abs(dot(g, a) + lambda * r) / (1.0 + r);
  return excess + gap;
}

double kkt_residual(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda,
                    const DenseTensor& a, const DualOptions& opts) {
  return kkt_residual(summarize(problem), spec, lambda, a, opts);
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidValue("lambda must be finite and nonnegative");
}

double power_estimate(const Eigen::MatrixXd& s, std::size_t iters) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(s.rows()) / std::sqrt(static_cast<double>(s.rows()));
  double l = 0.0;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, iters); ++i) {
    Eigen::VectorXd w = s * v;
    l = w.norm();
    if (!(l > 0.0)) return 1.0;
    v = w / l;
  }
  return l;
}

}  // namespace

SolveResult fista_solve(const DesignMoments& m, const RegularizerSpec& spec, double lambda,
                        const SolverConfig& config) {
  m.validate();
  check_lambda(lambda);
  if (!spec.has_prox()) throw NoClosedFormProx(to_string(spec.kind) + " needs admm_matricized");
  const Shape shape = m.parameter_shape();
  if (spec.kind != RegKind::EntryL1 && shape.size() != 3)
    throw ShapeMismatch(spec.describe() + " needs a third-order parameter, got " + shape_string(shape));

  auto penalty = [&](const DenseTensor& x) { return lambda == 0.0 ? 0.0 : lambda * reg_eval(spec, x); };
  auto smooth_at = [&](const ParamMatrix& p) {
    return 0.5 * (m.response_energy - 2.0 * (p.array() * m.cross.array()).sum() + (p.transpose() * (m.gram * p)).trace());
  };

  double L = power_estimate(m.gram, config.power_iters);
  ParamMatrix x = ParamMatrix::Zero(static_cast<Eigen::Index>(m.dm()), static_cast<Eigen::Index>(m.dr()));
  DenseTensor xt = from_param_matrix(m, x);
  const double f0 = smooth_at(x);
  double fx = f0;
  ParamMatrix y = x;
  double t = 1.0;

  SolveResult res;
  res.lambda = lambda;
  res.objective_trace.push_back(fx);

  // One backtracking proximal step from `from`.
  auto step = [&](const ParamMatrix& from, ParamMatrix& out, DenseTensor& out_t, double& out_f) {
    ParamMatrix g = m.gram * from - m.cross;
    const double ff = smooth_at(from);
    for (int guard = 0; guard < 200; ++guard) {
      ParamMatrix z = from - g / L;
      out_t = prox(spec, from_param_matrix(m, z), lambda / L);
      out = as_param_matrix(m, out_t);
      ParamMatrix d = out - from;
      const double fo = smooth_at(out);
      const double model = ff + (g.array() * d.array()).sum() + 0.5 * L * d.squaredNorm();
      if (fo <= model + 1e-12 * std::max(1.0, std::abs(ff))) {
        out_f = fo + penalty(out_t);
        return;
      }
      L *= 2.0;
    }
    throw InvalidValue("step size search failed; design operator is not finite");
  };

  res.status = SolveStatus::MaxIters;
  std::size_t small_changes = 0;
  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    ParamMatrix xn;
    DenseTensor xnt;
    double fn;
    step(y, xn, xnt, fn);
    if (fn > fx) {
      // Restart momentum and take a plain step from the current iterate.
      t = 1.0;
      step(x, xn, xnt, fn);
      if (fn > fx) {
        xn = x;
        xnt = xt;
        fn = fx;
      }
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    const double change = std::abs(fx - fn);
    const double scale = std::abs(fx);
    x = std::move(xn);
    xt = std::move(xnt);
    fx = fn;
    t = tn;
    res.objective_trace.push_back(fx);
    res.iterations = k;
    if (!std::isfinite(fx) || (f0 > 0.0 && fx > config.divergence_factor * f0)) {
      res.status = SolveStatus::Diverged;
      break;
    }
    const double kkt = kkt_residual(m, spec, lambda, xt, config.dual);
    if (kkt < config.kkt_tol) {
      res.status = SolveStatus::Converged;
      break;
    }
    small_changes = change <= config.tol * scale ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      res.status = SolveStatus::Converged;
      break;
    }
  }
  res.estimate = xt;
  res.kkt_residual = kkt_residual(m, spec, lambda, xt, config.dual);
  return res;
}

SolveResult fista_solve(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda,
                        const SolverConfig& config) {
  return fista_solve(summarize(problem), spec, lambda, config);
}

SolveResult admm_matricized(const DesignMoments& m, double lambda, const SolverConfig& config) {
  m.validate();
  check_lambda(lambda);
  const Shape shape = m.parameter_shape();
  if (shape.size() != 3) throw ShapeMismatch("admm_matricized needs a third-order parameter");
  const RegularizerSpec spec = RegularizerSpec::matricized_nuclear();
  const auto D = static_cast<double>(numel(shape));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.gram);
  if (eig.info() != Eigen::Success) throw InvalidValue("eigendecomposition of the design gram failed");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const Eigen::MatrixXd qtc = q.transpose() * m.cross;

  double rho = config.rho;
  const Eigen::Index dm = static_cast<Eigen::Index>(m.dm()), dr = static_cast<Eigen::Index>(m.dr());
  ParamMatrix a = ParamMatrix::Zero(dm, dr);
  std::array<ParamMatrix, 3> z, u;
  for (auto& zk : z) zk = ParamMatrix::Zero(dm, dr);
  for (auto& uk : u) uk = ParamMatrix::Zero(dm, dr);

  auto smooth_at = [&](const ParamMatrix& p) {
    return 0.5 * (m.response_energy - 2.0 * (p.array() * m.cross.array()).sum() + (p.transpose() * (m.gram * p)).trace());
  };
  const double f0 = smooth_at(a);

  SolveResult res;
  res.lambda = lambda;
  res.objective_trace.push_back(f0);
  res.status = SolveStatus::MaxIters;
  const double abs_tol = 1e-12;

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    ParamMatrix rhs = ParamMatrix::Zero(dm, dr);
    for (std::size_t k = 0; k < 3; ++k) rhs += z[k] - u[k];
    Eigen::MatrixXd w = qtc + rho * (q.transpose() * rhs);
    for (Eigen::Index i = 0; i < dm; ++i) w.row(i) /= (ev[i] + 3.0 * rho);
    a = q * w;

    double r2 = 0.0, s2 = 0.0, z2 = 0.0, u2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      DenseTensor v = from_param_matrix(m, a + u[k]);
      Eigen::MatrixXd mk = matricize(v, {k});
      DenseTensor zt = dematricize(matrix_svt(mk, lambda / (3.0 * rho)), shape, {k});
      ParamMatrix zn = as_param_matrix(m, zt);
      s2 += (zn - z[k]).squaredNorm();
      z[k] = std::move(zn);
      u[k] += a - z[k];
      r2 += (a - z[k]).squaredNorm();
      z2 += z[k].squaredNorm();
      u2 += u[k].squaredNorm();
    }
    const double r = std::sqrt(r2), s = rho * std::sqrt(s2);
    const double eps_pri = abs_tol * std::sqrt(3.0 * D) + config.admm_tol * std::max(std::sqrt(3.0) * a.norm(), std::sqrt(z2));
    const double eps_dual = abs_tol * std::sqrt(3.0 * D) + config.admm_tol * rho * std::sqrt(u2);

    DenseTensor at = from_param_matrix(m, a);
    const double fa = smooth_at(a) + (lambda == 0.0 ? 0.0 : lambda * reg_eval(spec, at));
    res.objective_trace.push_back(fa);
    res.iterations = it;
    if (!std::isfinite(fa) || (f0 > 0.0 && fa > config.divergence_factor * f0)) {
      res.status = SolveStatus::Diverged;
      break;
    }
    if (r <= eps_pri && s <= eps_dual) {
      res.status = SolveStatus::Converged;
      break;
    }
    if (config.balance_rho) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        for (auto& uk : u) uk /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        for (auto& uk : u) uk *= 2.0;
      }
    }
  }

  res.estimate = from_param_matrix(m, a);
  // Certificate from the scaled duals y_k = rho u_k: stationarity, dual
  // feasibility per unfolding, alignment, and consensus violation.
  ParamMatrix g = m.gram * a - m.cross;
  double feas = 0.0, align = 0.0, cons = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    ParamMatrix yk = rho * u[k];
    g += yk;
    feas += std::max(0.0, spectral_norm(matricize(from_param_matrix(m, yk), {k})) - lambda / 3.0);
    align += (yk.array() * a.array()).sum();
    cons += (a - z[k]).squaredNorm();
  }
  const double r6 = reg_eval(spec, res.estimate);
  res.kkt_residual = g.norm() + feas + std::abs(align - lambda * r6) / (1.0 + r6) + std::sqrt(cons);
  return res;
}

SolveResult admm_matricized(const RegressionProblem& problem, double lambda, const SolverConfig& config) {
  return admm_matricized(summarize(problem), lambda, config);
}

double lambda_rule(double width_mean, std::size_t n, double c_u, double c_R, double multiplier) {
  if (n < 1) throw InvalidValue("lambda rule needs n >= 1");
  if (!(c_u > 0.0)) throw InvalidValue("c_u must be positive");
  if (!(c_R > 0.0 && c_R <= 1.0)) throw InvalidValue("c_R must lie in (0, 1]");
  if (!(multiplier >= 1.0)) throw InvalidValue("lambda multiplier must be at least 1");
  if (!(width_mean >= 0.0)) throw InvalidValue("width must be nonnegative");
  return multiplier * 2.0 * c_u * (3.0 + c_R) / (c_R * std::sqrt(static_cast<double>(n))) * width_mean;
}

double lambda_rule(const WidthEstimate& width, std::size_t n, double c_u, double c_R, double multiplier) {
  return lambda_rule(width.mean, n, c_u, c_R, multiplier);
}

double risk_bound_prefactor(double c_R, double c_u, double c_ell) {
  if (!(c_ell > 0.0) || !(c_u >= c_ell)) throw InvalidValue("need c_u >= c_ell > 0");
  return 6.0 * (1.0 + c_R) / (3.0 + c_R) * 9.0 * c_u * c_u / (c_ell * c_ell);
}

double risk_bound_predicted(const RegularizerSpec& spec, const SubspaceSpec& sub, const Shape& shape, double lambda,
                            double c_u, double c_ell) {
  CompatibilityOptions o;
  o.monte_carlo = false;
  const double s = compatibility(spec, sub, shape, o).analytic_bound;
  return risk_bound_prefactor(spec.c_R(), c_u, c_ell) * s * lambda * lambda;
}

}  // namespace tensorreg
