#include "tensorreg/problem.hpp"

#include <cmath>

#include "tensorreg/errors.hpp"

namespace tensorreg {

Shape RegressionProblem::covariate_shape() const {
  if (covariates.empty()) throw InvalidValue("problem has no samples");
  return covariates.front().shape();
}

Shape RegressionProblem::response_shape() const {
  if (responses.empty()) throw InvalidValue("problem has no samples");
  return responses.front().shape();
}

Shape RegressionProblem::parameter_shape() const {
  Shape s = covariate_shape();
  auto r = response_shape();
  s.insert(s.end(), r.begin(), r.end());
  return s;
}

void RegressionProblem::validate() const {
  if (covariates.empty()) throw InvalidValue("problem needs n >= 1 samples");
  if (covariates.size() != responses.size()) throw ShapeMismatch("covariate and response counts differ");
  const auto xs = covariates.front().shape();
  const auto ys = responses.front().shape();
  if (xs.size() != split) throw ShapeMismatch("covariate order does not equal the split M");
  for (const auto& x : covariates)
    if (x.shape() != xs) throw ShapeMismatch("covariates do not share a shape");
  for (const auto& y : responses)
    if (y.shape() != ys) throw ShapeMismatch("responses do not share a shape");
  if (!(noise_sigma >= 0.0)) throw InvalidValue("noise sigma must be nonnegative");
  if (truth && truth->shape() != parameter_shape())
    throw ShapeMismatch("truth shape " + shape_string(truth->shape()) + " is not covariate ++ response shape " +
                        shape_string(parameter_shape()));
}

Shape DesignMoments::parameter_shape() const {
  Shape s = covariate_shape;
  s.insert(s.end(), response_shape.begin(), response_shape.end());
  return s;
}

void DesignMoments::validate() const {
  const auto dm_ = numel(covariate_shape), dr_ = numel(response_shape);
  if (n == 0) throw InvalidValue("moments from zero samples");
  if (static_cast<std::size_t>(gram.rows()) != dm_ || static_cast<std::size_t>(gram.cols()) != dm_ ||
      static_cast<std::size_t>(cross.rows()) != dm_ || static_cast<std::size_t>(cross.cols()) != dr_)
    throw ShapeMismatch("moment matrices do not match the declared shapes");
}

MomentAccumulator::MomentAccumulator(std::size_t dm, std::size_t dr, std::size_t block)
    : dm_(dm), dr_(dr), block_(block),
      xb_(static_cast<Eigen::Index>(block), static_cast<Eigen::Index>(dm)),
      yb_(static_cast<Eigen::Index>(block), static_cast<Eigen::Index>(dr)),
      gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dm), static_cast<Eigen::Index>(dm))),
      cross_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dm), static_cast<Eigen::Index>(dr))) {}

void MomentAccumulator::add(const double* x, const double* y) {
  const auto r = static_cast<Eigen::Index>(fill_);
  for (std::size_t j = 0; j < dm_; ++j) xb_(r, static_cast<Eigen::Index>(j)) = x[j];
  for (std::size_t j = 0; j < dr_; ++j) yb_(r, static_cast<Eigen::Index>(j)) = y[j];
  ++fill_;
  ++count_;
  if (fill_ == block_) flush();
}

void MomentAccumulator::flush() {
  if (fill_ == 0) return;
  const auto r = static_cast<Eigen::Index>(fill_);
  auto xs = xb_.topRows(r);
  auto ys = yb_.topRows(r);
  gram_.noalias() += xs.transpose() * xs;
  cross_.noalias() += xs.transpose() * ys;
  energy_ += ys.squaredNorm();
  fill_ = 0;
}

Eigen::MatrixXd MomentAccumulator::gram_sum() {
  flush();
  return gram_;
}
Eigen::MatrixXd MomentAccumulator::cross_sum() {
  flush();
  return cross_;
}
double MomentAccumulator::energy_sum() {
  flush();
  return energy_;
}

DesignMoments summarize(const RegressionProblem& problem) {
  problem.validate();
  DesignMoments m;
  m.covariate_shape = problem.covariate_shape();
  m.response_shape = problem.response_shape();
  m.n = problem.n();
  MomentAccumulator acc(numel(m.covariate_shape), numel(m.response_shape));
  for (std::size_t i = 0; i < m.n; ++i)
    acc.add(problem.covariates[i].data().data(), problem.responses[i].data().data());
  const double inv = 1.0 / static_cast<double>(m.n);
  m.gram = acc.gram_sum() * inv;
  m.cross = acc.cross_sum() * inv;
  m.response_energy = acc.energy_sum() * inv;
  return m;
}

ParamMatrix as_param_matrix(const DesignMoments& m, const DenseTensor& a) {
  if (a.shape() != m.parameter_shape())
    throw ShapeMismatch("parameter shape " + shape_string(a.shape()) + " vs expected " +
                        shape_string(m.parameter_shape()));
  return Eigen::Map<const ParamMatrix>(a.data().data(), static_cast<Eigen::Index>(m.dm()),
                                       static_cast<Eigen::Index>(m.dr()));
}

DenseTensor from_param_matrix(const DesignMoments& m, const Eigen::Ref<const ParamMatrix>& a) {
  ParamMatrix c = a;
  return DenseTensor(m.parameter_shape(), std::vector<double>(c.data(), c.data() + c.size()));
}

double smooth_loss(const DesignMoments& m, const DenseTensor& a) {
  ParamMatrix p = as_param_matrix(m, a);
  const double quad = (p.transpose() * (m.gram * p)).trace();
  const double lin = (p.array() * m.cross.array()).sum();
  return 0.5 * (m.response_energy - 2.0 * lin + quad);
}

DenseTensor smooth_gradient(const DesignMoments& m, const DenseTensor& a) {
  ParamMatrix p = as_param_matrix(m, a);
  ParamMatrix g = m.gram * p - m.cross;
  return from_param_matrix(m, g);
}

namespace {

void check_problem_param(const RegressionProblem& problem, const DenseTensor& a) {
  if (a.shape() != problem.parameter_shape())
    throw ShapeMismatch("parameter shape " + shape_string(a.shape()) + " vs expected " +
                        shape_string(problem.parameter_shape()));
}

}  // namespace

double objective(const RegressionProblem& problem, const RegularizerSpec& spec, double lambda,
                 const DenseTensor& a) {
  problem.validate();
  check_problem_param(problem, a);
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) {
    DenseTensor r = problem.responses[i] - inner(problem.covariates[i], a);
    sum += r.squared_norm();
  }
  double value = sum / (2.0 * static_cast<double>(problem.n()));
  if (lambda != 0.0) value += lambda * reg_eval(spec, a);
  return value;
}

double objective(const DesignMoments& m, const RegularizerSpec& spec, double lambda, const DenseTensor& a) {
  double value = smooth_loss(m, a);
  if (lambda != 0.0) value += lambda * reg_eval(spec, a);
  return value;
}

double empirical_norm(const RegressionProblem& problem, const DenseTensor& delta) {
  problem.validate();
  check_problem_param(problem, delta);
  double sum = 0.0;
  for (const auto& x : problem.covariates) sum += inner(x, delta).squared_norm();
  return std::sqrt(sum / static_cast<double>(problem.n()));
}

double empirical_norm(const DesignMoments& m, const DenseTensor& delta) {
  ParamMatrix p = as_param_matrix(m, delta);
  const double q = (p.transpose() * (m.gram * p)).trace();
  return std::sqrt(std::max(0.0, q));
}

}  // namespace tensorreg
