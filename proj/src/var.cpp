#include "tensorreg/var.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"

namespace tensorreg {

double companion_radius(const std::vector<Eigen::MatrixXd>& coefficients) {
  const auto m = coefficients.front().rows();
  const auto p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m * p, m * p);
  for (Eigen::Index j = 0; j < p; ++j) c.block(0, j * m, m, m) = coefficients[static_cast<std::size_t>(j)];
  if (p > 1) c.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
  if (es.info() != Eigen::Success) throw InvalidValue("companion eigenvalues did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

std::vector<Eigen::MatrixXd> coefficients_from_truth(const DenseTensor& t) {
  require_order(t, 3, "VAR regression truth");
  const std::size_t m = t.shape()[0], p = t.shape()[1];
  if (t.shape()[2] != m) throw ShapeMismatch("VAR regression truth must have shape (m, p, m)");
  std::vector<Eigen::MatrixXd> a(p, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < m; ++k)
        a[j](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = t.at({l, j, k});
  return a;
}

}  // namespace

double var_companion_radius(const DenseTensor& regression_truth) {
  return companion_radius(coefficients_from_truth(regression_truth));
}

VarModel::VarModel(std::vector<Eigen::MatrixXd> coefficients, bool auto_stabilize, std::optional<std::size_t> burn_in)
    : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw InvalidValue("VAR needs at least one lag");
  const auto m = coeffs_.front().rows();
  for (const auto& a : coeffs_) {
    if (a.rows() != m || a.cols() != m || m == 0) throw ShapeMismatch("VAR coefficients must be equal square matrices");
    if (!a.allFinite()) throw InvalidValue("VAR coefficients must be finite");
  }
  burn_in_ = burn_in.value_or(500 + 10 * coeffs_.size());
  const double rho = companion_radius(coeffs_);
  if (rho >= 1.0) {
    if (!auto_stabilize)
      throw UnstableModel("companion spectral radius " + std::to_string(rho) + " is not below 1");
    // Scaling A_j by c^j scales every companion eigenvalue by c.
    const double c = 0.95 / rho;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] *= std::pow(c, static_cast<double>(j + 1));
    rescaled_ = true;
  }
}

Eigen::MatrixXd VarModel::companion() const {
  const auto m = static_cast<Eigen::Index>(this->m());
  const auto p = static_cast<Eigen::Index>(this->p());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m * p, m * p);
  for (Eigen::Index j = 0; j < p; ++j) c.block(0, j * m, m, m) = coeffs_[static_cast<std::size_t>(j)];
  if (p > 1) c.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  return c;
}

double VarModel::spectral_radius() const { return companion_radius(coeffs_); }

VarModel var_model_from_truth(const DenseTensor& regression_truth, bool auto_stabilize) {
  return VarModel(coefficients_from_truth(regression_truth), auto_stabilize);
}

DenseTensor var_regression_truth(const VarModel& model) {
  const std::size_t m = model.m(), p = model.p();
  std::vector<double> data(m * p * m);
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < m; ++k)
        data[(l * p + j) * m + k] = model.coefficients()[j](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  return DenseTensor({m, p, m}, std::move(data));
}

DenseTensor var_coefficient_tensor(const VarModel& model) {
  // (l, j, k) -> (k, l, j)
  return permute(var_regression_truth(model), {2, 0, 1});
}

VarModel random_var_model(std::size_t m, std::size_t p, double scale, std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<Eigen::MatrixXd> a;
    for (std::size_t j = 0; j < p; ++j) a.push_back(scale * rng.normal_matrix(m, m));
    if (companion_radius(a) < 1.0) return VarModel(std::move(a));
  }
  throw UnstableModel("could not draw a stable model at this scale");
}

namespace {

// Streams the process after burn-in, one state per call.
class VarStream {
 public:
  VarStream(const VarModel& model, std::uint64_t seed)
      : model_(model), rng_(seed), hist_(model.p(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.m()))) {
    for (std::size_t t = 0; t < model.burn_in(); ++t) next();
  }

  // Returns x(t); `innovation` receives e(t).
  const Eigen::VectorXd& next(Eigen::VectorXd* innovation = nullptr) {
    const std::size_t p = model_.p();
    Eigen::VectorXd e = rng_.normal_vector(model_.m());
    Eigen::VectorXd x = e;
    for (std::size_t j = 0; j < p; ++j) x.noalias() += model_.coefficients()[j] * hist_[(head_ + j) % p];
    head_ = (head_ + p - 1) % p;
    hist_[head_] = std::move(x);
    if (innovation) *innovation = std::move(e);
    return hist_[head_];
  }

 private:
  const VarModel& model_;
  Rng rng_;
  std::vector<Eigen::VectorXd> hist_;  // newest at head_
  std::size_t head_ = 0;
};

}  // namespace

VarSeries simulate_var(const VarModel& model, std::size_t length, std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(model.m());
  VarStream stream(model, seed);
  VarSeries out;
  out.values.resize(static_cast<Eigen::Index>(length), m);
  out.innovations.resize(static_cast<Eigen::Index>(length), m);
  Eigen::VectorXd e;
  for (std::size_t t = 0; t < length; ++t) {
    out.values.row(static_cast<Eigen::Index>(t)) = stream.next(&e).transpose();
    out.innovations.row(static_cast<Eigen::Index>(t)) = e.transpose();
  }
  return out;
}

namespace {

// Sample i uses states i .. i+p of the post-burn-in path (the same path that
// simulate_var returns for the same seed).
template <class Sink>
void for_each_var_sample(const VarModel& model, std::size_t n, std::uint64_t seed, Sink&& sink) {
  if (n == 0) throw InvalidValue("n must be at least 1");
  const std::size_t m = model.m(), p = model.p();
  VarStream stream(model, seed);
  std::vector<Eigen::VectorXd> window;  // window[q] = state i+q
  for (std::size_t q = 0; q < p; ++q) window.push_back(stream.next());
  std::vector<double> x(m * p), y(m);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd& next = stream.next();
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t j = 0; j < p; ++j) x[l * p + j] = window[p - 1 - j][static_cast<Eigen::Index>(l)];
    for (std::size_t k = 0; k < m; ++k) y[k] = next[static_cast<Eigen::Index>(k)];
    sink(x, y);
    window.erase(window.begin());
    window.push_back(next);
  }
}

}  // namespace

RegressionProblem gen_var_series(const VarModel& model, std::size_t n, std::uint64_t seed) {
  RegressionProblem prob;
  prob.split = 2;
  prob.noise_sigma = 1.0;
  prob.truth = var_regression_truth(model);
  prob.metadata["generator"] = "gen_var_series";
  prob.metadata["seed"] = std::to_string(seed);
  prob.covariates.reserve(n);
  prob.responses.reserve(n);
  const Shape xs{model.m(), model.p()}, ys{model.m()};
  for_each_var_sample(model, n, seed, [&](const std::vector<double>& x, const std::vector<double>& y) {
    prob.covariates.emplace_back(xs, x);
    prob.responses.emplace_back(ys, y);
  });
  return prob;
}

DesignMoments var_design_moments(const VarModel& model, std::size_t n, std::uint64_t seed) {
  DesignMoments mo;
  mo.covariate_shape = {model.m(), model.p()};
  mo.response_shape = {model.m()};
  mo.n = n;
  MomentAccumulator acc(model.m() * model.p(), model.m());
  for_each_var_sample(model, n, seed,
                      [&](const std::vector<double>& x, const std::vector<double>& y) { acc.add(x.data(), y.data()); });
  const double inv = 1.0 / static_cast<double>(n);
  mo.gram = acc.gram_sum() * inv;
  mo.cross = acc.cross_sum() * inv;
  mo.response_energy = acc.energy_sum() * inv;
  return mo;
}

namespace {

std::pair<double, double> extrema_on_grid(const VarModel& model, std::size_t grid) {
  const auto m = static_cast<Eigen::Index>(model.m());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(grid);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(m, m);
    for (std::size_t j = 0; j < model.p(); ++j) {
      const std::complex<double> zj = std::polar(1.0, -theta * static_cast<double>(j + 1));
      a -= zj * model.coefficients()[j].cast<std::complex<double>>();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()[0]);
    hi = std::max(hi, es.eigenvalues()[m - 1]);
  }
  return {lo, hi};
}

}  // namespace

SpectralExtrema var_spectral_extrema(const VarModel& model, std::size_t grid, double tol) {
  if (grid < 64) throw InvalidValue("spectral grid needs at least 64 points");
  auto [lo, hi] = extrema_on_grid(model, grid);
  constexpr std::size_t kMaxGrid = std::size_t{1} << 20;
  while (grid < kMaxGrid) {
    auto [lo2, hi2] = extrema_on_grid(model, grid * 2);
    grid *= 2;
    const bool done = std::abs(lo2 - lo) < tol && std::abs(hi2 - hi) < tol;
    lo = lo2;
    hi = hi2;
    if (done) break;
  }
  return {lo, hi, grid};
}

double SandwichCheck::excess() const {
  return std::max({0.0, (lower_bound - gram_min) / lower_bound, (gram_max - upper_bound) / upper_bound});
}

SandwichCheck var_sandwich_check(const VarModel& model, std::size_t n, std::uint64_t seed,
                                 const SpectralExtrema& extrema) {
  if (!(extrema.mu_min > 0.0)) throw InvalidValue("mu_min must be positive");
  const DesignMoments mo = var_design_moments(model, n, seed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mo.gram, Eigen::EigenvaluesOnly);
  SandwichCheck c;
  c.lower_bound = 1.0 / extrema.mu_max;
  c.upper_bound = 1.0 / extrema.mu_min;
  c.gram_min = es.eigenvalues()[0];
  c.gram_max = es.eigenvalues()[es.eigenvalues().size() - 1];
  return c;
}

}  // namespace tensorreg
