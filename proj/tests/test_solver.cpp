#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tensorreg/datagen.hpp"
#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/solver.hpp"

using namespace tensorreg;

namespace {

RegressionProblem random_problem(const DenseTensor& truth, std::size_t n, std::size_t split, double sigma,
                                 std::uint64_t seed) {
  return gen_problem(truth, n, split, sigma, Design{}, seed);
}

// (1/2n) sum |Y - <A, X>|^2 by explicit loops over flat data.
double naive_loss(const RegressionProblem& p, const DenseTensor& a) {
  double s = 0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    const auto& x = p.covariates[i].data();
    const auto& y = p.responses[i].data();
    const std::size_t dr = y.size();
    for (std::size_t r = 0; r < dr; ++r) {
      double f = 0;
      for (std::size_t c = 0; c < x.size(); ++c) f += x[c] * a.data()[c * dr + r];
      s += (y[r] - f) * (y[r] - f);
    }
  }
  return s / (2.0 * p.n());
}

}  // namespace

TEST(Objective, Examples) {
  ModelClassSpec spec{ModelClass::Theta1, 3, {2, 3, 2}, 1.0, {}};
  DenseTensor t = gen_truth(spec, 1);
  RegressionProblem p = random_problem(t, 20, 3, 0.0, 2);
  EXPECT_NEAR(objective(p, RegularizerSpec::entry_l1(), 0.0, t), 0.0, 1e-24);
  double y2 = 0;
  for (const auto& y : p.responses) y2 += y.squared_norm();
  EXPECT_NEAR(objective(p, RegularizerSpec::entry_l1(), 0.7, DenseTensor(t.shape())), y2 / 40.0, 1e-12);
}

TEST(Objective, MatchesNaiveLoops) {
  std::mt19937_64 g(3);
  for (std::size_t split : {1u, 2u, 3u}) {
    DenseTensor t = oracle::gaussian({2, 3, 2}, g);
    RegressionProblem p = random_problem(t, 15, split, 0.5, 10 + split);
    DenseTensor a = oracle::gaussian({2, 3, 2}, g);
    const auto r = RegularizerSpec::fiber_group(1);
    const double expect = naive_loss(p, a) + 0.3 * reg_eval(r, a);
    EXPECT_NEAR(objective(p, r, 0.3, a), expect, 1e-12 * (1 + expect));
    EXPECT_NEAR(objective(summarize(p), r, 0.3, a), expect, 1e-10 * (1 + expect));
  }
}

TEST(Objective, ShapeMismatch) {
  DenseTensor t({2, 2, 2});
  RegressionProblem p = random_problem(t, 5, 3, 0.1, 1);
  EXPECT_THROW(objective(p, RegularizerSpec::entry_l1(), 0.1, DenseTensor({2, 2, 3})), ShapeMismatch);
  EXPECT_THROW(empirical_norm(p, DenseTensor({2, 2})), ShapeMismatch);
}

TEST(EmpiricalNorm, Examples) {
  DenseTensor t({2, 2, 2});
  RegressionProblem p = random_problem(t, 5, 3, 0.1, 1);
  EXPECT_EQ(empirical_norm(p, t), 0.0);

  RegressionProblem one;
  one.split = 1;
  one.covariates.push_back(DenseTensor({2}, std::vector<double>{0.0, 1.0}));
  one.responses.push_back(DenseTensor({3}));
  std::mt19937_64 g(2);
  DenseTensor d = oracle::gaussian({2, 3}, g);
  double f = 0;
  for (std::size_t k = 0; k < 3; ++k) f += d.at({1, k}) * d.at({1, k});
  EXPECT_NEAR(empirical_norm(one, d), std::sqrt(f), 1e-14);
}

TEST(EmpiricalNorm, ConvergesToFrobenius) {
  std::mt19937_64 g(4);
  DenseTensor d = oracle::gaussian({3, 3, 3}, g);
  RegressionProblem p = random_problem(DenseTensor({3, 3, 3}), 2000, 3, 1.0, 5);
  const double e = std::pow(empirical_norm(p, d), 2);
  EXPECT_NEAR(e / d.squared_norm(), 1.0, 0.05);
}

TEST(LambdaRule, Arithmetic) {
  EXPECT_DOUBLE_EQ(lambda_rule(1.0, 64, 1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(lambda_rule(1.0, 64, 1.0, 1.0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(lambda_rule(1.0, 64, 1.0, 0.5) / lambda_rule(1.0, 64, 1.0, 1.0), 1.75);
  EXPECT_DOUBLE_EQ(lambda_rule(2.0, 400, 1.0, 1.0) / lambda_rule(2.0, 1600, 1.0, 1.0), 2.0);
  WidthEstimate w;
  w.mean = 1.0;
  EXPECT_DOUBLE_EQ(lambda_rule(w, 64, 1.0, 1.0), 1.0);
  EXPECT_THROW(lambda_rule(1.0, 64, 1.0, 1.0, 0.5), Error);
}

TEST(RiskBound, Arithmetic) {
  EXPECT_DOUBLE_EQ(risk_bound_prefactor(1.0, 1.0, 1.0), 27.0);
  EXPECT_DOUBLE_EQ(risk_bound_prefactor(0.5, 1.0, 1.0), 9.0 * 18.0 / 7.0);
  SupportEntries one{{{0, 0, 0}}};
  const auto r = RegularizerSpec::entry_l1();
  EXPECT_DOUBLE_EQ(risk_bound_predicted(r, one, {2, 2, 2}, 1.0, 1.0, 1.0), 27.0);
  EXPECT_DOUBLE_EQ(risk_bound_predicted(r, one, {2, 2, 2}, 2.0, 1.0, 1.0), 108.0);
  EXPECT_THROW(risk_bound_predicted(RegularizerSpec::slice_nuclear(0, 1), one, {2, 2, 2}, 1.0, 1.0, 1.0),
               UnmatchedPair);
}

TEST(Fista, LeastSquaresWhenLambdaZero) {
  std::mt19937_64 g(6);
  DenseTensor t = oracle::gaussian({2, 2, 3}, g);
  RegressionProblem p = random_problem(t, 100, 3, 0.3, 7);
  DesignMoments m = summarize(p);
  SolveResult r = fista_solve(m, RegularizerSpec::entry_l1(), 0.0);
  EXPECT_EQ(r.status, SolveStatus::Converged);
  Eigen::VectorXd ls = m.gram.ldlt().solve(m.cross.col(0));
  EXPECT_LT((r.estimate.vec() - ls).norm(), 1e-6);
  EXPECT_LT(smooth_gradient(m, r.estimate).frobenius_norm(), 1e-5);
}

TEST(Fista, NullSolutionThreshold) {
  std::mt19937_64 g(8);
  DenseTensor t = oracle::gaussian({3, 3, 3}, g);
  RegressionProblem p = random_problem(t, 60, 3, 1.0, 9);
  DesignMoments m = summarize(p);
  for (const auto& spec : {RegularizerSpec::entry_l1(), RegularizerSpec::fiber_group(2), RegularizerSpec::slice_frob(0, 1),
                           RegularizerSpec::slice_nuclear(1, 2)}) {
    // Gradient at zero is -(1/n) sum X_i Y_i.
    const double thr = reg_dual(spec, smooth_gradient(m, DenseTensor(t.shape())));
    SolveResult r = fista_solve(m, spec, thr * 1.01);
    EXPECT_EQ(r.estimate.frobenius_norm(), 0.0) << spec.describe();
    EXPECT_EQ(kkt_residual(m, spec, thr * 1.01, DenseTensor(t.shape())), 0.0);
    SolveResult below = fista_solve(m, spec, thr * 0.9);
    EXPECT_GT(below.estimate.frobenius_norm(), 0.0) << spec.describe();
  }
}

TEST(Fista, PerturbationOracleTiny) {
  std::mt19937_64 g(10);
  DenseTensor t = oracle::gaussian({2, 2, 2}, g);
  RegressionProblem p = random_problem(t, 30, 3, 0.5, 11);
  DesignMoments m = summarize(p);
  const auto spec = RegularizerSpec::entry_l1();
  const double lambda = 0.2;
  SolveResult r = fista_solve(m, spec, lambda);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  const double f = objective(m, spec, lambda, r.estimate);
  // Quadratic model of the smooth part makes each trial cheap.
  const Eigen::VectorXd a = r.estimate.vec();
  std::normal_distribution<double> n01;
  for (int k = 0; k < 1000000; ++k) {
    Eigen::VectorXd d(8);
    for (int i = 0; i < 8; ++i) d(i) = n01(g);
    d *= std::pow(10.0, -1 - (k % 3)) / d.norm();
    const Eigen::VectorXd b = a + d;
    const double loss = 0.5 * b.dot(m.gram * b) - b.dot(m.cross.col(0)) + 0.5 * m.response_energy;
    ASSERT_GE(loss + lambda * b.cwiseAbs().sum(), f - 1e-12);
  }
}

TEST(Fista, TraceAndComparisons) {
  ModelClassSpec spec{ModelClass::Theta2, 3, {4, 4, 4}, 1.0, 0};
  DenseTensor t = gen_truth(spec, 12);
  RegressionProblem p = random_problem(t, 80, 3, 1.0, 13);
  const auto r = RegularizerSpec::fiber_group(0);
  SolveResult res = fista_solve(p, r, 0.3);
  ASSERT_EQ(res.status, SolveStatus::Converged);
  for (std::size_t k = 2; k < res.objective_trace.size(); ++k)
    EXPECT_LE(res.objective_trace[k], res.objective_trace[k - 1] + 1e-12);
  const double f = objective(p, r, 0.3, res.estimate);
  EXPECT_LE(f, objective(p, r, 0.3, DenseTensor(t.shape())));
  EXPECT_LE(f, objective(p, r, 0.3, t));
  EXPECT_LT(res.kkt_residual, 1e-5);
}

TEST(Fista, RejectsNonProxKinds) {
  DenseTensor t({2, 2, 2});
  DesignMoments m = summarize(random_problem(t, 10, 3, 1.0, 1));
  EXPECT_THROW(fista_solve(m, RegularizerSpec::matricized_nuclear(), 0.1), NoClosedFormProx);
}

TEST(Kkt, OneDimensionalLasso) {
  RegressionProblem p;
  p.split = 3;
  std::mt19937_64 g(14);
  std::normal_distribution<double> n01;
  double sxy = 0, sxx = 0;
  const std::size_t n = 50;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = n01(g), y = 0.8 * x + n01(g);
    p.covariates.push_back(DenseTensor({1, 1, 1}, std::vector<double>{x}));
    p.responses.push_back(DenseTensor::scalar(y));
    sxy += x * y;
    sxx += x * x;
  }
  const double lambda = 0.1, c = sxy / n, q = sxx / n;
  const double a = (c > 0 ? 1 : -1) * std::max(std::abs(c) - lambda, 0.0) / q;
  DenseTensor est({1, 1, 1}, std::vector<double>{a});
  EXPECT_LT(kkt_residual(p, RegularizerSpec::entry_l1(), lambda, est), 1e-12);
  DenseTensor off({1, 1, 1}, std::vector<double>{a + 0.1});
  EXPECT_GT(kkt_residual(p, RegularizerSpec::entry_l1(), lambda, off), 0.0);
}

TEST(Admm, LambdaZeroMatchesFista) {
  std::mt19937_64 g(15);
  DenseTensor t = oracle::gaussian({2, 3, 2}, g);
  DesignMoments m = summarize(random_problem(t, 100, 3, 0.2, 16));
  SolverConfig cfg;
  cfg.admm_tol = 1e-9;
  cfg.max_iters = 50000;
  SolveResult a = admm_matricized(m, 0.0, cfg);
  SolveResult f = fista_solve(m, RegularizerSpec::entry_l1(), 0.0);
  EXPECT_LT((a.estimate - f.estimate).frobenius_norm(), 1e-6);
}

TEST(Admm, LargeLambdaGivesZero) {
  std::mt19937_64 g(17);
  DenseTensor t = oracle::gaussian({3, 3, 3}, g);
  DesignMoments m = summarize(random_problem(t, 60, 3, 1.0, 18));
  const double thr = reg_dual(RegularizerSpec::matricized_nuclear(), smooth_gradient(m, DenseTensor(t.shape())));
  SolveResult r = admm_matricized(m, 1.01 * thr);
  EXPECT_LT(r.estimate.frobenius_norm(), 1e-6);
}

TEST(Admm, SingleModeMatchesFiberGroup) {
  // On shape (d, 1, 1) every unfolding norm is the Euclidean norm, so the
  // averaged sum coincides with the one-fiber group norm.
  std::mt19937_64 g(19);
  DenseTensor t = oracle::gaussian({6, 1, 1}, g);
  DesignMoments m = summarize(random_problem(t, 40, 3, 1.0, 20));
  SolverConfig cfg;
  cfg.admm_tol = 1e-10;
  cfg.max_iters = 100000;
  SolveResult a = admm_matricized(m, 0.3, cfg);
  SolveResult f = fista_solve(m, RegularizerSpec::fiber_group(0), 0.3);
  EXPECT_LT((a.estimate - f.estimate).frobenius_norm(), 1e-5);
}

TEST(Admm, LowTuckerRankRecovery) {
  ModelClassSpec spec{ModelClass::Theta5, 1, {6, 6, 6}, 1.0, {}};
  DenseTensor t = gen_truth(spec, 21);
  RegressionProblem p = random_problem(t, 300, 3, 0.1, 22);
  WidthEstimate w = gaussian_width_mc(RegularizerSpec::matricized_nuclear(), t.shape(), 200, 23);
  const double lambda = 0.1 * lambda_rule(w, 300, 1.0, 1.0);
  SolveResult r = admm_matricized(p, lambda);
  EXPECT_LT((r.estimate - t).squared_norm(), 0.5 * t.squared_norm());
  EXPECT_NE(r.status, SolveStatus::Diverged);
}

TEST(Moments, AccumulatorMatchesDirectSums) {
  std::mt19937_64 g(24);
  DenseTensor t = oracle::gaussian({2, 2, 3}, g);
  RegressionProblem p = random_problem(t, 700, 2, 1.0, 25);
  DesignMoments m = summarize(p);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(4, 4), cross = Eigen::MatrixXd::Zero(4, 3);
  for (std::size_t i = 0; i < p.n(); ++i) {
    Eigen::VectorXd x = p.covariates[i].vec(), y = p.responses[i].vec();
    gram += x * x.transpose();
    cross += x * y.transpose();
  }
  EXPECT_LT((m.gram - gram / 700.0).norm(), 1e-12);
  EXPECT_LT((m.cross - cross / 700.0).norm(), 1e-12);
}
