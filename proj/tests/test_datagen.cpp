#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tensorreg/datagen.hpp"
#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/var.hpp"

using namespace tensorreg;

namespace {

double lag_autocorr(const Eigen::VectorXd& x) {
  const double mu = x.mean();
  double num = 0, den = 0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    den += (x(t) - mu) * (x(t) - mu);
    if (t > 0) num += (x(t) - mu) * (x(t - 1) - mu);
  }
  return num / den;
}

}  // namespace

TEST(GenTruth, EveryClassCertifies) {
  const std::vector<ModelClassSpec> specs = {
      {ModelClass::Theta1, 5, {4, 5, 6}, 1.0, {}},   {ModelClass::Theta2, 3, {4, 5, 6}, 1.0, 1},
      {ModelClass::Theta3, 2, {4, 5, 6}, 1.0, 0},    {ModelClass::Theta4, 2, {5, 5, 3}, 1.0, 2},
      {ModelClass::Theta5, 2, {4, 5, 6}, 1.0, {}},   {ModelClass::T1, 3, {6, 4, 4}, 1.0, {}},
      {ModelClass::T2, 2, {6, 4, 4}, 1.0, {}},       {ModelClass::T3, 4, {5, 2, 5}, 0.2, {}},
      {ModelClass::T4, 1, {5, 6, 7}, 1.0, {}},
  };
  for (const auto& s : specs)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      DenseTensor t = gen_truth(s, seed);
      EXPECT_EQ(t.shape(), s.shape);
      auto rep = certify_membership(s, t);
      EXPECT_TRUE(rep.member) << to_string(s.cls) << ": " << rep.detail;
      EXPECT_EQ(t, gen_truth(s, seed));
    }
}

TEST(GenTruth, SupportCountsByOracle) {
  ModelClassSpec s1{ModelClass::Theta1, 7, {4, 4, 4}, 1.0, {}};
  DenseTensor t = gen_truth(s1, 3);
  int nz = 0;
  for (double x : t.data()) nz += x != 0.0;
  EXPECT_EQ(nz, 7);
  for (double x : t.data()) EXPECT_TRUE(x == 0.0 || std::abs(x) == 1.0);

  ModelClassSpec s2{ModelClass::Theta2, 3, {4, 4, 4}, 1.0, 2};
  DenseTensor f = gen_truth(s2, 3);
  int nzf = 0;
  for (const auto& fib : oracle::fibers(f, 2)) nzf += oracle::vnorm(fib) > 0;
  EXPECT_EQ(nzf, 3);
}

TEST(GenTruth, ZeroSparsityAndInfeasible) {
  ModelClassSpec s{ModelClass::Theta1, 0, {3, 3, 3}, 1.0, {}};
  EXPECT_EQ(gen_truth(s, 1).frobenius_norm(), 0.0);
  ModelClassSpec bad{ModelClass::Theta1, 28, {3, 3, 3}, 1.0, {}};
  EXPECT_THROW(gen_truth(bad, 1), InfeasibleClass);
  ModelClassSpec bad_rank{ModelClass::Theta5, 4, {3, 3, 3}, 1.0, {}};
  EXPECT_THROW(gen_truth(bad_rank, 1), InfeasibleClass);
}

TEST(GenTruth, TuckerRankOne) {
  ModelClassSpec s{ModelClass::Theta5, 1, {4, 4, 4}, 1.0, {}};
  DenseTensor t = gen_truth(s, 9);
  for (std::size_t k = 0; k < 3; ++k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::unfolding(t, k));
    EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
  }
}

TEST(GenTruth, PairwiseComponentsCentredAndLowRank) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PairwiseComponents c = gen_pairwise_components({5, 6, 7}, 2, 1.0, seed);
    for (const Eigen::MatrixXd* m : {&c.a12, &c.a13, &c.a23}) {
      EXPECT_LT(m->rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(m->colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE(numerical_rank(*m), 2u);
    }
    DenseTensor t = pairwise_tensor(c);
    PairwiseComponents back = pairwise_components(t);
    EXPECT_LT((back.a12 - c.a12).norm(), 1e-12);
    EXPECT_LT((back.a13 - c.a13).norm(), 1e-12);
    EXPECT_LT((back.a23 - c.a23).norm(), 1e-12);
    // Entry check against the broadcast definition.
    EXPECT_NEAR(t.at({1, 2, 3}), c.a12(1, 2) + c.a13(1, 3) + c.a23(2, 3), 1e-14);
  }
}

TEST(GenProblem, NoiselessInterpolates) {
  ModelClassSpec s{ModelClass::Theta1, 4, {3, 3, 3}, 1.0, {}};
  DenseTensor t = gen_truth(s, 1);
  RegressionProblem p = gen_problem(t, 10, 3, 0.0, Design{}, 2);
  for (std::size_t i = 0; i < p.n(); ++i) {
    EXPECT_TRUE(p.responses[i].is_scalar());
    EXPECT_NEAR(p.responses[i].scalar_value(), dot(p.covariates[i], t), 1e-12);
  }
  EXPECT_EQ(p.truth.value(), t);
}

TEST(GenProblem, MultiResponseShapes) {
  DenseTensor t({6, 4, 4});
  RegressionProblem p = gen_problem(t, 5, 1, 1.0, Design{}, 3);
  EXPECT_EQ(p.covariate_shape(), Shape({6}));
  EXPECT_EQ(p.response_shape(), Shape({4, 4}));
}

TEST(GenProblem, IdentityDesignCovariance) {
  DenseTensor t({2, 2, 2});
  RegressionProblem p = gen_problem(t, 5000, 3, 1.0, Design{}, 4);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 8);
  for (const auto& x : p.covariates) c += x.vec() * x.vec().transpose();
  c /= 5000.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.8);
  EXPECT_LT(es.eigenvalues().maxCoeff(), 1.2);
}

TEST(GenProblem, CovarianceFactor) {
  DenseTensor t({2, 2, 1});
  Eigen::MatrixXd f = Eigen::Vector4d(2, 1, 1, 0.5).asDiagonal();
  RegressionProblem p = gen_problem(t, 20000, 3, 1.0, Design{f}, 5);
  double v0 = 0, v3 = 0;
  for (const auto& x : p.covariates) {
    v0 += x[0] * x[0];
    v3 += x[3] * x[3];
  }
  EXPECT_NEAR(v0 / 20000, 4.0, 0.15);
  EXPECT_NEAR(v3 / 20000, 0.25, 0.01);
  EXPECT_THROW(gen_problem(t, 10, 3, 1.0, Design{Eigen::MatrixXd::Identity(3, 3)}, 5), BadCovarianceFactor);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(4, 4);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(gen_problem(t, 10, 3, 1.0, Design{nan}, 5), BadCovarianceFactor);
}

TEST(SampledMoments, MatchDistribution) {
  // Averaged over replications the exact moment draw has mean gram I and mean
  // cross T (identity design).
  std::mt19937_64 g(6);
  DenseTensor t = oracle::gaussian({2, 2, 3}, g);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(4, 4), cross = Eigen::MatrixXd::Zero(4, 3);
  double energy = 0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    DesignMoments m = sample_design_moments(t, 50, 2, 1.0, Design{}, 100 + r);
    gram += m.gram;
    cross += m.cross;
    energy += m.response_energy;
  }
  gram /= reps;
  cross /= reps;
  Eigen::Map<const Eigen::Matrix<double, 4, 3, Eigen::RowMajor>> tm(t.data().data());
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((cross - Eigen::MatrixXd(tm)).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_NEAR(energy / reps, t.squared_norm() + 3.0, 0.05 * (t.squared_norm() + 3.0));
  EXPECT_THROW(sample_design_moments(t, 3, 2, 1.0, Design{}, 1), Error);
}

TEST(Var, WhiteNoiseAndAr1) {
  VarModel white({Eigen::MatrixXd::Zero(1, 1)});
  VarSeries s = simulate_var(white, 2000, 1);
  EXPECT_LT(std::abs(lag_autocorr(s.values.col(0))), 0.1);

  VarModel ar({Eigen::MatrixXd::Constant(1, 1, 0.5)});
  VarSeries s2 = simulate_var(ar, 5000, 2);
  EXPECT_NEAR(lag_autocorr(s2.values.col(0)), 0.5, 0.05);
}

TEST(Var, RegressionBookkeeping) {
  VarModel model = random_var_model(3, 2, 0.3, 3);
  DenseTensor truth = var_regression_truth(model);
  EXPECT_EQ(truth.shape(), Shape({3, 2, 3}));
  RegressionProblem p = gen_var_series(model, 50, 4);
  VarSeries path = simulate_var(model, 52, 4);
  for (std::size_t t = 0; t < p.n(); ++t) {
    DenseTensor pred = inner(p.covariates[t], truth);
    for (std::size_t k = 0; k < 3; ++k)
      EXPECT_NEAR(pred[k] + path.innovations(t + 2, k), p.responses[t][k], 1e-12);
  }
  // Coefficient tensor in (k, l, j) order.
  DenseTensor c = var_coefficient_tensor(model);
  EXPECT_EQ(c.at({2, 1, 1}), model.coefficients()[1](2, 1));
  EXPECT_EQ(truth.at({1, 1, 2}), model.coefficients()[1](2, 1));
  // Moments summarised from the same path.
  DesignMoments m = var_design_moments(model, 50, 4);
  DesignMoments direct = summarize(p);
  EXPECT_LT((m.gram - direct.gram).norm(), 1e-12);
  EXPECT_LT((m.cross - direct.cross).norm(), 1e-12);
}

TEST(Var, StabilityChecks) {
  EXPECT_THROW(VarModel({Eigen::MatrixXd::Constant(1, 1, 1.2)}), UnstableModel);
  VarModel fixed({Eigen::MatrixXd::Constant(1, 1, 1.2)}, true);
  EXPECT_TRUE(fixed.rescaled());
  EXPECT_LT(fixed.spectral_radius(), 1.0);
  EXPECT_NEAR(companion_radius({Eigen::MatrixXd::Constant(1, 1, 0.5)}), 0.5, 1e-12);
  VarModel m = random_var_model(4, 3, 0.2, 5);
  EXPECT_EQ(m.burn_in(), 500u + 10u * 3u);
  EXPECT_LT(m.spectral_radius(), 1.0);
  EXPECT_NEAR(var_companion_radius(var_regression_truth(m)), m.spectral_radius(), 1e-12);
}

TEST(Var, SpectralExtremaClosedForms) {
  SpectralExtrema e = var_spectral_extrema(VarModel({0.5 * Eigen::MatrixXd::Identity(2, 2)}));
  EXPECT_NEAR(e.mu_min, 0.25, 1e-6);
  EXPECT_NEAR(e.mu_max, 2.25, 1e-6);
  SpectralExtrema z = var_spectral_extrema(VarModel({Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)}));
  EXPECT_NEAR(z.mu_min, 1.0, 1e-12);
  EXPECT_NEAR(z.mu_max, 1.0, 1e-12);
  VarModel r = random_var_model(3, 2, 0.3, 6);
  SpectralExtrema re = var_spectral_extrema(r);
  EXPECT_GT(re.mu_min, 0.0);
  EXPECT_LE(re.mu_min, re.mu_max);
  EXPECT_GE(re.grid, 64u);
  EXPECT_THROW(var_spectral_extrema(r, 32), Error);
}

TEST(Var, StationaryHalves) {
  VarModel model = random_var_model(3, 2, 0.3, 7);
  VarSeries s = simulate_var(model, 40000, 8);
  auto cov = [](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    return Eigen::MatrixXd(c.transpose() * c / double(x.rows()));
  };
  Eigen::MatrixXd a = cov(s.values.topRows(20000)), b = cov(s.values.bottomRows(20000));
  EXPECT_LT((a - b).norm() / a.norm(), 0.1);
}

TEST(Var, SandwichAtModerateN) {
  VarModel model = random_var_model(3, 2, 0.3, 9);
  SpectralExtrema e = var_spectral_extrema(model);
  SandwichCheck c = var_sandwich_check(model, 2000, 10, e);
  EXPECT_NEAR(c.lower_bound, 1.0 / e.mu_max, 1e-12);
  EXPECT_NEAR(c.upper_bound, 1.0 / e.mu_min, 1e-12);
  EXPECT_LT(c.excess(), 0.15);
}
