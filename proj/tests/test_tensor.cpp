#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tensorreg/datagen.hpp"
#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/tensor.hpp"

using namespace tensorreg;

namespace {

DenseTensor iota(const Shape& s) {
  std::vector<double> v(numel(s));
  std::iota(v.begin(), v.end(), 1.0);
  return DenseTensor(s, v);
}

ProjectorTriple random_projectors(const Shape& s, std::array<std::size_t, 3> r, std::uint64_t seed) {
  Rng rng(seed);
  return ProjectorTriple({rng.orthonormal(s[0], r[0]), rng.orthonormal(s[1], r[1]), rng.orthonormal(s[2], r[2])});
}

}  // namespace

TEST(DenseTensor, LayoutIsLastIndexFastest) {
  DenseTensor a = iota({2, 3, 4});
  EXPECT_EQ(a.at({0, 0, 1}), 2.0);
  EXPECT_EQ(a.at({0, 1, 0}), 5.0);
  EXPECT_EQ(a.at({1, 0, 0}), 13.0);
  EXPECT_EQ(a.offset({1, 2, 3}), 23u);
}

TEST(DenseTensor, RejectsBadConstruction) {
  EXPECT_THROW(DenseTensor({2, 2}, std::vector<double>(3, 0.0)), Error);
  EXPECT_THROW(DenseTensor({2}, std::vector<double>{1.0, std::nan("")}), Error);
  EXPECT_THROW(DenseTensor({2}, std::vector<double>{1.0, INFINITY}), Error);
}

TEST(Inner, ZeroTensors) {
  DenseTensor z({2, 3});
  EXPECT_EQ(dot(z, z), 0.0);
  EXPECT_TRUE(inner(z, z).is_scalar());
}

TEST(Inner, IndicatorSelectsFiber) {
  DenseTensor a({2, 2}, std::vector<double>{1, 0, 0, 0});
  DenseTensor b = iota({2, 2, 2});
  DenseTensor r = inner(a, b);
  ASSERT_EQ(r.shape(), Shape({2}));
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 2.0);
}

TEST(Inner, PartialContractionMatchesLoops) {
  std::mt19937_64 g(1);
  DenseTensor a = oracle::gaussian({2, 3}, g);
  DenseTensor b = oracle::gaussian({2, 3, 4}, g);
  DenseTensor r = inner(a, b);
  for (std::size_t k = 0; k < 4; ++k) {
    double s = 0;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) s += a.data()[i * 3 + j] * b.data()[(i * 3 + j) * 4 + k];
    EXPECT_NEAR(r[k], s, 1e-13);
  }
}

TEST(Inner, ShapeMismatch) {
  EXPECT_THROW(inner(DenseTensor({3, 2}), DenseTensor({2, 3, 4})), ShapeMismatch);
  EXPECT_THROW(inner(DenseTensor({2, 3, 4, 5}), DenseTensor({2, 3, 4})), ShapeMismatch);
}

TEST(Inner, Linearity) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 20; ++t) {
    DenseTensor a = oracle::gaussian({3, 4}, g), b = oracle::gaussian({3, 4}, g), c = oracle::gaussian({3, 4, 2}, g);
    const double al = 0.7, be = -1.3;
    DenseTensor lhs = inner(al * a + be * b, c);
    DenseTensor rhs = al * inner(a, c) + be * inner(b, c);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(lhs[k], rhs[k], 1e-12 * (1 + std::abs(rhs[k])));
  }
}

TEST(Matricize, Mode1OnIota) {
  DenseTensor a = iota({2, 2, 2});
  Eigen::MatrixXd m = matricize(a, {0});
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(m(i, j * 2 + k), a.at({i, j, k}));
}

TEST(Matricize, UnfoldingsMatchIndexArithmetic) {
  std::mt19937_64 g(3);
  DenseTensor a = oracle::gaussian({3, 4, 5}, g);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_TRUE(unfold(a, k).isApprox(oracle::unfolding(a, k), 0.0)) << "mode " << k;
    EXPECT_NEAR(unfold(a, k).squaredNorm(), a.squared_norm(), 1e-12);
  }
  EXPECT_NEAR(dot(a, a), a.squared_norm(), 1e-12);
}

TEST(Matricize, ColumnsOfMode1AreFibers) {
  std::mt19937_64 g(4);
  DenseTensor a = oracle::gaussian({3, 2, 2}, g);
  Eigen::MatrixXd m = unfold(a, 0);
  auto f = oracle::fibers(a, 0);
  for (std::size_t c = 0; c < f.size(); ++c)
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(m(t, c), f[c][t]);
}

TEST(Matricize, RoundTrip) {
  std::mt19937_64 g(5);
  DenseTensor a = oracle::gaussian({2, 3, 4}, g);
  for (std::vector<std::size_t> s : {std::vector<std::size_t>{0}, {1}, {2}, {0, 1}, {2, 0}, {1, 2}}) {
    EXPECT_EQ(dematricize(matricize(a, s), a.shape(), s), a);
  }
}

TEST(Matricize, InvalidAxes) {
  DenseTensor a({2, 2, 2});
  EXPECT_THROW(matricize(a, {}), InvalidAxes);
  EXPECT_THROW(matricize(a, {0, 0}), InvalidAxes);
  EXPECT_THROW(matricize(a, {3}), InvalidAxes);
  EXPECT_THROW(matricize(a, {0, 1, 2}), InvalidAxes);
}

TEST(Matricize, TuckerRank) {
  for (std::size_t r : {1u, 2u, 3u}) {
    ModelClassSpec spec{ModelClass::Theta5, r, {6, 6, 6}, 1.0, {}};
    DenseTensor t = gen_truth(spec, 10 + r);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(numerical_rank(unfold(t, k)), r);
  }
}

TEST(Outer3, IndicatorAndNorm) {
  Eigen::VectorXd e = Eigen::VectorXd::Unit(3, 0);
  DenseTensor t = outer3(e, e, e);
  EXPECT_EQ(t.at({0, 0, 0}), 1.0);
  EXPECT_EQ(oracle::l1(t), 1.0);

  Rng rng(6);
  Eigen::VectorXd u = rng.normal_vector(3), v = rng.normal_vector(4), w = rng.normal_vector(5);
  DenseTensor o = outer3(u, v, w);
  EXPECT_NEAR(o.frobenius_norm(), u.norm() * v.norm() * w.norm(), 1e-12);

  std::mt19937_64 g(7);
  DenseTensor gt = oracle::gaussian({3, 4, 5}, g);
  double s = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 5; ++k) s += u(i) * v(j) * w(k) * gt.data()[oracle::idx3(gt.shape(), i, j, k)];
  EXPECT_NEAR(dot(o, gt), s, 1e-12);
}

TEST(SliceFiber, MatchOracle) {
  std::mt19937_64 g(8);
  DenseTensor a = oracle::gaussian({2, 3, 4}, g);
  auto f = oracle::fibers(a, 1);
  Eigen::VectorXd fv = fiber(a, 1, 1, 2);
  ASSERT_EQ(fv.size(), 3);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(fv(t), f[1 * 4 + 2][t]);
  // Axis 2 slices: rows over axis 0 (length 2), columns over axis 1.
  EXPECT_TRUE(slice_matrix(a, 2, 3).isApprox(oracle::slice(a, 2, 3), 0.0));
  // Axis 0 slices over (3, 4): smaller axis 1 is the row axis.
  EXPECT_TRUE(slice_matrix(a, 0, 1).isApprox(oracle::slice(a, 0, 1), 0.0));
}

TEST(ModeMultiply, MatchesUnfoldingProduct) {
  std::mt19937_64 g(9);
  DenseTensor a = oracle::gaussian({3, 4, 5}, g);
  Rng rng(9);
  Eigen::MatrixXd m = rng.normal_matrix(2, 4);
  DenseTensor r = mode_multiply(a, 1, m);
  EXPECT_EQ(r.shape(), Shape({3, 2, 5}));
  EXPECT_TRUE(unfold(r, 1).isApprox(m * oracle::unfolding(a, 1), 1e-12));
}

TEST(Permute, MovesAxes) {
  DenseTensor a = iota({2, 3, 4});
  DenseTensor p = permute(a, {2, 0, 1});
  EXPECT_EQ(p.shape(), Shape({4, 2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(p.at({k, i, j}), a.at({i, j, k}));
}

TEST(Tucker, IdentityAndZero) {
  std::mt19937_64 g(10);
  DenseTensor a = oracle::gaussian({3, 4, 5}, g);
  EXPECT_EQ(tucker_project(a, ProjectorTriple::identity(a.shape()), TuckerPattern::Full), a);
  DenseTensor q = tucker_project(a, ProjectorTriple::zero(a.shape()), TuckerPattern::Q);
  EXPECT_EQ(q.frobenius_norm(), 0.0);
}

TEST(Tucker, QAndQPerpPartitionIdentity) {
  std::mt19937_64 g(11);
  for (int t = 0; t < 10; ++t) {
    DenseTensor a = oracle::gaussian({3, 4, 5}, g);
    ProjectorTriple p = random_projectors(a.shape(), {1, 2, 3}, 100 + t);
    DenseTensor q = tucker_project(a, p, TuckerPattern::Q);
    DenseTensor qp = tucker_project(a, p, TuckerPattern::QPerp);
    EXPECT_LT((q + qp - a).frobenius_norm(), 1e-12);
    EXPECT_LT(std::abs(dot(q, qp)), 1e-10);

    // Eight sign patterns, built from explicit projector matrices, sum to A.
    DenseTensor sum(a.shape());
    for (int mask = 0; mask < 8; ++mask) {
      DenseTensor term = a;
      for (std::size_t k = 0; k < 3; ++k) {
        Eigen::MatrixXd pk = p.factor(k) * p.factor(k).transpose();
        Eigen::MatrixXd m = (mask >> k) & 1 ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(pk.rows(), pk.cols()) - pk) : pk;
        term = mode_multiply(term, k, m);
      }
      sum = sum + term;
    }
    EXPECT_LT((sum - a).frobenius_norm(), 1e-12);
  }
}

TEST(Tucker, FullIsIdempotent) {
  std::mt19937_64 g(12);
  DenseTensor a = oracle::gaussian({4, 4, 4}, g);
  ProjectorTriple p = random_projectors(a.shape(), {2, 1, 3}, 5);
  DenseTensor once = tucker_project(a, p, TuckerPattern::Full);
  DenseTensor twice = tucker_project(once, p, TuckerPattern::Full);
  EXPECT_LT((once - twice).frobenius_norm(), 1e-12);
}

TEST(Tucker, ShapeMismatchAndBadFactors) {
  DenseTensor a({3, 3, 3});
  EXPECT_THROW(tucker_project(a, ProjectorTriple::identity({3, 3, 4}), TuckerPattern::Full), ShapeMismatch);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 1);
  EXPECT_THROW(ProjectorTriple({bad, bad, bad}), Error);
}
