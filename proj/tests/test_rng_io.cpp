#include <gtest/gtest.h>

#include <cstring>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/tns_io.hpp"

using namespace tensorreg;

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 50; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    (void)c;
  }
  EXPECT_NE(Rng(42).normal(), Rng(43).normal());
}

TEST(Rng, DeriveSeedSeparatesPaths) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j) seen.insert(derive_seed(7, {i, j}));
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
}

TEST(Rng, MomentsOfNormalAndUniform) {
  Rng r(1);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
    u += r.uniform();
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(u / n, 0.5, 0.005);
}

TEST(Rng, ChiSquaredMean) {
  Rng r(2);
  double s = 0;
  for (int i = 0; i < 50000; ++i) s += r.chi_squared(7.0);
  EXPECT_NEAR(s / 50000, 7.0, 0.08);
}

TEST(Rng, ChooseAndBelow) {
  Rng r(3);
  auto c = r.choose(20, 7);
  ASSERT_EQ(c.size(), 7u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_EQ(std::set<std::size_t>(c.begin(), c.end()).size(), 7u);
  EXPECT_LT(c.back(), 20u);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(5), 5u);
  auto all = r.choose(5, 5);
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Rng, OrthonormalColumns) {
  Rng r(4);
  Eigen::MatrixXd q = r.orthonormal(7, 3);
  EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
}

TEST(Tns, RoundTripAndLayout) {
  std::mt19937_64 g(5);
  DenseTensor a = oracle::gaussian({2, 3, 4}, g);
  std::stringstream ss;
  write_tns(ss, a);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4 + 4 + 3 * 8 + 24 * 8u);
  EXPECT_EQ(bytes.substr(0, 4), "TNS1");
  std::uint32_t order;
  std::memcpy(&order, bytes.data() + 4, 4);
  EXPECT_EQ(order, 3u);
  std::uint64_t d1;
  std::memcpy(&d1, bytes.data() + 16, 8);
  EXPECT_EQ(d1, 3u);
  double first;
  std::memcpy(&first, bytes.data() + 32, 8);
  EXPECT_EQ(first, a[0]);
  std::stringstream in(bytes);
  EXPECT_EQ(read_tns(in), a);
}

TEST(Tns, ScalarRoundTrip) {
  std::stringstream ss;
  write_tns(ss, DenseTensor::scalar(2.5));
  EXPECT_EQ(read_tns(ss).scalar_value(), 2.5);
}

TEST(Tns, RejectsCorruptInput) {
  std::stringstream ss;
  write_tns(ss, DenseTensor::filled({2, 2}, 1.0));
  std::string bytes = ss.str();

  std::string bad_magic = bytes;
  bad_magic[3] = '2';
  std::stringstream a(bad_magic);
  EXPECT_THROW(read_tns(a), FormatError);

  std::stringstream b(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_tns(b), FormatError);

  std::stringstream c(bytes + "xx");
  EXPECT_THROW(read_tns(c), FormatError);

  EXPECT_THROW(read_tns_file("/nonexistent/dir/x.tns"), IoError);
}
