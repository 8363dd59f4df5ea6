#include "tensorreg/rng.hpp"

#include <algorithm>

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace tensorreg {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

// boost's ziggurat normal keeps no cached state between calls, so a stream is
// a pure function of the engine position.
double Rng::normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(engine_); }

double Rng::uniform() { return boost::random::uniform_01<double>()(engine_); }

double Rng::chi_squared(double dof) { return boost::random::chi_squared_distribution<double>(dof)(engine_); }

std::size_t Rng::below(std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

double Rng::sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

Eigen::VectorXd Rng::normal_vector(std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal();
  return v;
}

Eigen::MatrixXd Rng::normal_matrix(std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal();
  return m;
}

std::vector<double> Rng::normals(std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = normal();
  return v;
}

std::vector<std::size_t> Rng::choose(std::size_t n, std::size_t k) {
  // Floyd's algorithm; deterministic given the engine state.
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = below(j + 1);
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) t = j;
    picked.push_back(t);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

Eigen::MatrixXd Rng::orthonormal(std::size_t d, std::size_t r) {
  if (r == 0) return Eigen::MatrixXd(static_cast<Eigen::Index>(d), 0);
  Eigen::MatrixXd g = normal_matrix(d, r);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  // Sign-fix so the distribution is Haar rather than QR-convention biased.
  Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (rr(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace tensorreg
