#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace tensorreg {

// Hash a seed together with a path of counters into an independent stream
// seed (splitmix64 chain). Used for per-draw and per-replication substreams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double normal();
  double uniform();  // [0, 1)
  double chi_squared(double dof);
  std::size_t below(std::size_t n);
  double sign();

  Eigen::VectorXd normal_vector(std::size_t n);
  Eigen::MatrixXd normal_matrix(std::size_t rows, std::size_t cols);
  std::vector<double> normals(std::size_t n);
  // k distinct values from [0, n), sorted.
  std::vector<std::size_t> choose(std::size_t n, std::size_t k);
  // Haar-distributed d x r matrix with orthonormal columns.
  Eigen::MatrixXd orthonormal(std::size_t d, std::size_t r);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tensorreg
