#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's kernels beyond constructing tensors and reading their data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tensorreg/tensor.hpp"

namespace oracle {

using tensorreg::DenseTensor;
using tensorreg::Shape;

inline std::size_t idx3(const Shape& d, std::size_t i, std::size_t j, std::size_t k) {
  return (i * d[1] + j) * d[2] + k;
}

inline DenseTensor gaussian(const Shape& s, std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::size_t len = 1;
  for (auto d : s) len *= d;
  std::vector<double> v(len);
  for (auto& x : v) x = n(g);
  return DenseTensor(s, std::move(v));
}

inline double l1(const DenseTensor& a) {
  double s = 0;
  for (double x : a.data()) s += std::abs(x);
  return s;
}

inline double linf(const DenseTensor& a) {
  double s = 0;
  for (double x : a.data()) s = std::max(s, std::abs(x));
  return s;
}

// Fibers along `mode` as plain vectors, in lexicographic order of the other
// two indices.
inline std::vector<std::vector<double>> fibers(const DenseTensor& a, std::size_t mode) {
  const Shape& d = a.shape();
  std::vector<std::vector<double>> out;
  std::size_t o1 = mode == 0 ? 1 : 0, o2 = mode == 2 ? 1 : 2;
  for (std::size_t p = 0; p < d[o1]; ++p)
    for (std::size_t q = 0; q < d[o2]; ++q) {
      std::vector<double> f;
      for (std::size_t t = 0; t < d[mode]; ++t) {
        std::size_t ix[3];
        ix[mode] = t;
        ix[o1] = p;
        ix[o2] = q;
        f.push_back(a.data()[idx3(d, ix[0], ix[1], ix[2])]);
      }
      out.push_back(f);
    }
  return out;
}

// Slice `index` along `axis` as a d_a x d_b matrix over the two other axes in
// increasing order.
inline Eigen::MatrixXd slice(const DenseTensor& a, std::size_t axis, std::size_t index) {
  const Shape& d = a.shape();
  std::size_t o1 = axis == 0 ? 1 : 0, o2 = axis == 2 ? 1 : 2;
  Eigen::MatrixXd m(d[o1], d[o2]);
  for (std::size_t p = 0; p < d[o1]; ++p)
    for (std::size_t q = 0; q < d[o2]; ++q) {
      std::size_t ix[3];
      ix[axis] = index;
      ix[o1] = p;
      ix[o2] = q;
      m(p, q) = a.data()[idx3(d, ix[0], ix[1], ix[2])];
    }
  return m;
}

inline double vnorm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double nuclear(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

inline double spectral(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Mode-k unfolding by index arithmetic: row j_k, column over the other two
// indices, later axis fastest.
inline Eigen::MatrixXd unfolding(const DenseTensor& a, std::size_t k) {
  const Shape& d = a.shape();
  std::size_t o1 = k == 0 ? 1 : 0, o2 = k == 2 ? 1 : 2;
  Eigen::MatrixXd m(d[k], d[o1] * d[o2]);
  for (std::size_t i = 0; i < d[0]; ++i)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t l = 0; l < d[2]; ++l) {
        const std::size_t ix[3] = {i, j, l};
        m(ix[k], ix[o1] * d[o2] + ix[o2]) = a.data()[idx3(d, i, j, l)];
      }
  return m;
}

// Group structure of a prox-friendly norm as lists of flat indices plus how
// to take the group norm: Euclidean (entry, fiber, slice-Frobenius) or
// nuclear (slice matrices of shape rows x cols).
struct Groups {
  std::vector<std::vector<std::size_t>> members;
  bool nuclear = false;
  std::size_t rows = 1, cols = 1;
};

inline Groups entry_groups(const Shape& d) {
  Groups g;
  for (std::size_t i = 0; i < d[0] * d[1] * d[2]; ++i) g.members.push_back({i});
  return g;
}

inline Groups fiber_groups(const Shape& d, std::size_t mode) {
  Groups g;
  std::size_t o1 = mode == 0 ? 1 : 0, o2 = mode == 2 ? 1 : 2;
  for (std::size_t p = 0; p < d[o1]; ++p)
    for (std::size_t q = 0; q < d[o2]; ++q) {
      std::vector<std::size_t> m;
      for (std::size_t t = 0; t < d[mode]; ++t) {
        std::size_t ix[3];
        ix[mode] = t;
        ix[o1] = p;
        ix[o2] = q;
        m.push_back(idx3(d, ix[0], ix[1], ix[2]));
      }
      g.members.push_back(m);
    }
  return g;
}

// Slices along `axis`, members row-major over the two other axes.
inline Groups slice_groups(const Shape& d, std::size_t axis, bool nuclear) {
  Groups g;
  g.nuclear = nuclear;
  std::size_t o1 = axis == 0 ? 1 : 0, o2 = axis == 2 ? 1 : 2;
  g.rows = d[o1];
  g.cols = d[o2];
  for (std::size_t c = 0; c < d[axis]; ++c) {
    std::vector<std::size_t> m;
    for (std::size_t p = 0; p < d[o1]; ++p)
      for (std::size_t q = 0; q < d[o2]; ++q) {
        std::size_t ix[3];
        ix[axis] = c;
        ix[o1] = p;
        ix[o2] = q;
        m.push_back(idx3(d, ix[0], ix[1], ix[2]));
      }
    g.members.push_back(m);
  }
  return g;
}

inline double group_norm_sum(const Groups& g, const Eigen::VectorXd& a) {
  double s = 0;
  for (const auto& m : g.members) {
    Eigen::VectorXd v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v(i) = a(m[i]);
    if (g.nuclear) {
      Eigen::MatrixXd mat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          v.data(), g.rows, g.cols);
      s += nuclear(mat);
    } else {
      s += v.norm();
    }
  }
  return s;
}

// Projection of (x, t) onto {|x|_1 <= t}.
inline void project_l1_cone(Eigen::VectorXd& x, double& t) {
  const double n1 = x.cwiseAbs().sum();
  if (n1 <= t) return;
  if (x.cwiseAbs().maxCoeff() <= -t) {
    x.setZero();
    t = 0;
    return;
  }
  // Find theta >= 0 with sum max(|x_i| - theta, 0) = t + theta.
  double lo = 0, hi = x.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double th = 0.5 * (lo + hi);
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::max(std::abs(x(i)) - th, 0.0);
    if (s > t + th)
      lo = th;
    else
      hi = th;
  }
  const double th = 0.5 * (lo + hi);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double m = std::max(std::abs(x(i)) - th, 0.0);
    x(i) = x(i) >= 0 ? m : -m;
  }
  t = t + th;
}

// Projection of (x, t) onto the second-order cone {|x|_2 <= t}.
inline void project_soc(Eigen::VectorXd& x, double& t) {
  const double nx = x.norm();
  if (nx <= t) return;
  if (nx <= -t) {
    x.setZero();
    t = 0;
    return;
  }
  const double a = 0.5 * (nx + t);
  x *= a / nx;
  t = a;
}

// Projection of (X, t) onto {|X|_* <= t} through the singular values.
inline void project_nuclear_cone(Eigen::MatrixXd& x, double& t) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  project_l1_cone(s, t);
  x = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

// Minimises 1/2 a^T S a - c^T a + lambda sum_g t_g subject to
// (a_g, t_g) in the group norm cone by projected gradient with step 1/L.
inline Eigen::VectorXd cone_projected_gradient(const Eigen::MatrixXd& s, const Eigen::VectorXd& c, double lambda,
                                               const Groups& g, std::size_t iters) {
  const std::size_t D = static_cast<std::size_t>(c.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double step = 1.0 / es.eigenvalues().maxCoeff();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D));
  std::vector<double> t(g.members.size(), 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = s * a - c;
    a -= step * grad;
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      const auto& m = g.members[k];
      t[k] -= step * lambda;
      Eigen::VectorXd v(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) v(i) = a(m[i]);
      if (g.nuclear) {
        Eigen::MatrixXd mat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            v.data(), g.rows, g.cols);
        project_nuclear_cone(mat, t[k]);
        for (std::size_t p = 0; p < g.rows; ++p)
          for (std::size_t q = 0; q < g.cols; ++q) v(p * g.cols + q) = mat(p, q);
      } else if (m.size() == 1) {
        project_l1_cone(v, t[k]);
      } else {
        project_soc(v, t[k]);
      }
      for (std::size_t i = 0; i < m.size(); ++i) a(m[i]) = v(i);
    }
  }
  return a;
}

}  // namespace oracle
