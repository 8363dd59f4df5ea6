#include "tensorreg/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/spectral.hpp"
#include "tensorreg/var.hpp"

namespace tensorreg {

std::string to_string(ModelClass c) {
  switch (c) {
    case ModelClass::Theta1: return "Theta1";
    case ModelClass::Theta2: return "Theta2";
    case ModelClass::Theta3: return "Theta3";
    case ModelClass::Theta4: return "Theta4";
    case ModelClass::Theta5: return "Theta5";
    case ModelClass::T1: return "T1";
    case ModelClass::T2: return "T2";
    case ModelClass::T3: return "T3";
    case ModelClass::T4: return "T4";
  }
  return "?";
}

ModelClass model_class_from_string(const std::string& name) {
  for (auto c : {ModelClass::Theta1, ModelClass::Theta2, ModelClass::Theta3, ModelClass::Theta4, ModelClass::Theta5,
                 ModelClass::T1, ModelClass::T2, ModelClass::T3, ModelClass::T4})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown model class '" + name + "'");
}

std::size_t ModelClassSpec::effective_axis() const {
  switch (cls) {
    case ModelClass::Theta2: return axis.value_or(0);
    case ModelClass::Theta3:
    case ModelClass::Theta4: return axis.value_or(2);
    case ModelClass::T1:
    case ModelClass::T2: return 0;
    case ModelClass::T3: return 1;
    default: return 0;
  }
}

void ModelClassSpec::validate() const {
  if (shape.size() != 3) throw InfeasibleClass("model classes live on third-order shapes");
  for (auto d : shape)
    if (d == 0) throw InfeasibleClass("zero extent");
  if (!std::isfinite(magnitude) || magnitude <= 0.0) throw InfeasibleClass("magnitude must be positive");
  const std::size_t ax = effective_axis();
  if (ax > 2) throw InfeasibleClass("axis out of range");
  const std::size_t d1 = shape[0], d2 = shape[1], d3 = shape[2];
  const std::size_t o1 = ax == 0 ? 1 : 0, o2 = ax == 2 ? 1 : 2;
  auto fail = [&](const std::string& why) { throw InfeasibleClass(to_string(cls) + ": " + why); };
  switch (cls) {
    case ModelClass::Theta1:
      if (param > d1 * d2 * d3) fail("s exceeds the number of entries");
      break;
    case ModelClass::Theta2:
    case ModelClass::T3:
      if (param > shape[o1] * shape[o2]) fail("s exceeds the number of fibers");
      if (cls == ModelClass::T3 && d1 != d3) fail("VAR layout (m, p, m) needs equal first and last extents");
      break;
    case ModelClass::Theta3:
    case ModelClass::T1:
      if (param > shape[ax]) fail("s exceeds the number of slices");
      if (cls == ModelClass::T1 && d2 != d3) fail("multi-response layout (p, m, m) needs square slices");
      break;
    case ModelClass::Theta4:
    case ModelClass::T2:
      if (param > shape[ax] * std::min(shape[o1], shape[o2])) fail("r exceeds the total slice rank");
      if (cls == ModelClass::T2 && d2 != d3) fail("multi-response layout (p, m, m) needs square slices");
      break;
    case ModelClass::Theta5:
      if (param > std::min({d1, d2, d3})) fail("r exceeds the smallest extent");
      break;
    case ModelClass::T4:
      if (param + 1 > std::min({d1, d2, d3})) fail("centred components have rank at most min(d) - 1");
      break;
  }
}

std::size_t numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol) {
  auto s = singular_values(m);
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol * s[0]) ++r;
  return r;
}

namespace {

Eigen::MatrixXd centring(std::size_t d) {
  return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) -
         Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), 1.0 / static_cast<double>(d));
}

Eigen::MatrixXd centred_low_rank(Rng& rng, std::size_t rows, std::size_t cols, std::size_t r, double magnitude) {
  if (r == 0) return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::MatrixXd m = centring(rows) * rng.normal_matrix(rows, r) * rng.normal_matrix(cols, r).transpose() * centring(cols);
  return m * (magnitude / m.norm());
}

std::vector<double> zero_data(const Shape& s) { return std::vector<double>(numel(s), 0.0); }

DenseTensor sparse_entries(const ModelClassSpec& spec, Rng& rng) {
  auto data = zero_data(spec.shape);
  for (auto i : rng.choose(data.size(), spec.param)) data[i] = spec.magnitude * rng.sign();
  return DenseTensor(spec.shape, std::move(data));
}

DenseTensor sparse_fibers(const ModelClassSpec& spec, Rng& rng) {
  const auto& s = spec.shape;
  const std::size_t k = spec.effective_axis(), p = k == 0 ? 1 : 0, q = k == 2 ? 1 : 2;
  const auto st = strides_of(s);
  auto data = zero_data(s);
  for (auto f : rng.choose(s[p] * s[q], spec.param)) {
    const std::size_t i = f / s[q], j = f % s[q];
    for (std::size_t t = 0; t < s[k]; ++t) data[i * st[p] + j * st[q] + t * st[k]] = spec.magnitude * rng.sign();
  }
  return DenseTensor(s, std::move(data));
}

DenseTensor sparse_slices(const ModelClassSpec& spec, Rng& rng) {
  const auto& s = spec.shape;
  const std::size_t c = spec.effective_axis(), p = c == 0 ? 1 : 0, q = c == 2 ? 1 : 2;
  const auto st = strides_of(s);
  auto data = zero_data(s);
  for (auto j : rng.choose(s[c], spec.param))
    for (std::size_t a = 0; a < s[p]; ++a)
      for (std::size_t b = 0; b < s[q]; ++b) data[j * st[c] + a * st[p] + b * st[q]] = spec.magnitude * rng.sign();
  return DenseTensor(s, std::move(data));
}

DenseTensor low_rank_slices(const ModelClassSpec& spec, Rng& rng) {
  const auto& s = spec.shape;
  const std::size_t c = spec.effective_axis(), p = c == 0 ? 1 : 0, q = c == 2 ? 1 : 2;
  const std::size_t cap = std::min(s[p], s[q]);
  std::vector<std::size_t> rank(s[c], 0);
  for (std::size_t u = 0; u < spec.param; ++u) {
    std::size_t j;
    do {
      j = rng.below(s[c]);
    } while (rank[j] >= cap);
    ++rank[j];
  }
  const auto st = strides_of(s);
  auto data = zero_data(s);
  for (std::size_t j = 0; j < s[c]; ++j) {
    if (rank[j] == 0) continue;
    Eigen::MatrixXd m = rng.normal_matrix(s[p], rank[j]) * rng.normal_matrix(s[q], rank[j]).transpose();
    m *= spec.magnitude / m.norm();
    for (std::size_t a = 0; a < s[p]; ++a)
      for (std::size_t b = 0; b < s[q]; ++b)
        data[j * st[c] + a * st[p] + b * st[q]] = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return DenseTensor(s, std::move(data));
}

DenseTensor low_tucker(const ModelClassSpec& spec, Rng& rng) {
  const std::size_t r = spec.param;
  if (r == 0) return DenseTensor(spec.shape);
  DenseTensor t(Shape{r, r, r}, rng.normals(r * r * r));
  for (std::size_t k = 0; k < 3; ++k) t = mode_multiply(t, k, rng.orthonormal(spec.shape[k], r));
  return (spec.magnitude / t.frobenius_norm()) * t;
}

}  // namespace

PairwiseComponents gen_pairwise_components(const Shape& shape, std::size_t r, double magnitude, std::uint64_t seed) {
  if (shape.size() != 3) throw InfeasibleClass("pairwise model needs a third-order shape");
  Rng rng(seed);
  PairwiseComponents c;
  c.a12 = centred_low_rank(rng, shape[0], shape[1], r, magnitude);
  c.a13 = centred_low_rank(rng, shape[0], shape[2], r, magnitude);
  c.a23 = centred_low_rank(rng, shape[1], shape[2], r, magnitude);
  return c;
}

DenseTensor pairwise_tensor(const PairwiseComponents& c) {
  const std::size_t d1 = static_cast<std::size_t>(c.a12.rows()), d2 = static_cast<std::size_t>(c.a12.cols()),
                    d3 = static_cast<std::size_t>(c.a13.cols());
  if (static_cast<std::size_t>(c.a13.rows()) != d1 || static_cast<std::size_t>(c.a23.rows()) != d2 ||
      static_cast<std::size_t>(c.a23.cols()) != d3)
    throw ShapeMismatch("pairwise component sizes disagree");
  std::vector<double> data(d1 * d2 * d3);
  std::size_t o = 0;
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      for (std::size_t k = 0; k < d3; ++k) {
        const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j), K = static_cast<Eigen::Index>(k);
        data[o++] = c.a12(I, J) + c.a13(I, K) + c.a23(J, K);
      }
  return DenseTensor({d1, d2, d3}, std::move(data));
}

PairwiseComponents pairwise_components(const DenseTensor& t) {
  require_order(t, 3, "pairwise_components");
  const std::size_t d1 = t.shape()[0], d2 = t.shape()[1], d3 = t.shape()[2];
  PairwiseComponents c;
  c.a12 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d2));
  c.a13 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d3));
  c.a23 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d2), static_cast<Eigen::Index>(d3));
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      for (std::size_t k = 0; k < d3; ++k) {
        const double v = t.at({i, j, k});
        const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j), K = static_cast<Eigen::Index>(k);
        c.a12(I, J) += v / static_cast<double>(d3);
        c.a13(I, K) += v / static_cast<double>(d2);
        c.a23(J, K) += v / static_cast<double>(d1);
      }
  return c;
}

DenseTensor gen_truth(const ModelClassSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  switch (spec.cls) {
    case ModelClass::Theta1: return sparse_entries(spec, rng);
    case ModelClass::Theta2: return sparse_fibers(spec, rng);
    case ModelClass::Theta3:
    case ModelClass::T1: return sparse_slices(spec, rng);
    case ModelClass::Theta4:
    case ModelClass::T2: return low_rank_slices(spec, rng);
    case ModelClass::Theta5: return low_tucker(spec, rng);
    case ModelClass::T3: {
      // Lag fibers of a VAR(p) regression; redraw until the process is stable.
      for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        DenseTensor t = sparse_fibers(spec, rng);
        if (var_companion_radius(t) < 1.0) return t;
      }
      throw InfeasibleClass("T3: no stable VAR coefficient draw at this magnitude");
    }
    case ModelClass::T4:
      return pairwise_tensor(gen_pairwise_components(spec.shape, spec.param, spec.magnitude, rng.engine()()));
  }
  return DenseTensor(spec.shape);
}

MembershipReport certify_membership(const ModelClassSpec& spec, const DenseTensor& t, double tol) {
  spec.validate();
  MembershipReport rep;
  if (t.shape() != spec.shape) {
    rep.detail = "shape mismatch";
    return rep;
  }
  const auto& s = spec.shape;
  const std::size_t ax = spec.effective_axis();
  auto count_groups = [&](const RegularizerSpec& rs) {
    auto g = group_layout(rs, s);
    std::size_t nz = 0;
    for (std::size_t k = 0; k < g.count(); ++k) {
      bool any = false;
      for (std::size_t i = g.start[k]; i < g.start[k + 1]; ++i) any = any || t[g.index[i]] != 0.0;
      nz += any ? 1 : 0;
    }
    return nz;
  };
  auto other_axes = [&](std::size_t c) {
    return std::array<std::size_t, 2>{c == 0 ? 1u : 0u, c == 2 ? 1u : 2u};
  };
  switch (spec.cls) {
    case ModelClass::Theta1: {
      const auto nz = count_groups(RegularizerSpec::entry_l1());
      rep.member = nz <= spec.param;
      rep.detail = "nonzero entries " + std::to_string(nz);
      break;
    }
    case ModelClass::Theta2:
    case ModelClass::T3: {
      const auto nz = count_groups(RegularizerSpec::fiber_group(ax));
      rep.member = nz <= spec.param;
      rep.detail = "nonzero fibers " + std::to_string(nz);
      break;
    }
    case ModelClass::Theta3:
    case ModelClass::T1: {
      auto o = other_axes(ax);
      const auto nz = count_groups(RegularizerSpec::slice_frob(o[0], o[1]));
      rep.member = nz <= spec.param;
      rep.detail = "nonzero slices " + std::to_string(nz);
      break;
    }
    case ModelClass::Theta4:
    case ModelClass::T2: {
      std::size_t total = 0;
      for (std::size_t j = 0; j < s[ax]; ++j) total += numerical_rank(slice_matrix(t, ax, j), tol);
      rep.member = total <= spec.param;
      rep.detail = "total slice rank " + std::to_string(total);
      break;
    }
    case ModelClass::Theta5: {
      std::size_t worst = 0;
      for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, numerical_rank(unfold(t, k), tol));
      rep.member = worst <= spec.param;
      rep.detail = "max Tucker rank " + std::to_string(worst);
      break;
    }
    case ModelClass::T4: {
      auto c = pairwise_components(t);
      const double scale = std::max(1.0, t.frobenius_norm());
      const double resid = (t - pairwise_tensor(c)).frobenius_norm();
      double centre = 0.0;
      for (const auto* m : {&c.a12, &c.a13, &c.a23})
        centre = std::max({centre, m->rowwise().sum().cwiseAbs().maxCoeff(), m->colwise().sum().cwiseAbs().maxCoeff()});
      const std::size_t rk = std::max({numerical_rank(c.a12, tol), numerical_rank(c.a13, tol), numerical_rank(c.a23, tol)});
      rep.member = resid <= tol * scale && centre <= tol * scale && rk <= spec.param;
      rep.detail = "pairwise residual " + std::to_string(resid) + ", max component rank " + std::to_string(rk);
      break;
    }
  }
  return rep;
}

namespace {

Eigen::MatrixXd checked_factor(const Design& design, std::size_t dm) {
  if (design.identity()) return {};
  const auto& f = design.covariance_factor;
  if (static_cast<std::size_t>(f.rows()) != dm || static_cast<std::size_t>(f.cols()) != dm)
    throw BadCovarianceFactor("factor must be " + std::to_string(dm) + " x " + std::to_string(dm));
  if (!f.allFinite()) throw BadCovarianceFactor("factor has non-finite entries");
  return f;
}

void check_split(const DenseTensor& truth, std::size_t split, double sigma) {
  if (split == 0 || split > truth.order()) throw ShapeMismatch("split M must satisfy 1 <= M <= order of the truth");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidValue("noise sigma must be finite and nonnegative");
}

}  // namespace

RegressionProblem gen_problem(const DenseTensor& truth, std::size_t n, std::size_t split, double noise_sigma,
                              const Design& design, std::uint64_t seed) {
  check_split(truth, split, noise_sigma);
  if (n == 0) throw InvalidValue("n must be at least 1");
  Shape xs(truth.shape().begin(), truth.shape().begin() + static_cast<std::ptrdiff_t>(split));
  Shape ys(truth.shape().begin() + static_cast<std::ptrdiff_t>(split), truth.shape().end());
  const std::size_t dm = numel(xs), dr = numel(ys);
  const Eigen::MatrixXd f = checked_factor(design, dm);
  Eigen::Map<const ParamMatrix> t(truth.data().data(), static_cast<Eigen::Index>(dm), static_cast<Eigen::Index>(dr));

  RegressionProblem p;
  p.split = split;
  p.noise_sigma = noise_sigma;
  p.truth = truth;
  p.metadata["generator"] = "gen_problem";
  p.metadata["seed"] = std::to_string(seed);
  p.metadata["design"] = design.identity() ? "iid" : "covariance_factor";
  p.covariates.reserve(n);
  p.responses.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x = rng.normal_vector(dm);
    if (!design.identity()) x = f * x;
    Eigen::VectorXd y = t.transpose() * x;
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] += noise_sigma * rng.normal();
    p.covariates.emplace_back(xs, x);
    p.responses.emplace_back(ys, y);
  }
  return p;
}

DesignMoments sample_design_moments(const DenseTensor& truth, std::size_t n, std::size_t split, double noise_sigma,
                                    const Design& design, std::uint64_t seed) {
  check_split(truth, split, noise_sigma);
  DesignMoments m;
  m.covariate_shape = Shape(truth.shape().begin(), truth.shape().begin() + static_cast<std::ptrdiff_t>(split));
  m.response_shape = Shape(truth.shape().begin() + static_cast<std::ptrdiff_t>(split), truth.shape().end());
  const std::size_t dm = numel(m.covariate_shape), dr = numel(m.response_shape);
  if (n < dm) throw InvalidValue("moment sampling needs n >= " + std::to_string(dm));
  const Eigen::MatrixXd f = checked_factor(design, dm);
  m.n = n;
  Rng rng(seed);
  const auto D = static_cast<Eigen::Index>(dm);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(D, D);
  for (Eigen::Index i = 0; i < D; ++i) {
    l(i, i) = std::sqrt(rng.chi_squared(static_cast<double>(n - static_cast<std::size_t>(i))));
    for (Eigen::Index j = 0; j < i; ++j) l(i, j) = rng.normal();
  }
  const Eigen::MatrixXd xi = rng.normal_matrix(dm, dr);
  const std::size_t rest = (n - dm) * dr;
  const double tail = rest > 0 ? rng.chi_squared(static_cast<double>(rest)) : 0.0;

  Eigen::MatrixXd fl = design.identity() ? l : Eigen::MatrixXd(f * l);
  Eigen::MatrixXd xtx = fl * fl.transpose();
  Eigen::MatrixXd xte = noise_sigma * (fl * xi);
  Eigen::Map<const ParamMatrix> t(truth.data().data(), D, static_cast<Eigen::Index>(dr));
  const double inv = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd xtx_t = xtx * t;
  m.gram = xtx * inv;
  m.cross = (xtx_t + xte) * inv;
  const double ete = noise_sigma * noise_sigma * (xi.squaredNorm() + tail);
  m.response_energy = ((t.array() * xtx_t.array()).sum() + 2.0 * (t.array() * xte.array()).sum() + ete) * inv;
  return m;
}

}  // namespace tensorreg
