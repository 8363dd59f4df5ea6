#include "tensorreg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"

namespace tensorreg {

ThinSvd thin_svd(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  ThinSvd out;
  if (m.size() == 0) {
    out.u = Eigen::MatrixXd(m.rows(), 0);
    out.v = Eigen::MatrixXd(m.cols(), 0);
    return out;
  }
  if (!m.allFinite()) throw SvdFailure("non-finite input");
  if (std::min(m.rows(), m.cols()) <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SvdFailure("Jacobi SVD did not converge");
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SvdFailure("divide-and-conquer SVD did not converge");
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  }
  return out;
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  if (!m.allFinite()) throw SvdFailure("non-finite input");
  if (std::min(m.rows(), m.cols()) <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(m);
    if (svd.info() != Eigen::Success) throw SvdFailure("Jacobi SVD did not converge");
    return svd.singularValues();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  if (svd.info() != Eigen::Success) throw SvdFailure("divide-and-conquer SVD did not converge");
  return svd.singularValues();
}

Eigen::MatrixXd matrix_svt(const Eigen::Ref<const Eigen::MatrixXd>& z, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidValue("SVT threshold must be finite and nonnegative");
  if (t == 0.0) return z;
  auto svd = thin_svd(z);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  if (svd.s.size() == 0) return out;
  const double cut = kSvdRelativeFloor * svd.s[0];
  for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
    if (svd.s[i] < cut) break;
    const double shrunk = svd.s[i] - t;
    if (shrunk <= 0.0) break;
    out.noalias() += shrunk * svd.u.col(i) * svd.v.col(i).transpose();
  }
  return out;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Contractor {
  Eigen::Map<const RowMajor> m1;  // d1 x (d2 d3)
  Eigen::Index d2, d3;

  explicit Contractor(const DenseTensor& a)
      : m1(a.data().data(), static_cast<Eigen::Index>(a.shape()[0]),
           static_cast<Eigen::Index>(a.shape()[1] * a.shape()[2])),
        d2(static_cast<Eigen::Index>(a.shape()[1])),
        d3(static_cast<Eigen::Index>(a.shape()[2])) {}

  Eigen::VectorXd first(const Eigen::VectorXd& v, const Eigen::VectorXd& w) const {
    Eigen::VectorXd vw(d2 * d3);
    for (Eigen::Index j = 0; j < d2; ++j) vw.segment(j * d3, d3) = v[j] * w;
    return m1 * vw;
  }

  RowMajor partial(const Eigen::VectorXd& u) const {
    Eigen::RowVectorXd r = u.transpose() * m1;
    return Eigen::Map<const RowMajor>(r.data(), d2, d3);
  }
};

bool normalize(Eigen::VectorXd& x) {
  const double n = x.norm();
  if (!(n > 0.0)) return false;
  x /= n;
  return true;
}

Eigen::VectorXd top_left_singular(const Eigen::MatrixXd& m) {
  auto svd = thin_svd(m);
  return svd.u.col(0);
}

}  // namespace

HopmResult hopm_spectral(const DenseTensor& a, const HopmOptions& opts) {
  require_order(a, 3, "hopm_spectral");
  if (opts.restarts < 1) throw InvalidValue("hopm needs at least one restart");
  if (!(a.frobenius_norm() > 0.0)) throw ZeroTensor("spectral norm of the zero tensor has no maximiser");
  Contractor c(a);
  HopmResult best;
  best.value = -1.0;
  const Eigen::MatrixXd m2 = unfold(a, 1), m3 = unfold(a, 2);

  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd v, w, u;
    if (r == 0) {
      v = top_left_singular(m2);
      w = top_left_singular(m3);
    } else {
      Rng rng(derive_seed(opts.seed, {r}));
      v = rng.normal_vector(a.shape()[1]);
      w = rng.normal_vector(a.shape()[2]);
      normalize(v);
      normalize(w);
    }
    u = c.first(v, w);
    if (!normalize(u)) {
      u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a.shape()[0]));
      u[0] = 1.0;
    }
    std::vector<double> trace;
    double value = -1.0;
    for (std::size_t it = 0; it < opts.iters; ++it) {
      Eigen::VectorXd nu = c.first(v, w);
      if (normalize(nu)) u = nu;
      RowMajor b = c.partial(u);
      Eigen::VectorXd nv = b * w;
      if (normalize(nv)) v = nv;
      Eigen::VectorXd nw = b.transpose() * v;
      const double now = nw.norm();
      if (normalize(nw)) w = nw;
      trace.push_back(now);
      const bool done = now - value < opts.tol;
      value = std::max(value, now);
      if (done) break;
    }
    // Report exactly the objective of the returned factors.
    const double attained = u.dot(c.first(v, w));
    if (attained < 0.0) u = -u;
    if (std::abs(attained) > best.value) {
      best.value = std::abs(attained);
      best.u = u;
      best.v = v;
      best.w = w;
      best.trace = std::move(trace);
    }
  }
  return best;
}

HopmResult hopm_spectral(const DenseTensor& a, std::size_t restarts, std::size_t iters, std::uint64_t seed) {
  HopmOptions o;
  o.restarts = restarts;
  o.iters = iters;
  o.seed = seed;
  return hopm_spectral(a, o);
}

std::pair<std::string, double> width_lemma_rate(const RegularizerSpec& spec, const Shape& shape) {
  if (shape.size() != 3) throw ShapeMismatch("width rates are defined for third-order shapes");
  const double d1 = static_cast<double>(shape[0]), d2 = static_cast<double>(shape[1]),
               d3 = static_cast<double>(shape[2]);
  const double d[3] = {d1, d2, d3};
  switch (spec.kind) {
    case RegKind::EntryL1: return {"sqrt_log_d1d2d3", std::sqrt(std::log(d1 * d2 * d3))};
    case RegKind::FiberGroup: {
      const std::size_t k = spec.mode;
      const double rest = d[0] * d[1] * d[2] / d[k];
      return {"sqrt_max_dk_log_rest", std::sqrt(std::max(d[k], std::log(rest)))};
    }
    case RegKind::SliceFrob: {
      const double da = d[spec.axes[0]], db = d[spec.axes[1]], dc = d[spec.slice_axis()];
      return {"sqrt_max_dadb_log_dc", std::sqrt(std::max(da * db, std::log(dc)))};
    }
    case RegKind::SliceNuclear: {
      const double da = d[spec.axes[0]], db = d[spec.axes[1]], dc = d[spec.slice_axis()];
      return {"sqrt_max_da_db_log_dc", std::sqrt(std::max({da, db, std::log(dc)}))};
    }
    case RegKind::TensorSpectralDualOnly: return {"sqrt_d1_plus_d2_plus_d3", std::sqrt(d1 + d2 + d3)};
    case RegKind::MatricizedNuclearSum:
      return {"sqrt_max_pairwise_products", std::sqrt(std::max({d1 * d2, d2 * d3, d1 * d3}))};
  }
  return {"", 0.0};
}

DenseTensor width_draw(const Shape& shape, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, {index}));
  return DenseTensor(shape, rng.normals(numel(shape)));
}

WidthEstimate gaussian_width_mc(const RegularizerSpec& spec, const Shape& shape, std::size_t draws,
                                std::uint64_t seed, std::size_t threads, const DualOptions& opts) {
  if (draws < 100) throw InvalidValue("width estimates need at least 100 draws");
  if (shape.size() != 3) throw ShapeMismatch("width estimates are defined for third-order shapes");
  spec.validate();
  std::vector<double> values(draws);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      DenseTensor g = width_draw(shape, seed, i);
      DualOptions o = opts;
      o.hopm.seed = derive_seed(seed, {i, 1});
      values[i] = reg_dual(spec, g, o);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, draws));
  if (threads == 1) {
    work(0, draws);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(work, draws * t / threads, draws * (t + 1) / threads);
    for (auto& th : pool) th.join();
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(draws);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  WidthEstimate est;
  est.mean = mean;
  est.std_error = std::sqrt(ss / static_cast<double>(draws - 1)) / std::sqrt(static_cast<double>(draws));
  est.draws = draws;
  est.seed = seed;
  est.shape = shape;
  est.kind = spec;
  auto [tag, rate] = width_lemma_rate(spec, shape);
  est.lemma_bound_form = tag;
  est.lemma_rate = rate;
  return est;
}

}  // namespace tensorreg
