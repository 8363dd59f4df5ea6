#include "tensorreg/regularizer.hpp"

#include <algorithm>
#include <cmath>

#include "tensorreg/errors.hpp"
#include "tensorreg/spectral.hpp"

namespace tensorreg {

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::EntryL1: return "EntryL1";
    case RegKind::FiberGroup: return "FiberGroup";
    case RegKind::SliceFrob: return "SliceFrob";
    case RegKind::SliceNuclear: return "SliceNuclear";
    case RegKind::MatricizedNuclearSum: return "MatricizedNuclearSum";
    case RegKind::TensorSpectralDualOnly: return "TensorSpectralDualOnly";
  }
  return "?";
}

RegKind reg_kind_from_string(const std::string& name) {
  for (auto k : {RegKind::EntryL1, RegKind::FiberGroup, RegKind::SliceFrob, RegKind::SliceNuclear,
                 RegKind::MatricizedNuclearSum, RegKind::TensorSpectralDualOnly})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown regularizer kind '" + name + "'");
}

RegularizerSpec RegularizerSpec::entry_l1() { return {}; }

RegularizerSpec RegularizerSpec::fiber_group(std::size_t mode) {
  RegularizerSpec s;
  s.kind = RegKind::FiberGroup;
  s.mode = mode;
  s.validate();
  return s;
}

RegularizerSpec RegularizerSpec::slice_frob(std::size_t a, std::size_t b) {
  RegularizerSpec s;
  s.kind = RegKind::SliceFrob;
  s.axes = {std::min(a, b), std::max(a, b)};
  s.validate();
  return s;
}

RegularizerSpec RegularizerSpec::slice_nuclear(std::size_t a, std::size_t b) {
  RegularizerSpec s = slice_frob(a, b);
  s.kind = RegKind::SliceNuclear;
  return s;
}

RegularizerSpec RegularizerSpec::matricized_nuclear() {
  RegularizerSpec s;
  s.kind = RegKind::MatricizedNuclearSum;
  return s;
}

RegularizerSpec RegularizerSpec::tensor_spectral() {
  RegularizerSpec s;
  s.kind = RegKind::TensorSpectralDualOnly;
  return s;
}

double RegularizerSpec::c_R() const { return kind == RegKind::TensorSpectralDualOnly ? 0.5 : 1.0; }

bool RegularizerSpec::has_prox() const {
  return kind == RegKind::EntryL1 || kind == RegKind::FiberGroup || kind == RegKind::SliceFrob ||
         kind == RegKind::SliceNuclear;
}

void RegularizerSpec::validate() const {
  if (kind == RegKind::FiberGroup && mode > 2) throw InvalidAxes("fiber mode must be 0, 1 or 2");
  if (kind == RegKind::SliceFrob || kind == RegKind::SliceNuclear) {
    if (axes[0] > 2 || axes[1] > 2 || axes[0] >= axes[1])
      throw InvalidAxes("slice axes must be two distinct axes in increasing order");
  }
}

std::string RegularizerSpec::describe() const {
  switch (kind) {
    case RegKind::FiberGroup: return "FiberGroup(mode=" + std::to_string(mode) + ")";
    case RegKind::SliceFrob:
    case RegKind::SliceNuclear:
      return to_string(kind) + "(axes=" + std::to_string(axes[0]) + "," + std::to_string(axes[1]) + ")";
    default: return to_string(kind);
  }
}

GroupLayout group_layout(const RegularizerSpec& spec, const Shape& shape) {
  spec.validate();
  GroupLayout g;
  const std::size_t total = numel(shape);
  g.index.reserve(total);
  g.start.reserve(total + 1);
  g.start.push_back(0);
  if (spec.kind == RegKind::EntryL1) {
    for (std::size_t i = 0; i < total; ++i) {
      g.index.push_back(i);
      g.start.push_back(i + 1);
    }
    return g;
  }
  if (shape.size() != 3) throw ShapeMismatch(spec.describe() + " needs a third-order tensor");
  const auto st = strides_of(shape);
  if (spec.kind == RegKind::FiberGroup) {
    const std::size_t k = spec.mode;
    const std::size_t p = k == 0 ? 1 : 0;
    const std::size_t q = k == 2 ? 1 : 2;
    g.rows = shape[k];
    for (std::size_t i = 0; i < shape[p]; ++i)
      for (std::size_t j = 0; j < shape[q]; ++j) {
        for (std::size_t t = 0; t < shape[k]; ++t) g.index.push_back(i * st[p] + j * st[q] + t * st[k]);
        g.start.push_back(g.index.size());
      }
    return g;
  }
  if (spec.kind == RegKind::SliceFrob || spec.kind == RegKind::SliceNuclear) {
    const std::size_t a = spec.axes[0], b = spec.axes[1], c = spec.slice_axis();
    g.rows = shape[a];
    g.cols = shape[b];
    for (std::size_t s = 0; s < shape[c]; ++s) {
      for (std::size_t i = 0; i < shape[a]; ++i)
        for (std::size_t j = 0; j < shape[b]; ++j) g.index.push_back(s * st[c] + i * st[a] + j * st[b]);
      g.start.push_back(g.index.size());
    }
    return g;
  }
  throw UnsupportedKind(to_string(spec.kind) + " has no group structure");
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::VectorXd gather(const DenseTensor& a, const GroupLayout& g, std::size_t k) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.start[k + 1] - g.start[k]));
  for (std::size_t t = g.start[k]; t < g.start[k + 1]; ++t) v[static_cast<Eigen::Index>(t - g.start[k])] = a[g.index[t]];
  return v;
}

void scatter(std::vector<double>& out, const GroupLayout& g, std::size_t k, const Eigen::VectorXd& v) {
  for (std::size_t t = g.start[k]; t < g.start[k + 1]; ++t) out[g.index[t]] = v[static_cast<Eigen::Index>(t - g.start[k])];
}

Eigen::MatrixXd as_slice(const Eigen::VectorXd& v, const GroupLayout& g) {
  return Eigen::Map<const RowMajor>(v.data(), static_cast<Eigen::Index>(g.rows), static_cast<Eigen::Index>(g.cols));
}

Eigen::VectorXd from_slice(const Eigen::MatrixXd& m) {
  RowMajor r = m;
  return Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
}

void require_third_order(const RegularizerSpec& spec, const DenseTensor& a) {
  if (spec.kind != RegKind::EntryL1 && a.order() != 3)
    throw ShapeMismatch(spec.describe() + " needs a third-order tensor, got " + shape_string(a.shape()));
}

double floor_sum(const Eigen::VectorXd& s) {
  if (s.size() == 0 || s[0] <= 0.0) return 0.0;
  const double cut = kSvdRelativeFloor * s[0];
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] >= cut) sum += s[i];
  return sum;
}

Eigen::MatrixXd polar_factor(const Eigen::MatrixXd& m) {
  auto svd = thin_svd(m);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  if (svd.s.size() == 0 || svd.s[0] <= 0.0) return out;
  const double cut = kSvdRelativeFloor * svd.s[0];
  for (Eigen::Index i = 0; i < svd.s.size(); ++i)
    if (svd.s[i] >= cut) out += svd.u.col(i) * svd.v.col(i).transpose();
  return out;
}

}  // namespace

double nuclear_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) { return floor_sum(singular_values(m)); }

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.size() == 0) return 0.0;
  auto s = singular_values(m);
  return s.size() ? s[0] : 0.0;
}

double reg_eval(const RegularizerSpec& spec, const DenseTensor& a) {
  require_third_order(spec, a);
  switch (spec.kind) {
    case RegKind::EntryL1: return a.vec().lpNorm<1>();
    case RegKind::FiberGroup:
    case RegKind::SliceFrob: {
      auto g = group_layout(spec, a.shape());
      double sum = 0.0;
      for (std::size_t k = 0; k < g.count(); ++k) sum += gather(a, g, k).norm();
      return sum;
    }
    case RegKind::SliceNuclear: {
      auto g = group_layout(spec, a.shape());
      double sum = 0.0;
      for (std::size_t k = 0; k < g.count(); ++k) sum += nuclear_norm(as_slice(gather(a, g, k), g));
      return sum;
    }
    case RegKind::MatricizedNuclearSum: {
      double sum = 0.0;
      for (std::size_t k = 0; k < 3; ++k) sum += nuclear_norm(unfold(a, k));
      return sum / 3.0;
    }
    case RegKind::TensorSpectralDualOnly:
      throw UnsupportedKind("the tensor nuclear norm is not evaluated; only its dual is available");
  }
  return 0.0;
}

namespace {

struct DualScan {
  double value = 0.0;
  std::size_t argmax = 0;
};

DualScan scan_dual(const RegularizerSpec& spec, const DenseTensor& a, const DualOptions& opts) {
  require_third_order(spec, a);
  DualScan best;
  auto consider = [&](double v, std::size_t k) {
    if (v > best.value) {
      best.value = v;
      best.argmax = k;
    }
  };
  switch (spec.kind) {
    case RegKind::EntryL1:
      for (std::size_t i = 0; i < a.size(); ++i) consider(std::abs(a[i]), i);
      break;
    case RegKind::FiberGroup:
    case RegKind::SliceFrob: {
      auto g = group_layout(spec, a.shape());
      for (std::size_t k = 0; k < g.count(); ++k) consider(gather(a, g, k).norm(), k);
      break;
    }
    case RegKind::SliceNuclear: {
      auto g = group_layout(spec, a.shape());
      for (std::size_t k = 0; k < g.count(); ++k) consider(spectral_norm(as_slice(gather(a, g, k), g)), k);
      break;
    }
    case RegKind::MatricizedNuclearSum:
      for (std::size_t k = 0; k < 3; ++k) consider(spectral_norm(unfold(a, k)), k);
      break;
    case RegKind::TensorSpectralDualOnly:
      if (a.frobenius_norm() > 0.0) best.value = hopm_spectral(a, opts.hopm).value;
      break;
  }
  return best;
}

}  // namespace

double reg_dual(const RegularizerSpec& spec, const DenseTensor& a, const DualOptions& opts) {
  return scan_dual(spec, a, opts).value;
}

std::size_t reg_dual_argmax(const RegularizerSpec& spec, const DenseTensor& a) {
  return scan_dual(spec, a, {}).argmax;
}

DenseTensor prox(const RegularizerSpec& spec, const DenseTensor& z, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidValue("prox threshold must be finite and nonnegative");
  if (!spec.has_prox())
    throw NoClosedFormProx(to_string(spec.kind) + " has no closed-form proximal map");
  require_third_order(spec, z);
  std::vector<double> out(z.size(), 0.0);
  switch (spec.kind) {
    case RegKind::EntryL1:
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double m = std::abs(z[i]) - t;
        out[i] = m > 0.0 ? std::copysign(m, z[i]) : 0.0;
      }
      break;
    case RegKind::FiberGroup:
    case RegKind::SliceFrob: {
      auto g = group_layout(spec, z.shape());
      for (std::size_t k = 0; k < g.count(); ++k) {
        Eigen::VectorXd v = gather(z, g, k);
        const double nrm = v.norm();
        if (nrm <= t) continue;
        scatter(out, g, k, v * (1.0 - t / nrm));
      }
      break;
    }
    case RegKind::SliceNuclear: {
      auto g = group_layout(spec, z.shape());
      for (std::size_t k = 0; k < g.count(); ++k)
        scatter(out, g, k, from_slice(matrix_svt(as_slice(gather(z, g, k), g), t)));
      break;
    }
    default: break;
  }
  return DenseTensor(z.shape(), std::move(out));
}

DenseTensor reg_subgradient(const RegularizerSpec& spec, const DenseTensor& a) {
  require_third_order(spec, a);
  std::vector<double> out(a.size(), 0.0);
  switch (spec.kind) {
    case RegKind::EntryL1:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0 ? 1.0 : (a[i] < 0 ? -1.0 : 0.0);
      break;
    case RegKind::FiberGroup:
    case RegKind::SliceFrob: {
      auto g = group_layout(spec, a.shape());
      for (std::size_t k = 0; k < g.count(); ++k) {
        Eigen::VectorXd v = gather(a, g, k);
        const double nrm = v.norm();
        if (nrm > 0.0) scatter(out, g, k, v / nrm);
      }
      break;
    }
    case RegKind::SliceNuclear: {
      auto g = group_layout(spec, a.shape());
      for (std::size_t k = 0; k < g.count(); ++k)
        scatter(out, g, k, from_slice(polar_factor(as_slice(gather(a, g, k), g))));
      break;
    }
    case RegKind::MatricizedNuclearSum: {
      DenseTensor acc(a.shape());
      for (std::size_t k = 0; k < 3; ++k)
        acc = acc + (1.0 / 3.0) * dematricize(polar_factor(unfold(a, k)), a.shape(), {k});
      return acc;
    }
    case RegKind::TensorSpectralDualOnly:
      throw UnsupportedKind("no primal for the tensor nuclear norm");
  }
  return DenseTensor(a.shape(), std::move(out));
}

}  // namespace tensorreg
