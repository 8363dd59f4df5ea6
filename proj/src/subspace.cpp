#include "tensorreg/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tensorreg/errors.hpp"
#include "tensorreg/rng.hpp"

namespace tensorreg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<char> support_mask(const SubspaceSpec& sub, const Shape& shape) {
  if (shape.size() != 3) throw ShapeMismatch("subspaces are defined for third-order tensors");
  const auto st = strides_of(shape);
  std::vector<char> mask(numel(shape), 0);
  std::visit(overloaded{
                 [&](const SupportEntries& s) {
                   for (const auto& c : s.cells) {
                     for (std::size_t k = 0; k < 3; ++k)
                       if (c[k] >= shape[k]) throw ShapeMismatch("support cell out of range");
                     mask[c[0] * st[0] + c[1] * st[1] + c[2] * st[2]] = 1;
                   }
                 },
                 [&](const SupportFibers& s) {
                   if (s.mode > 2) throw InvalidAxes("fiber mode out of range");
                   const std::size_t p = s.mode == 0 ? 1 : 0, q = s.mode == 2 ? 1 : 2;
                   for (const auto& pr : s.pairs) {
                     if (pr[0] >= shape[p] || pr[1] >= shape[q]) throw ShapeMismatch("support fiber out of range");
                     for (std::size_t t = 0; t < shape[s.mode]; ++t)
                       mask[pr[0] * st[p] + pr[1] * st[q] + t * st[s.mode]] = 1;
                   }
                 },
                 [&](const SupportSlices& s) {
                   if (s.axis > 2) throw InvalidAxes("slice axis out of range");
                   const std::size_t p = s.axis == 0 ? 1 : 0, q = s.axis == 2 ? 1 : 2;
                   for (auto j : s.indices) {
                     if (j >= shape[s.axis]) throw ShapeMismatch("support slice out of range");
                     for (std::size_t a = 0; a < shape[p]; ++a)
                       for (std::size_t b = 0; b < shape[q]; ++b) mask[j * st[s.axis] + a * st[p] + b * st[q]] = 1;
                   }
                 },
                 [&](const auto&) { throw UnsupportedKind("not a support subspace"); },
             },
             sub);
  return mask;
}

void check_orthonormal(const Eigen::MatrixXd& u, std::size_t rows) {
  if (static_cast<std::size_t>(u.rows()) != rows) throw ShapeMismatch("slice projector factor has wrong row count");
  if (u.cols() == 0) return;
  if ((u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidValue("slice projector factor is not orthonormal");
}

DenseTensor project_slicewise(const SlicewiseProjectors& s, const DenseTensor& a) {
  require_order(a, 3, "subspace_project");
  if (s.axis > 2) throw InvalidAxes("slice axis out of range");
  const auto& shape = a.shape();
  const std::size_t c = s.axis, p = c == 0 ? 1 : 0, q = c == 2 ? 1 : 2;
  if (s.row_factors.size() != shape[c] || s.col_factors.size() != shape[c])
    throw ShapeMismatch("need one projector pair per slice");
  const auto st = strides_of(shape);
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t j = 0; j < shape[c]; ++j) {
    check_orthonormal(s.row_factors[j], shape[p]);
    check_orthonormal(s.col_factors[j], shape[q]);
    Eigen::MatrixXd x = slice_matrix(a, c, j);
    const auto& u = s.row_factors[j];
    const auto& v = s.col_factors[j];
    Eigen::MatrixXd y;
    if (s.role == SubspaceRole::BSpace) {
      y = u * (u.transpose() * x * v) * v.transpose();
    } else {
      Eigen::MatrixXd xp = x - u * (u.transpose() * x);      // P1' X
      Eigen::MatrixXd xpp = xp - (xp * v) * v.transpose();    // P1' X P2'
      y = x - xpp;
    }
    for (std::size_t i = 0; i < shape[p]; ++i)
      for (std::size_t k = 0; k < shape[q]; ++k)
        out[j * st[c] + i * st[p] + k * st[q]] = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  }
  return DenseTensor(shape, std::move(out));
}

DenseTensor project_space(const SubspaceSpec& sub, const DenseTensor& a) {
  return std::visit(overloaded{
                        [&](const SlicewiseProjectors& s) { return project_slicewise(s, a); },
                        [&](const TuckerProjectors& t) {
                          return tucker_project(a, t.projectors, t.role == SubspaceRole::ASpace ? TuckerPattern::Q
                                                                                               : TuckerPattern::Full);
                        },
                        [&](const auto&) {
                          require_order(a, 3, "subspace_project");
                          auto mask = support_mask(sub, a.shape());
                          std::vector<double> out(a.size(), 0.0);
                          for (std::size_t i = 0; i < a.size(); ++i)
                            if (mask[i]) out[i] = a[i];
                          return DenseTensor(a.shape(), std::move(out));
                        },
                    },
                    sub);
}

std::size_t support_size(const SubspaceSpec& sub) {
  return std::visit(overloaded{
                        [](const SupportEntries& s) {
                          return std::set<std::array<std::size_t, 3>>(s.cells.begin(), s.cells.end()).size();
                        },
                        [](const SupportFibers& s) {
                          return std::set<std::array<std::size_t, 2>>(s.pairs.begin(), s.pairs.end()).size();
                        },
                        [](const SupportSlices& s) {
                          return std::set<std::size_t>(s.indices.begin(), s.indices.end()).size();
                        },
                        [](const auto&) -> std::size_t { return 0; },
                    },
                    sub);
}

}  // namespace

DenseTensor subspace_project(const SubspaceSpec& sub, const DenseTensor& a, ProjectSide which) {
  DenseTensor p = project_space(sub, a);
  return which == ProjectSide::Space ? p : a - p;
}

bool subspace_contains(const SubspaceSpec& sub, const DenseTensor& a, double tol) {
  DenseTensor r = subspace_project(sub, a, ProjectSide::Complement);
  return r.frobenius_norm() <= tol * std::max(1.0, a.frobenius_norm());
}

std::string subspace_name(const SubspaceSpec& sub) {
  return std::visit(overloaded{
                        [](const SupportEntries&) { return std::string("SupportEntries"); },
                        [](const SupportFibers&) { return std::string("SupportFibers"); },
                        [](const SupportSlices&) { return std::string("SupportSlices"); },
                        [](const SlicewiseProjectors&) { return std::string("SlicewiseProjectors"); },
                        [](const TuckerProjectors&) { return std::string("TuckerProjectors"); },
                    },
                    sub);
}

SubspaceSpec with_role(const SubspaceSpec& sub, SubspaceRole role) {
  SubspaceSpec out = sub;
  if (auto* s = std::get_if<SlicewiseProjectors>(&out)) s->role = role;
  if (auto* t = std::get_if<TuckerProjectors>(&out)) t->role = role;
  return out;
}

bool is_matched_pair(const RegularizerSpec& spec, const SubspaceSpec& sub) {
  switch (spec.kind) {
    case RegKind::EntryL1: return std::holds_alternative<SupportEntries>(sub);
    case RegKind::FiberGroup: {
      auto* f = std::get_if<SupportFibers>(&sub);
      return f && f->mode == spec.mode;
    }
    case RegKind::SliceFrob: {
      auto* s = std::get_if<SupportSlices>(&sub);
      return s && s->axis == spec.slice_axis();
    }
    case RegKind::SliceNuclear: {
      auto* s = std::get_if<SlicewiseProjectors>(&sub);
      return s && s->axis == spec.slice_axis();
    }
    case RegKind::MatricizedNuclearSum:
    case RegKind::TensorSpectralDualOnly: return std::holds_alternative<TuckerProjectors>(sub);
  }
  return false;
}

namespace {

void require_matched(const RegularizerSpec& spec, const SubspaceSpec& sub) {
  if (!is_matched_pair(spec, sub))
    throw UnmatchedPair(spec.describe() + " with " + subspace_name(sub) + " is not covered by any bound");
}

}  // namespace

double decomposability_margin(const RegularizerSpec& spec, const SubspaceSpec& sub_a, const SubspaceSpec& sub_b,
                              const DenseTensor& a, const DenseTensor& b) {
  require_matched(spec, sub_a);
  require_matched(spec, sub_b);
  DenseTensor ap = subspace_project(sub_a, a, ProjectSide::Complement);
  DenseTensor bp = subspace_project(sub_b, b, ProjectSide::Space);
  return reg_eval(spec, ap + bp) - reg_eval(spec, ap) - spec.c_R() * reg_eval(spec, bp);
}

double complement_weighted_margin(const RegularizerSpec& spec, const SubspaceSpec& sub_a,
                                  const SubspaceSpec& sub_b, const DenseTensor& a, const DenseTensor& b, double c) {
  require_matched(spec, sub_a);
  require_matched(spec, sub_b);
  DenseTensor ap = subspace_project(sub_a, a, ProjectSide::Complement);
  DenseTensor bp = subspace_project(sub_b, b, ProjectSide::Space);
  return reg_eval(spec, ap + bp) - reg_eval(spec, bp) - c * reg_eval(spec, ap);
}

namespace {

double analytic_compatibility(const RegularizerSpec& spec, const SubspaceSpec& sub) {
  if (auto* s = std::get_if<SlicewiseProjectors>(&sub)) {
    double total = 0.0;
    for (std::size_t j = 0; j < s->row_factors.size(); ++j)
      total += static_cast<double>(s->row_factors[j].cols() + s->col_factors[j].cols());
    return total;
  }
  if (auto* t = std::get_if<TuckerProjectors>(&sub)) {
    const double r = static_cast<double>(
        std::max({t->projectors.rank(0), t->projectors.rank(1), t->projectors.rank(2)}));
    return spec.kind == RegKind::TensorSpectralDualOnly ? r * r : r;
  }
  return static_cast<double>(support_size(sub));
}

double ratio(const RegularizerSpec& spec, const DenseTensor& x) {
  const double f2 = x.squared_norm();
  if (!(f2 > 0.0)) return 0.0;
  const double r = reg_eval(spec, x);
  return r * r / f2;
}

DenseTensor unit(const DenseTensor& x) { return (1.0 / x.frobenius_norm()) * x; }

}  // namespace

Compatibility compatibility(const RegularizerSpec& spec, const SubspaceSpec& sub, const Shape& shape,
                            const CompatibilityOptions& opts) {
  require_matched(spec, sub);
  if (shape.size() != 3) throw ShapeMismatch("compatibility needs a third-order shape");
  Compatibility out;
  out.analytic_bound = analytic_compatibility(spec, sub);
  if (!spec.has_primal() || !opts.monte_carlo) return out;

  struct Candidate {
    double value;
    DenseTensor x;
  };
  std::vector<Candidate> top;
  const std::size_t keep = std::max<std::size_t>(1, opts.ascent_starts);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    Rng rng(derive_seed(opts.seed, {i}));
    DenseTensor g(shape, rng.normals(numel(shape)));
    DenseTensor x = subspace_project(sub, g, ProjectSide::Space);
    if (!(x.frobenius_norm() > 0.0)) continue;
    x = unit(x);
    const double v = ratio(spec, x);
    if (top.size() < keep || v > top.back().value) {
      top.push_back({v, x});
      std::sort(top.begin(), top.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
      if (top.size() > keep) top.pop_back();
    }
  }
  double best = 0.0;
  for (auto& c : top) {
    DenseTensor x = c.x;
    double v = c.value;
    double step = 0.5;
    for (std::size_t t = 0; t < opts.ascent_steps && step > 1e-12; ++t) {
      DenseTensor g = subspace_project(sub, reg_subgradient(spec, x), ProjectSide::Space);
      DenseTensor d = g - dot(g, x) * x;
      const double dn = d.frobenius_norm();
      if (!(dn > 1e-15)) break;
      DenseTensor y = subspace_project(sub, x + (step / dn) * d, ProjectSide::Space);
      if (!(y.frobenius_norm() > 0.0)) {
        step *= 0.5;
        continue;
      }
      y = unit(y);
      const double vy = ratio(spec, y);
      if (vy > v) {
        x = y;
        v = vy;
        step = std::min(1.0, step * 1.5);
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, v);
  }
  out.mc_estimate = best;
  return out;
}

}  // namespace tensorreg
