#include "tensorreg/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tensorreg/rng.hpp"

namespace tensorreg {

std::string PackingShape::tag() const {
  switch (kind) {
    case PackingKind::Full: return "full";
    case PackingKind::Sparse: return "sparse(" + std::to_string(s) + ")";
    case PackingKind::LowRank:
      return "lowrank(" + std::to_string(d1) + "," + std::to_string(d2) + "," + std::to_string(r) + ")";
  }
  return "?";
}

double PackingSet::log_cardinality() const { return std::log(static_cast<double>(elements.size())); }

namespace {

// Candidates live on an integer lattice: sign patterns (full, lowrank) or
// ternary s-sparse patterns; distances are compared there exactly.
using Code = std::vector<signed char>;

int lattice_dist2(const Code& a, const Code& b) {
  int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

PackingSet hypercube_packing(std::size_t d, double delta, const PackingShape& shape, std::size_t budget,
                             std::uint64_t seed, std::size_t target) {
  if (shape.kind == PackingKind::LowRank) {
    if (d == 0) d = shape.d1 * shape.d2;
    if (d != shape.d1 * shape.d2) throw InvalidValue("lowrank packing needs d = d1 d2");
  }
  if (d < 6) throw InvalidValue("packing constructions need d >= 6");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidValue("delta must be positive");
  if (budget == 0) throw InvalidValue("budget must be positive");
  Rng rng(seed);
  PackingSet set;
  set.delta = delta;
  set.construction = shape.tag();
  set.seed = seed;
  set.dimension = d;

  std::size_t len = d;           // lattice length
  double scale = 0.0;            // lattice unit -> entry value
  int min_code_dist2 = 0;        // acceptance threshold on the lattice
  int max_code_dist2 = std::numeric_limits<int>::max();
  Eigen::MatrixXd u;
  switch (shape.kind) {
    case PackingKind::Full:
      scale = std::sqrt(3.0) * delta / (4.0 * std::sqrt(static_cast<double>(d)));
      // Hamming distance h gives lattice distance 4h; need 3h >= d.
      min_code_dist2 = 4 * static_cast<int>((d + 2) / 3);
      set.window_lo = delta * delta / 4.0;
      set.window_hi = delta * delta;
      break;
    case PackingKind::Sparse:
      if (shape.s == 0 || shape.s > d) throw InvalidValue("sparse packing needs 1 <= s <= d");
      scale = delta / (2.0 * std::sqrt(static_cast<double>(shape.s)));
      set.window_lo = delta * delta / 8.0;
      set.window_hi = delta * delta;
      min_code_dist2 = static_cast<int>(std::ceil(static_cast<double>(shape.s) / 2.0));
      max_code_dist2 = static_cast<int>(4 * shape.s);
      break;
    case PackingKind::LowRank: {
      if (shape.d1 * shape.d2 != d) throw InvalidValue("lowrank packing needs d = d1 * d2");
      if (shape.r == 0 || shape.r > std::min(shape.d1, shape.d2)) throw InvalidValue("lowrank packing needs 1 <= r <= min(d1, d2)");
      len = shape.r * shape.d2;
      scale = std::sqrt(3.0) * delta / (4.0 * std::sqrt(static_cast<double>(len)));
      min_code_dist2 = 4 * static_cast<int>((len + 2) / 3);
      set.window_lo = delta * delta / 4.0;
      set.window_hi = delta * delta;
      u = rng.orthonormal(shape.d1, shape.r);
      break;
    }
  }

  std::vector<Code> accepted;
  std::size_t drawn = 0;
  for (; drawn < budget; ++drawn) {
    if (target > 0 && accepted.size() >= target) break;
    Code c(len, 0);
    if (shape.kind == PackingKind::Sparse) {
      for (auto i : rng.choose(len, shape.s)) c[i] = rng.sign() > 0 ? 1 : -1;
    } else {
      for (auto& x : c) x = rng.sign() > 0 ? 1 : -1;
    }
    bool ok = true;
    for (const auto& a : accepted) {
      const int dd = lattice_dist2(a, c);
      if (dd < min_code_dist2 || dd > max_code_dist2) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(std::move(c));
  }
  set.candidates = drawn;

  for (const auto& c : accepted) {
    if (shape.kind == PackingKind::LowRank) {
      Eigen::MatrixXd h(static_cast<Eigen::Index>(shape.r), static_cast<Eigen::Index>(shape.d2));
      for (std::size_t i = 0; i < shape.r; ++i)
        for (std::size_t j = 0; j < shape.d2; ++j)
          h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scale * c[i * shape.d2 + j];
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = u * h;
      set.elements.emplace_back(Shape{shape.d1, shape.d2}, std::vector<double>(a.data(), a.data() + a.size()));
    } else {
      std::vector<double> v(len);
      for (std::size_t i = 0; i < len; ++i) v[i] = scale * c[i];
      set.elements.emplace_back(Shape{len}, std::move(v));
    }
  }
  set.min_dist2 = std::numeric_limits<double>::infinity();
  set.max_dist2 = 0.0;
  for (std::size_t i = 0; i < accepted.size(); ++i)
    for (std::size_t j = i + 1; j < accepted.size(); ++j) {
      const double d2 = scale * scale * lattice_dist2(accepted[i], accepted[j]);
      set.min_dist2 = std::min(set.min_dist2, d2);
      set.max_dist2 = std::max(set.max_dist2, d2);
    }
  if (accepted.size() < 2) set.min_dist2 = 0.0;

  const std::size_t need = std::max<std::size_t>(2, target);
  if (accepted.size() < need)
    throw BudgetExhausted("accepted " + std::to_string(accepted.size()) + " of " + std::to_string(need) +
                              " elements after " + std::to_string(drawn) + " candidates",
                          set);
  return set;
}

PackingVerification verify_packing(const PackingSet& set) {
  PackingVerification v;
  const std::size_t m = set.elements.size();
  v.min_dist2 = std::numeric_limits<double>::infinity();
  v.min_hamming = std::numeric_limits<std::size_t>::max();
  const double slack = 1e-12 * set.window_hi;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& a = set.elements[i].data();
      const auto& b = set.elements[j].data();
      if (a.size() != b.size()) {
        v.detail = "elements differ in size";
        v.offending_pair = {i, j};
        return v;
      }
      double d2 = 0.0;
      std::size_t ham = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        d2 += (a[k] - b[k]) * (a[k] - b[k]);
        ham += (a[k] > 0) != (b[k] > 0) ? 1 : 0;
      }
      v.min_dist2 = std::min(v.min_dist2, d2);
      v.max_dist2 = std::max(v.max_dist2, d2);
      v.min_hamming = std::min(v.min_hamming, ham);
      if (!v.offending_pair && (d2 < set.window_lo - slack || d2 > set.window_hi + slack)) v.offending_pair = {i, j};
    }
  if (m < 2) {
    v.detail = "fewer than two elements";
    return v;
  }
  if (set.construction == "full" && 3 * v.min_hamming < set.dimension) {
    v.detail = "Hamming distance below d/3";
    return v;
  }
  if (v.offending_pair) {
    v.detail = "pair outside the distance window";
    return v;
  }
  v.ok = true;
  v.detail = "all " + std::to_string(m * (m - 1) / 2) + " pairs inside the window";
  return v;
}

FanoReport fano_precondition_check(const PackingSet& pack, std::size_t n, double c_u, double delta) {
  FanoReport rep;
  if (pack.elements.empty()) throw InvalidValue("empty packing");
  if (!(c_u > 0.0)) throw InvalidValue("c_u must be positive");
  const double nd = static_cast<double>(n) * delta * delta;
  rep.log_m = pack.log_cardinality();
  rep.required_log_m = 128.0 * nd;
  rep.log_condition = rep.log_m >= rep.required_log_m;
  if (!rep.log_condition) rep.failures.push_back("log m < 128 n delta^2");
  rep.window_lo = nd / (c_u * c_u);
  rep.window_hi = 8.0 * nd / (c_u * c_u);
  rep.window_condition = true;
  const double slack = 1e-12 * rep.window_hi;
  for (std::size_t i = 0; i < pack.elements.size() && rep.window_condition; ++i)
    for (std::size_t j = i + 1; j < pack.elements.size(); ++j) {
      const double d2 = (pack.elements[i] - pack.elements[j]).squared_norm();
      if (d2 < rep.window_lo - slack || d2 > rep.window_hi + slack) {
        rep.window_condition = false;
        rep.offending_pair = {i, j};
        rep.offending_dist2 = d2;
        rep.failures.push_back("pair (" + std::to_string(i) + ", " + std::to_string(j) + ") has squared distance " +
                               std::to_string(d2) + " outside [" + std::to_string(rep.window_lo) + ", " +
                               std::to_string(rep.window_hi) + "]");
        break;
      }
    }
  rep.pass = rep.log_condition && rep.window_condition;
  return rep;
}

double fano_packing_delta(std::size_t n, double c_u, double delta) {
  return 2.0 * std::sqrt(static_cast<double>(n)) * delta / c_u;
}

}  // namespace tensorreg
