#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensorreg/errors.hpp"
#include "tensorreg/tensor.hpp"

namespace tensorreg {

enum class PackingKind { Full, Sparse, LowRank };

struct PackingShape {
  PackingKind kind = PackingKind::Full;
  std::size_t s = 0;                    // Sparse: nonzeros per element
  std::size_t d1 = 0, d2 = 0, r = 0;    // LowRank: d1 x d2 elements of rank <= r

  static PackingShape full() { return {}; }
  static PackingShape sparse(std::size_t s) { return {PackingKind::Sparse, s, 0, 0, 0}; }
  static PackingShape lowrank(std::size_t d1, std::size_t d2, std::size_t r) {
    return {PackingKind::LowRank, 0, d1, d2, r};
  }
  std::string tag() const;
};

// Scaled hypercube points with pairwise squared distances in [lo, hi]:
//   full:    entries +-sqrt(3) delta / (4 sqrt(d)), Hamming distance >= d/3,
//            window [delta^2/4, delta^2]
//   sparse:  s entries +-delta / (2 sqrt(s)), window [delta^2/8, delta^2]
//   lowrank: U H with one orthonormal d1 x r factor U and H a scaled
//            hypercube in r x d2, Hamming distance >= r d2 / 3,
//            window [delta^2/4, delta^2]
struct PackingSet {
  std::vector<DenseTensor> elements;
  double delta = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double min_dist2 = 0.0, max_dist2 = 0.0;
  std::string construction;
  std::size_t dimension = 0;
  std::size_t candidates = 0;
  std::uint64_t seed = 0;

  double log_cardinality() const;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, PackingSet partial)
      : Error("BudgetExhausted: " + what), partial_(std::move(partial)) {}
  const PackingSet& partial() const { return partial_; }

 private:
  PackingSet partial_;
};

// Greedy random search over at most `budget` candidates. Stops early once
// `target` elements are accepted (0 means use the whole budget). Throws
// BudgetExhausted when fewer than max(2, target) elements were accepted.
// For the lowrank shape d may be 0 (meaning d1 d2).
PackingSet hypercube_packing(std::size_t d, double delta, const PackingShape& shape, std::size_t budget,
                             std::uint64_t seed, std::size_t target = 0);

struct PackingVerification {
  bool ok = false;
  double min_dist2 = 0.0, max_dist2 = 0.0;
  std::size_t min_hamming = 0;  // sign-pattern distance, full kind only
  std::optional<std::pair<std::size_t, std::size_t>> offending_pair;
  std::string detail;
};

// Recomputes every pairwise distance from the stored elements.
PackingVerification verify_packing(const PackingSet& set);

struct FanoReport {
  bool log_condition = false;
  bool window_condition = false;
  bool pass = false;
  double log_m = 0.0;
  double required_log_m = 0.0;  // 128 n delta^2
  double window_lo = 0.0, window_hi = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> offending_pair;
  double offending_dist2 = 0.0;
  std::vector<std::string> failures;
};

// Checks log m >= 128 n delta^2 and
// n delta^2 / c_u^2 <= |A_i - A_j|_F^2 <= 8 n delta^2 / c_u^2 for all pairs.
FanoReport fano_precondition_check(const PackingSet& pack, std::size_t n, double c_u, double delta);

// Packing scale whose window [d^2/4, d^2] lands inside the Fano window for
// (n, c_u, delta): 2 sqrt(n) delta / c_u.
double fano_packing_delta(std::size_t n, double c_u, double delta);

}  // namespace tensorreg
