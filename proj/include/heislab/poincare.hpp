#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heislab/ball.hpp"

namespace heis {

/// Finite-dimensional l_p target. q = max(p, 2) is the power-type
/// convexity exponent of l_p; eta is carried as metadata only.
struct TargetSpace {
  double p_target = 2.0;
  double q = 2.0;
  double eta = 0.5;

  static TargetSpace ell_p(double p);
};

/// Norm ||u - v||_p of two d-vectors (p may be infinity).
double lp_distance(std::span<const double> u, std::span<const double> v, double p);
double lp_norm(std::span<const double> u, double p);

using Evaluator = std::function<void(const GroupElement&, std::span<double>)>;

/// Map from ball indices to R^d. Zero outside the table.
class LatticeFunction {
 public:
  LatticeFunction(const BallTable& domain, int dim, TargetSpace target = {});

  static LatticeFunction from(const BallTable& domain, int dim, TargetSpace target, const Evaluator& f);

  const BallTable& domain() const { return *domain_; }
  int dim() const { return dim_; }
  const TargetSpace& target() const { return target_; }

  std::span<double> at(std::size_t i) { return {values_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  std::span<const double> at(std::size_t i) const { return {values_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Value at ball index i, or the zero vector for kNoIndex.
  std::span<const double> value_or_zero(std::uint32_t i) const { return i == kNoIndex ? std::span<const double>(zero_) : at(i); }

  bool nonzero(std::size_t i) const;
  void scale(double s);

 private:
  const BallTable* domain_;
  int dim_;
  TargetSpace target_;
  std::vector<double> values_;
  std::vector<double> zero_;
};

struct PoincareReport {
  std::int64_t n = 0;
  double p = 2.0;
  double q = 2.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs; NaN for 0/0
  std::int64_t radius_multiplier = 21;
  // Global reports only: explicit k-range and the analytic remainder.
  std::int64_t k_explicit = 0;
  double tail = 0.0;
};

/// (sum_{k<=n^2} k^{-1-q/2} (sum_{x in B_n} ||f(xc^k) - f(x)||^p)^{q/p})^{1/q}.
/// Needs table radius >= 5n.
double local_lhs(const LatticeFunction& f, std::int64_t n, double p, double q);

/// (sum_{x in B_radius} ||f(xa) - f(x)||^p + ||f(xb) - f(x)||^p)^{1/p}.
/// Needs table radius >= radius + 1.
double horizontal_rhs(const LatticeFunction& f, std::int64_t radius, double p);

/// Local inequality: local_lhs against horizontal_rhs over B_{multiplier*n}.
PoincareReport local_inequality_report(const LatticeFunction& f, std::int64_t n, double p, double q, std::int64_t multiplier = 21);

/// Whole-group inequality for finitely supported f. The k-sum is explicit up
/// to max(k_max, z-extent of the support); past that every term equals
/// 2 sum ||f||^p and the remainder is added in closed form.
PoincareReport global_inequality_report(const LatticeFunction& f, double p, double q, std::int64_t k_max);

struct KleinerResult {
  double lhs = 0.0;
  double rhs_with_constant = 0.0;
  double constant = 0.0;  // (2n)^{p-1} * |B_2n| * 2n
  double horizontal_sum = 0.0;
};

/// sum_{x,y in B_n} d(f(x), f(y))^p over ordered pairs against the explicit
/// path-counting bound. Needs table radius >= 3n + 1.
KleinerResult kleiner_local_check(const LatticeFunction& f, std::int64_t n, double p);

struct Ell1Report {
  std::int64_t n = 0;
  std::int64_t multiplier = 21;
  double lhs = 0.0;
  double rhs = 0.0;
  double normalized_ratio = 0.0;  // lhs / (sqrt(log n) rhs); NaN when undefined
  bool defined = false;
};

/// l_1 form with exponent 1 and weights k^{-3/2}. Needs radius >= multiplier*n + 1.
Ell1Report ell1_conjecture_report(const LatticeFunction& f, std::int64_t n, std::int64_t multiplier = 21);

/// Same quantity for an f defined on the whole group; the right side streams
/// B_{multiplier*n} instead of requiring a stored table.
Ell1Report ell1_conjecture_report(const Evaluator& f, int dim, std::int64_t n, std::int64_t multiplier = 21,
                                  double memory_budget = kDefaultMemoryBudget);

/// sum_{k>K} k^{-s} for s > 1.
double zeta_tail(double s, std::int64_t K);

}  // namespace heis
