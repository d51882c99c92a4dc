#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "heislab/error.hpp"
#include "heislab/poincare.hpp"
#include "heislab/spectral.hpp"

using namespace heis;

namespace {

using Key = std::array<std::int64_t, 3>;
Key key(const GroupElement& g) { return {g.x, g.y, g.z}; }

// Independent view of a lattice function: coordinate map, zero default.
struct Naive {
  std::map<Key, std::vector<double>> v;
  int d;
  double pt;
  explicit Naive(const LatticeFunction& f) : d(f.dim()), pt(f.target().p_target) {
    for (std::size_t i = 0; i < f.domain().size(); ++i) v[key(f.domain().element(i))] = {f.at(i).begin(), f.at(i).end()};
  }
  std::vector<double> at(const GroupElement& g) const {
    auto it = v.find(key(g));
    return it == v.end() ? std::vector<double>(d, 0.0) : it->second;
  }
  double dist(const GroupElement& g, const GroupElement& h) const {
    auto a = at(g), b = at(h);
    double s = 0;
    for (int i = 0; i < d; ++i) s += std::pow(std::abs(a[i] - b[i]), pt);
    return std::pow(s, 1.0 / pt);
  }
};

std::vector<GroupElement> naive_ball(const BallTable& t, std::int64_t n) {
  std::vector<GroupElement> out;
  for (const auto& g : t.elements())
    if (word_distance(t, g) <= n) out.push_back(g);
  return out;
}

double naive_local_lhs(const Naive& F, const BallTable& t, std::int64_t n, double p, double q) {
  double total = 0;
  for (std::int64_t k = 1; k <= n * n; ++k) {
    double inner = 0;
    for (const auto& x : naive_ball(t, n)) inner += std::pow(F.dist(multiply(x, power(kC, k)), x), p);
    total += std::pow(inner, q / p) / std::pow(static_cast<double>(k), 1 + q / 2);
  }
  return std::pow(total, 1 / q);
}

double naive_rhs(const Naive& F, const BallTable& t, std::int64_t r, double p) {
  double s = 0;
  for (const auto& x : naive_ball(t, r)) s += std::pow(F.dist(multiply(x, kA), x), p) + std::pow(F.dist(multiply(x, kB), x), p);
  return std::pow(s, 1 / p);
}

LatticeFunction random_function(const BallTable& t, int d, TargetSpace ts, std::int64_t support_radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  LatticeFunction f(t, d, ts);
  for (std::size_t i = 0; i < t.count(support_radius); ++i)
    for (double& v : f.at(i)) v = nd(rng);
  return f;
}

}  // namespace

TEST_CASE("target space convexity exponent") {
  CHECK(TargetSpace::ell_p(1.5).q == 2.0);
  CHECK(TargetSpace::ell_p(3.0).q == 3.0);
  CHECK_THROWS_AS(TargetSpace::ell_p(0.5), InvalidArgument);
}

TEST_CASE("local sides on coordinate functions") {
  const BallTable t = build_ball(10);
  auto fz = LatticeFunction::from(t, 1, TargetSpace::ell_p(2), [](const GroupElement& g, std::span<double> o) { o[0] = double(g.z); });
  CHECK(local_lhs(fz, 2, 2, 2) == doctest::Approx(std::sqrt(4.0 * 17.0)).epsilon(1e-14));
  auto fx = LatticeFunction::from(t, 1, TargetSpace::ell_p(1), [](const GroupElement& g, std::span<double> o) { o[0] = double(g.x); });
  CHECK(horizontal_rhs(fx, 1, 1.0) == doctest::Approx(5.0).epsilon(1e-15));
  LatticeFunction c(t, 2);
  for (double& v : c.values()) v = 3.5;
  CHECK(local_lhs(c, 2, 2, 2) == 0.0);
  CHECK(horizontal_rhs(c, 3, 2) == 0.0);
  CHECK_THROWS_AS(local_lhs(fz, 3, 2, 2), DomainCoverageError);
  try {
    local_lhs(fz, 3, 2, 2);
  } catch (const DomainCoverageError& e) {
    CHECK(e.required_radius() == 15);
  }
  CHECK_THROWS_AS(horizontal_rhs(fz, 10, 2), DomainCoverageError);
}

TEST_CASE("local sides match naive oracle") {
  const BallTable t = build_ball(16);
  for (double pt : {1.0, 2.0, 3.0}) {
    auto f = random_function(t, 3, TargetSpace::ell_p(pt), 16, 42 + std::uint64_t(pt));
    const Naive F(f);
    for (auto [p, q] : {std::pair{2.0, 2.0}, {1.5, 3.0}, {2.0, 4.0}}) {
      CHECK(local_lhs(f, 3, p, q) == doctest::Approx(naive_local_lhs(F, t, 3, p, q)).epsilon(1e-12));
      CHECK(horizontal_rhs(f, 6, p) == doctest::Approx(naive_rhs(F, t, 6, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("local lhs is nondecreasing in n") {
  const BallTable t = build_ball(20);
  auto f = random_function(t, 2, TargetSpace::ell_p(2), 20, 5);
  double prev = 0;
  for (int n = 1; n <= 4; ++n) {
    const double v = local_lhs(f, n, 2, 2);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("global report on a point mass") {
  const BallTable t = build_ball(4);
  LatticeFunction f(t, 1);
  f.at(0)[0] = 1.0;
  const auto r = global_inequality_report(f, 2, 2, 1);
  CHECK(r.lhs == doctest::Approx(std::sqrt(2 * std::numbers::pi * std::numbers::pi / 6)).epsilon(1e-14));
  CHECK(r.rhs == doctest::Approx(2.0).epsilon(1e-15));
  LatticeFunction zero(t, 1);
  const auto z = global_inequality_report(zero, 2, 2, 5);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(std::isnan(z.ratio));
  LatticeFunction edge(t, 1);
  edge.at(t.size() - 1)[0] = 1.0;
  CHECK_THROWS_AS(global_inequality_report(edge, 2, 2, 5), DomainCoverageError);
}

TEST_CASE("global report matches naive sums with closed-form zeta tails") {
  const BallTable t = build_ball(9);
  for (auto [q, zeta] : {std::pair{2.0, std::numbers::pi * std::numbers::pi / 6}, {4.0, 1.2020569031595942854}}) {
    auto f = random_function(t, 2, TargetSpace::ell_p(2), 4, 99);
    const Naive F(f);
    const double p = 2.0;
    std::vector<GroupElement> S = naive_ball(t, 4);
    std::int64_t zlo = 0, zhi = 0;
    for (auto& g : S) {
      zlo = std::min(zlo, g.z);
      zhi = std::max(zhi, g.z);
    }
    const std::int64_t K = zhi - zlo;
    double saturated = 0;
    for (auto& g : S) saturated += 2 * std::pow(F.dist(g, {1000, 1000, 0}), p);
    double lhs = 0, partial_zeta = 0;
    for (std::int64_t k = 1; k <= K; ++k) {
      double inner = 0;
      std::map<Key, int> touched;
      for (auto& g : S) {
        touched[key(g)] = 1;
        touched[key(multiply(g, power(kC, -k)))] = 1;
      }
      for (auto& [kk, _] : touched) {
        GroupElement x{kk[0], kk[1], kk[2]};
        inner += std::pow(F.dist(multiply(x, power(kC, k)), x), p);
      }
      lhs += std::pow(inner, q / p) / std::pow(double(k), 1 + q / 2);
      partial_zeta += 1 / std::pow(double(k), 1 + q / 2);
    }
    lhs += std::pow(saturated, q / p) * (zeta - partial_zeta);
    std::map<Key, int> touched;
    for (auto& g : S)
      for (auto s : {kIdentity, GroupElement{-1, 0, 0}, GroupElement{0, -1, 0}}) touched[key(multiply(g, s))] = 1;
    double rhs = 0;
    for (auto& [kk, _] : touched) {
      GroupElement x{kk[0], kk[1], kk[2]};
      rhs += std::pow(F.dist(multiply(x, kA), x), p) + std::pow(F.dist(multiply(x, kB), x), p);
    }
    const auto r = global_inequality_report(f, p, q, 1);
    CHECK(r.lhs == doctest::Approx(std::pow(lhs, 1 / q)).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(std::pow(rhs, 1 / p)).epsilon(1e-12));
  }
}

TEST_CASE("reports are exactly scale invariant under powers of two") {
  const BallTable t = build_ball(12);
  auto f = random_function(t, 2, TargetSpace::ell_p(2), 5, 3);
  const auto a = global_inequality_report(f, 2, 2, 3);
  const auto l = local_inequality_report(f, 2, 2, 2, 5);
  f.scale(4.0);
  const auto b = global_inequality_report(f, 2, 2, 3);
  const auto m = local_inequality_report(f, 2, 2, 2, 5);
  CHECK(b.lhs == 4.0 * a.lhs);
  CHECK(b.rhs == 4.0 * a.rhs);
  CHECK(b.ratio == a.ratio);
  CHECK(m.ratio == l.ratio);
}

TEST_CASE("kleiner check on the coordinate x") {
  const BallTable t = build_ball(6);
  auto fx = LatticeFunction::from(t, 1, TargetSpace::ell_p(1), [](const GroupElement& g, std::span<double> o) { o[0] = double(g.x); });
  const auto r = kleiner_local_check(fx, 1, 1.0);
  CHECK(r.lhs == 16.0);  // ordered pairs in B_1
  CHECK(r.horizontal_sum == 53.0);
  CHECK(r.constant == 34.0);
  CHECK(r.rhs_with_constant == 34.0 * 53.0);
  LatticeFunction c(t, 1);
  for (double& v : c.values()) v = -2;
  const auto z = kleiner_local_check(c, 1, 2.0);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs_with_constant == 0.0);
}

TEST_CASE("kleiner inequality holds on random vector functions") {
  const BallTable t = build_ball(19);
  int trial = 0;
  for (int n = 1; n <= 6; ++n)
    for (double p : {1.0, 2.0})
      for (int s = 0; s < 3; ++s, ++trial) {
        auto f = random_function(t, 3, TargetSpace::ell_p(2), 3 * n + 1, 1000 + trial);
        const auto r = kleiner_local_check(f, n, p);
        CHECK(r.lhs <= r.rhs_with_constant);
      }
}

TEST_CASE("ell1 report") {
  const BallTable t = build_ball(11);
  auto fz = LatticeFunction::from(t, 1, TargetSpace::ell_p(1), [](const GroupElement& g, std::span<double> o) { o[0] = double(g.z); });
  const auto r = ell1_conjecture_report(fz, 2, 5);
  double expect = 0;
  for (int k = 1; k <= 4; ++k) expect += 17.0 / std::sqrt(double(k));
  CHECK(r.lhs == doctest::Approx(expect).epsilon(1e-14));
  LatticeFunction c(t, 1, TargetSpace::ell_p(1));
  const auto z = ell1_conjecture_report(c, 2, 5);
  CHECK(z.lhs == 0.0);
  CHECK(!z.defined);
  CHECK(std::isnan(z.normalized_ratio));
  CHECK_THROWS_AS(ell1_conjecture_report(fz, 2, 21), DomainCoverageError);
  auto f2 = LatticeFunction::from(t, 1, TargetSpace::ell_p(2), [](const GroupElement& g, std::span<double> o) { o[0] = double(g.z); });
  CHECK_THROWS_AS(ell1_conjecture_report(f2, 2, 5), InvalidArgument);

  // Streaming evaluator agrees with the stored-table version.
  auto proj = [](const GroupElement& g, std::span<double> o) {
    o[0] = double(g.x) + 0.25 * double(g.z % 3);
    o[1] = double(g.y);
  };
  auto fp = LatticeFunction::from(t, 2, TargetSpace::ell_p(1), proj);
  const auto a = ell1_conjecture_report(fp, 2, 5);
  const auto b = ell1_conjecture_report(proj, 2, 2, 5);
  CHECK(b.lhs == doctest::Approx(a.lhs).epsilon(1e-13));
  CHECK(b.rhs == doctest::Approx(a.rhs).epsilon(1e-13));
}

namespace {

// Dense pencil assembled straight from the definitions by group arithmetic.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> naive_global_pencil(const BallTable& t, std::int64_t n) {
  auto B = naive_ball(t, n);
  std::map<Key, int> idx;
  for (std::size_t i = 0; i < B.size(); ++i) idx[key(B[i])] = int(i);
  const int m = int(B.size());
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(m, m), H = Eigen::MatrixXd::Zero(m, m);
  auto add_edge = [](Eigen::MatrixXd& M, int i, int j, double w) {
    // w * (f_i - f_j)^2 with j = -1 meaning f_j = 0
    M(i, i) += w;
    if (j >= 0) {
      M(j, j) += w;
      M(i, j) -= w;
      M(j, i) -= w;
    }
  };
  auto find = [&](const GroupElement& g) {
    auto it = idx.find(key(g));
    return it == idx.end() ? -1 : it->second;
  };
  for (int i = 0; i < m; ++i) {
    for (auto s : {kA, kB}) {
      int j = find(multiply(B[i], s));
      add_edge(H, i, j, 1);
      // edges from outside points x with x*s in the support
      if (find(multiply(B[i], inverse(s))) < 0) H(i, i) += 1;
    }
    for (int k = 1; k <= 4000; ++k) {
      const double w = 1.0 / (double(k) * k);
      int j = find(multiply(B[i], power(kC, k)));
      add_edge(V, i, j, w);
      if (find(multiply(B[i], power(kC, -k))) < 0) V(i, i) += w;
    }
    // Remaining tail: both shifts leave the support for k > 4000.
    V(i, i) += 2 * (std::numbers::pi * std::numbers::pi / 6 - [] {
                 double s = 0;
                 for (int k = 4000; k >= 1; --k) s += 1.0 / (double(k) * k);
                 return s;
               }());
  }
  return {V, H};
}

}  // namespace

TEST_CASE("spectral constant matches dense assembled pencil") {
  const BallTable t = build_ball(6);
  for (int n = 1; n <= 3; ++n) {
    auto [V, H] = naive_global_pencil(t, n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(V, H);
    const double expect = es.eigenvalues().maxCoeff();
    const auto r = optimal_constant_spectral(t, n);
    CHECK(r.dense);
    CHECK(r.eigenvalue == doctest::Approx(expect).epsilon(1e-8));
    if (n == 1) CHECK(r.eigenvalue == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-12));
  }
}

TEST_CASE("iterative solver agrees with dense solver") {
  const BallTable t = build_ball(7);
  SpectralOptions it;
  it.dense_threshold = 0;
  for (int n : {2, 4, 6}) {
    const auto d = optimal_constant_spectral(t, n);
    const auto r = optimal_constant_spectral(t, n, it);
    CHECK(!r.dense);
    CHECK(r.eigenvalue == doctest::Approx(d.eigenvalue).epsilon(1e-7));
  }
  SpectralOptions loc;
  loc.form = SpectralForm::Local;
  loc.multiplier = 3;
  const BallTable big = build_ball(11);
  CHECK_THROWS_AS(optimal_constant_spectral(big, 2, loc), InvalidArgument);
  for (std::int64_t m : {5, 7}) {
    loc.multiplier = m;
    loc.dense_threshold = 2000;
    const auto dl = optimal_constant_spectral(big, 1, loc);
    loc.dense_threshold = 0;
    const auto il = optimal_constant_spectral(big, 1, loc);
    CHECK(dl.dense);
    CHECK(!il.dense);
    CHECK(il.eigenvalue == doctest::Approx(dl.eigenvalue).epsilon(1e-7));
  }
}

TEST_CASE("spectral value dominates the quotient of f = z") {
  const BallTable t = build_ball(8);
  for (int n = 1; n <= 5; ++n) {
    const auto r = optimal_constant_spectral(t, n);
    auto fz = LatticeFunction::from(t, 1, TargetSpace::ell_p(2), [&](const GroupElement& g, std::span<double> o) {
      o[0] = word_distance(t, g) <= n ? double(g.z) + 0.5 : 0.0;
    });
    const auto rep = global_inequality_report(fz, 2, 2, 1);
    CHECK(rep.ratio <= r.ratio_bound + 1e-8);
  }
}

TEST_CASE("random global ratios never exceed the spectral bound") {
  const BallTable t = build_ball(11);
  const auto bound = optimal_constant_spectral(t, 10);
  CHECK(!bound.dense);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_function(t, 1, TargetSpace::ell_p(2), 10, 7000 + trial);
    const auto r = global_inequality_report(f, 2, 2, 1);
    worst = std::max(worst, r.ratio);
    REQUIRE(r.ratio <= bound.ratio_bound + 1e-8);
  }
  CHECK(worst > 0);
  // The extremal vector attains the bound.
  LatticeFunction g(t, 1);
  for (std::size_t i = 0; i < bound.eigenvector.size(); ++i) g.at(i)[0] = bound.eigenvector[i];
  CHECK(global_inequality_report(g, 2, 2, 1).ratio == doctest::Approx(bound.ratio_bound).epsilon(1e-6));
}
