#include "heislab/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"

namespace heis {

namespace {

constexpr int kMaxEvaluatorDim = 64;

void require_radius(const BallTable& t, std::int64_t needed, const char* what) {
  if (t.radius() < needed) throw DomainCoverageError(std::string(what) + ": table radius " + std::to_string(t.radius()) + " too small", needed);
}

void require_exponents(double p, double q) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("exponent p must be a finite value >= 1");
  if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("exponent q must be a finite value >= 1");
}

void require_n(std::int64_t n) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
}

double ipow(double base, double e) { return e == 1.0 ? base : (e == 2.0 ? base * base : std::pow(base, e)); }

// ||f(j) - f(i)||^p with j possibly outside the table.
double increment(const LatticeFunction& f, std::size_t i, std::uint32_t j, double p) {
  return ipow(lp_distance(f.value_or_zero(j), f.at(i), f.target().p_target), p);
}

std::vector<std::size_t> support_of(const LatticeFunction& f) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < f.domain().size(); ++i)
    if (f.nonzero(i)) s.push_back(i);
  return s;
}

}  // namespace

TargetSpace TargetSpace::ell_p(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("target l_p requires p >= 1");
  return {p, std::max(p, 2.0), 0.5};
}

double lp_distance(std::span<const double> u, std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
  }
  if (u.size() == 1) return std::abs(u[0] - v[0]);
  double s = 0.0;
  if (p == 1.0) {
    for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] - v[i]);
    return s;
  }
  if (p == 2.0) {
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
  }
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i] - v[i]), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(std::span<const double> u, double p) {
  const std::vector<double> zero(u.size(), 0.0);
  return lp_distance(u, zero, p);
}

LatticeFunction::LatticeFunction(const BallTable& domain, int dim, TargetSpace target)
    : domain_(&domain), dim_(dim), target_(target), zero_(static_cast<std::size_t>(std::max(dim, 0)), 0.0) {
  if (dim < 1) throw InvalidArgument("lattice function dimension must be >= 1");
  values_.assign(domain.size() * static_cast<std::size_t>(dim), 0.0);
}

LatticeFunction LatticeFunction::from(const BallTable& domain, int dim, TargetSpace target, const Evaluator& f) {
  LatticeFunction out(domain, dim, target);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    f(domain.element(i), out.at(i));
    for (double v : out.at(i))
      if (!std::isfinite(v)) throw InvalidArgument("lattice function value is not finite at " + to_string(domain.element(i)));
  }
  return out;
}

bool LatticeFunction::nonzero(std::size_t i) const {
  for (double v : at(i))
    if (v != 0.0) return true;
  return false;
}

void LatticeFunction::scale(double s) {
  for (double& v : values_) v *= s;
}

double zeta_tail(double s, std::int64_t K) {
  if (!(s > 1.0)) throw InvalidArgument("zeta_tail requires s > 1");
  const std::int64_t N = std::max<std::int64_t>(K + 1, 32);
  std::vector<double> terms;
  for (std::int64_t k = K + 1; k < N; ++k) terms.push_back(std::pow(static_cast<double>(k), -s));
  // Euler-Maclaurin remainder for sum_{k>=N} k^{-s}.
  const double x = static_cast<double>(N);
  const double xs = std::pow(x, -s);
  double em = x * xs / (s - 1.0) + 0.5 * xs + s * xs / (12.0 * x);
  em -= s * (s + 1) * (s + 2) * xs / (720.0 * x * x * x);
  em += s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * xs / (30240.0 * x * x * x * x * x);
  terms.push_back(em);
  return parallel::pairwise_sum(terms);
}

double local_lhs(const LatticeFunction& f, std::int64_t n, double p, double q) {
  require_n(n);
  require_exponents(p, q);
  const BallTable& t = f.domain();
  require_radius(t, 5 * n, "local_lhs");
  const std::size_t m = t.count(n);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n * n));
  for (std::int64_t k = 1; k <= n * n; ++k) {
    const double inner = parallel::sum(m, [&](std::size_t i) {
      const std::uint32_t j = t.vertical_shift(i, k);
      if (j == kNoIndex) throw InternalConsistencyError("local_lhs: vertical shift left B_5n");
      return increment(f, i, j, p);
    });
    terms.push_back(std::pow(static_cast<double>(k), -1.0 - q / 2.0) * std::pow(inner, q / p));
  }
  return std::pow(parallel::pairwise_sum(terms), 1.0 / q);
}

double horizontal_rhs(const LatticeFunction& f, std::int64_t radius, double p) {
  if (radius < 0) throw InvalidArgument("horizontal_rhs: radius must be >= 0");
  require_exponents(p, 1.0);
  const BallTable& t = f.domain();
  require_radius(t, radius + 1, "horizontal_rhs");
  const double s = parallel::sum(t.count(radius), [&](std::size_t i) {
    return increment(f, i, t.neighbor(i, Generator::A), p) + increment(f, i, t.neighbor(i, Generator::B), p);
  });
  return std::pow(s, 1.0 / p);
}

PoincareReport local_inequality_report(const LatticeFunction& f, std::int64_t n, double p, double q, std::int64_t multiplier) {
  if (multiplier < 1) throw InvalidArgument("radius multiplier must be >= 1");
  PoincareReport r;
  r.n = n;
  r.p = p;
  r.q = q;
  r.radius_multiplier = multiplier;
  r.lhs = local_lhs(f, n, p, q);
  r.rhs = horizontal_rhs(f, multiplier * n, p);
  r.k_explicit = n * n;
  if (r.rhs > 0.0) {
    r.ratio = r.lhs / r.rhs;
  } else if (r.lhs > 0.0) {
    throw InternalConsistencyError("local report: vertical side positive with zero horizontal side");
  } else {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

PoincareReport global_inequality_report(const LatticeFunction& f, double p, double q, std::int64_t k_max) {
  require_exponents(p, q);
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  const BallTable& t = f.domain();
  const double pt = f.target().p_target;
  PoincareReport r;
  r.p = p;
  r.q = q;
  r.radius_multiplier = 0;

  const std::vector<std::size_t> S = support_of(f);
  if (S.empty()) {
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  int maxd = 0;
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<std::int64_t, std::int64_t>> zrange;
  for (std::size_t i : S) {
    maxd = std::max(maxd, t.distance(i));
    const auto& g = t.element(i);
    auto [it, fresh] = zrange.try_emplace({g.x, g.y}, g.z, g.z);
    if (!fresh) {
      it->second.first = std::min(it->second.first, g.z);
      it->second.second = std::max(it->second.second, g.z);
    }
  }
  if (maxd + 1 > t.radius()) throw DomainCoverageError("global report: support touches the table boundary", maxd + 1);
  r.n = maxd;
  std::int64_t extent = 0;
  for (const auto& [col, zr] : zrange) extent = std::max(extent, zr.second - zr.first);

  auto norm_p = [&](std::size_t i) { return ipow(lp_norm(f.at(i), pt), p); };
  auto vanishes = [&](std::uint32_t j) { return j == kNoIndex || !f.nonzero(j); };

  const std::int64_t K = std::max(k_max, extent);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(K));
  for (std::int64_t k = 1; k <= K; ++k) {
    const double inner = parallel::sum(S.size(), [&](std::size_t s) {
      const std::size_t i = S[s];
      double v = increment(f, i, t.vertical_shift(i, k), p);
      if (vanishes(t.vertical_shift(i, -k))) v += norm_p(i);
      return v;
    });
    terms.push_back(std::pow(static_cast<double>(k), -1.0 - q / 2.0) * std::pow(inner, q / p));
  }
  const double saturated = 2.0 * parallel::sum(S.size(), [&](std::size_t s) { return norm_p(S[s]); });
  r.k_explicit = K;
  r.tail = std::pow(saturated, q / p) * zeta_tail(1.0 + q / 2.0, K);
  terms.push_back(r.tail);
  r.lhs = std::pow(parallel::pairwise_sum(terms), 1.0 / q);

  const double h = parallel::sum(S.size(), [&](std::size_t s) {
    const std::size_t i = S[s];
    double v = increment(f, i, t.neighbor(i, Generator::A), p) + increment(f, i, t.neighbor(i, Generator::B), p);
    if (vanishes(t.neighbor(i, Generator::AInv))) v += norm_p(i);
    if (vanishes(t.neighbor(i, Generator::BInv))) v += norm_p(i);
    return v;
  });
  r.rhs = std::pow(h, 1.0 / p);
  if (!(r.rhs > 0.0)) throw InternalConsistencyError("global report: nonzero function with vanishing horizontal side");
  r.ratio = r.lhs / r.rhs;
  return r;
}

KleinerResult kleiner_local_check(const LatticeFunction& f, std::int64_t n, double p) {
  require_n(n);
  require_exponents(p, 1.0);
  const BallTable& t = f.domain();
  require_radius(t, 3 * n + 1, "kleiner_local_check");
  const double pt = f.target().p_target;
  const std::size_t m = t.count(n);
  KleinerResult r;
  r.lhs = parallel::sum(m, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += ipow(lp_distance(f.at(i), f.at(j), pt), p);
    return s;
  });
  r.horizontal_sum = std::pow(horizontal_rhs(f, 3 * n, p), p);
  const double two_n = 2.0 * static_cast<double>(n);
  r.constant = std::pow(two_n, p - 1.0) * static_cast<double>(t.count(2 * n)) * two_n;
  r.rhs_with_constant = r.constant * r.horizontal_sum;
  return r;
}

namespace {

void finish_ell1(Ell1Report& r) {
  r.defined = r.n >= 2 && r.rhs > 0.0;
  r.normalized_ratio = r.defined ? r.lhs / (std::sqrt(std::log(static_cast<double>(r.n))) * r.rhs) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Ell1Report ell1_conjecture_report(const LatticeFunction& f, std::int64_t n, std::int64_t multiplier) {
  require_n(n);
  if (multiplier < 1) throw InvalidArgument("radius multiplier must be >= 1");
  if (f.target().p_target != 1.0) throw InvalidArgument("ell1 report requires an l_1 target");
  const BallTable& t = f.domain();
  require_radius(t, std::max(multiplier * n + 1, 5 * n), "ell1_conjecture_report");
  Ell1Report r;
  r.n = n;
  r.multiplier = multiplier;
  const std::size_t m = t.count(n);
  std::vector<double> terms;
  for (std::int64_t k = 1; k <= n * n; ++k) {
    const double inner = parallel::sum(m, [&](std::size_t i) { return increment(f, i, t.vertical_shift(i, k), 1.0); });
    terms.push_back(inner * std::pow(static_cast<double>(k), -1.5));
  }
  r.lhs = parallel::pairwise_sum(terms);
  r.rhs = horizontal_rhs(f, multiplier * n, 1.0);
  finish_ell1(r);
  return r;
}

Ell1Report ell1_conjecture_report(const Evaluator& f, int dim, std::int64_t n, std::int64_t multiplier, double memory_budget) {
  require_n(n);
  if (multiplier < 1) throw InvalidArgument("radius multiplier must be >= 1");
  if (dim < 1 || dim > kMaxEvaluatorDim) throw InvalidArgument("evaluator dimension must be in [1, 64]");
  const auto d = static_cast<std::size_t>(dim);
  auto dist1 = [&](const GroupElement& g, const GroupElement& h) {
    double u[kMaxEvaluatorDim], v[kMaxEvaluatorDim];
    f(g, std::span<double>(u, d));
    f(h, std::span<double>(v, d));
    return lp_distance(std::span<const double>(u, d), std::span<const double>(v, d), 1.0);
  };

  Ell1Report r;
  r.n = n;
  r.multiplier = multiplier;
  std::vector<GroupElement> inner_ball;
  visit_ball_layers(n, [&](std::int64_t, std::span<const GroupElement> b) { inner_ball.insert(inner_ball.end(), b.begin(), b.end()); },
                    memory_budget);
  std::vector<double> terms;
  for (std::int64_t k = 1; k <= n * n; ++k) {
    const double inner = parallel::sum(inner_ball.size(), [&](std::size_t i) {
      const GroupElement& g = inner_ball[i];
      return dist1({g.x, g.y, g.z + k}, g);
    });
    terms.push_back(inner * std::pow(static_cast<double>(k), -1.5));
  }
  r.lhs = parallel::pairwise_sum(terms);

  std::vector<double> partials;
  visit_ball_layers(
      multiplier * n,
      [&](std::int64_t, std::span<const GroupElement> b) {
        partials.push_back(parallel::sum(b.size(), [&](std::size_t i) {
          return dist1(step(b[i], Generator::A), b[i]) + dist1(step(b[i], Generator::B), b[i]);
        }));
      },
      memory_budget);
  r.rhs = parallel::pairwise_sum(partials);
  finish_ell1(r);
  return r;
}

}  // namespace heis
