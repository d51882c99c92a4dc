#include "heislab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"
#include "heislab/rng.hpp"

namespace heis {

EmbeddingSpec horizontal_projection() {
  return {"horizontal_projection", 2.0, 2, [](const GroupElement& g, std::span<double> out) {
            out[0] = static_cast<double>(g.x);
            out[1] = static_cast<double>(g.y);
          }};
}

EmbeddingSpec coordinate_embedding() {
  return {"coordinate", 2.0, 3, [](const GroupElement& g, std::span<double> out) {
            out[0] = static_cast<double>(g.x);
            out[1] = static_cast<double>(g.y);
            out[2] = static_cast<double>(g.z);
          }};
}

EmbeddingSpec frechet_embedding(const BallTable& table, std::int64_t radius) {
  if (radius < 0) throw InvalidArgument("frechet_embedding: radius must be >= 0");
  if (table.radius() < 2 * radius) throw DomainCoverageError("frechet_embedding: table too small", 2 * radius);
  const std::size_t m = table.count(radius);
  std::vector<GroupElement> anchors(table.elements().begin(), table.elements().begin() + static_cast<std::ptrdiff_t>(m));
  const BallTable* t = &table;
  return {"frechet", std::numeric_limits<double>::infinity(), static_cast<int>(m),
          [t, anchors = std::move(anchors)](const GroupElement& g, std::span<double> out) {
            for (std::size_t i = 0; i < anchors.size(); ++i) out[i] = static_cast<double>(left_quotient_distance(*t, anchors[i], g));
          }};
}

EmbeddingSpec scaled_embedding(const EmbeddingSpec& e, double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidArgument("scaled_embedding: lambda must be positive");
  EmbeddingSpec s = e;
  s.name = e.name + "*" + std::to_string(lambda);
  s.eval = [f = e.eval, lambda](const GroupElement& g, std::span<double> out) {
    f(g, out);
    for (double& v : out) v *= lambda;
  };
  return s;
}

DistortionResult distortion(const EmbeddingSpec& e, const BallTable& table, std::int64_t n, const DistortionOptions& opt) {
  if (n < 1) throw InvalidArgument("distortion: n must be >= 1");
  if (e.dim < 1 || !e.eval) throw InvalidArgument("distortion: empty embedding");
  if (!(e.p >= 1)) throw InvalidArgument("distortion: p must be >= 1");
  if (table.radius() < 2 * n) throw DomainCoverageError("distortion: table too small for pair distances", 2 * n);

  const std::size_t P = table.count(n);
  const std::size_t d = static_cast<std::size_t>(e.dim);
  std::vector<double> img(P * d);
  parallel::for_each(P, [&](std::size_t i) { e.eval(table.element(i), std::span<double>(img.data() + i * d, d)); });

  auto ratio = [&](std::size_t i, std::size_t j) {
    const double dw = static_cast<double>(left_quotient_distance(table, table.element(i), table.element(j)));
    const double df = lp_distance(std::span<const double>(img.data() + i * d, d), std::span<const double>(img.data() + j * d, d), e.p);
    return df / dw;
  };

  DistortionResult r;
  r.n = n;
  r.points = P;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> part;  // (max, min) per chunk or row

  if (P <= opt.exact_point_limit) {
    r.pairs = static_cast<std::uint64_t>(P) * (P - 1) / 2;
    part.assign(P, {0.0, inf});
    parallel::for_each_chunk(P, [&](std::size_t i) {
      double hi = 0, lo = inf;
      for (std::size_t j = i + 1; j < P; ++j) {
        const double q = ratio(i, j);
        hi = std::max(hi, q);
        lo = std::min(lo, q);
      }
      part[i] = {hi, lo};
    });
  } else {
    r.sampled = true;
    r.pairs = opt.sample_pairs;
    const CounterRng rng{opt.seed};
    const std::size_t nc = parallel::chunk_count(opt.sample_pairs);
    part.assign(nc, {0.0, inf});
    parallel::for_each_chunk(nc, [&](std::size_t c) {
      double hi = 0, lo = inf;
      const std::uint64_t b = c * parallel::kChunk, end = std::min<std::uint64_t>(opt.sample_pairs, b + parallel::kChunk);
      for (std::uint64_t k = b; k < end; ++k) {
        const std::size_t i = rng.bits(2 * k) % P;
        std::size_t j = rng.bits(2 * k + 1) % (P - 1);
        if (j >= i) ++j;
        const double q = ratio(i, j);
        hi = std::max(hi, q);
        lo = std::min(lo, q);
      }
      part[c] = {hi, lo};
    });
  }
  r.expansion = 0;
  r.contraction = inf;
  for (auto [hi, lo] : part) {
    r.expansion = std::max(r.expansion, hi);
    r.contraction = std::min(r.contraction, lo);
  }
  r.distortion = r.contraction > 0 ? r.expansion / r.contraction : inf;
  return r;
}

LowerBoundResult poincare_lower_bound(double q, std::int64_t n, double K, const BallTable& table, std::int64_t multiplier,
                                      std::uint64_t ball_outer) {
  if (!(q >= 2) || !std::isfinite(q)) throw InvalidArgument("poincare_lower_bound: q must be finite and >= 2");
  if (n < 1) throw InvalidArgument("poincare_lower_bound: n must be >= 1");
  if (!(K > 0)) throw InvalidArgument("poincare_lower_bound: K must be positive");
  if (multiplier < 1) throw InvalidArgument("poincare_lower_bound: multiplier must be >= 1");
  if (table.radius() < 4 * n) throw DomainCoverageError("poincare_lower_bound: table too small for d_W(c^k)", 4 * n);

  LowerBoundResult r;
  r.q = q;
  r.n = n;
  r.K = K;
  r.multiplier = multiplier;
  const std::int64_t kmax = n * n;
  std::vector<double> terms(static_cast<std::size_t>(kmax));
  for (std::int64_t k = 1; k <= kmax; ++k) {
    const double dk = static_cast<double>(word_distance(table, {0, 0, k}));
    terms[static_cast<std::size_t>(k - 1)] = std::pow(dk, q) / std::pow(static_cast<double>(k), 1 + q / 2);
  }
  r.vertical_sum = parallel::pairwise_sum(terms);
  r.ball_n = table.count(n);
  if (ball_outer == 0) ball_outer = ball_growth(multiplier * n).back();
  r.ball_outer = ball_outer;
  if (std::isinf(K)) {
    r.bound = 1.0;
  } else {
    const double ratio = static_cast<double>(r.ball_n) * r.vertical_sum / (K * 2.0 * static_cast<double>(ball_outer));
    r.bound = std::pow(ratio, 1.0 / q);
  }
  r.vacuous = r.bound <= 1.0;
  return r;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Nearest matrix whose restriction to the complement of the all-ones
// vector is negative semidefinite.
MatrixXd project_edm_cone(const MatrixXd& X, const MatrixXd& Q) {
  const Eigen::Index n = X.rows();
  MatrixXd Y = Q * X * Q;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Y.topLeftCorner(n - 1, n - 1));
  VectorXd ev = es.eigenvalues().cwiseMin(0.0);
  Y.topLeftCorner(n - 1, n - 1) = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return Q * Y * Q;
}

struct Feasibility {
  bool feasible = false;
  std::uint64_t steps = 0;
  double gap = 0;
};

// Alternating projections between the box lo <= X <= hi (zero diagonal) and
// the cone. The gap between consecutive projections tends to the distance
// between the sets, which is zero exactly when they meet.
Feasibility feasible(const MatrixXd& lo, const MatrixXd& hi, const MatrixXd& Q, const C2Options& opt, MatrixXd& warm) {
  const double tol = opt.feasibility_tol * hi.maxCoeff();
  Feasibility f;
  MatrixXd X = warm.cwiseMax(lo).cwiseMin(hi);
  double checkpoint = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const MatrixXd Y = project_edm_cone(X, Q);
    X = Y.cwiseMax(lo).cwiseMin(hi);
    f.gap = (X - Y).norm();
    ++f.steps;
    if (f.gap <= tol) {
      f.feasible = true;
      warm = X;
      return f;
    }
    if ((it + 1) % 200 == 0) {
      // Progress over the last window is negligible: the sets are apart.
      if (f.gap > 0.999 * checkpoint) return f;
      checkpoint = f.gap;
    }
  }
  throw ConvergenceError("exact_c2_small: projection budget exhausted (gap " + std::to_string(f.gap) + ")", checkpoint, f.gap);
}

}  // namespace

C2Result exact_c2_small(const MatrixXd& metric, const C2Options& opt) {
  const Eigen::Index n = metric.rows();
  if (metric.cols() != n) throw InvalidArgument("exact_c2_small: metric must be square");
  if (n < 2 || n > 64) throw InvalidArgument("exact_c2_small: need 2..64 points");
  if (!(opt.tol > 0)) throw InvalidArgument("exact_c2_small: tol must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (metric(i, i) != 0) throw InvalidArgument("exact_c2_small: nonzero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(metric(i, j) > 0) || !std::isfinite(metric(i, j))) throw InvalidArgument("exact_c2_small: distances must be positive and finite");
      if (std::abs(metric(i, j) - metric(j, i)) > 1e-12 * metric(i, j)) throw InvalidArgument("exact_c2_small: metric not symmetric");
    }
  }

  double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dmin = std::min(dmin, metric(i, j));
      dmax = std::max(dmax, metric(i, j));
    }
  const MatrixXd sq = (metric / dmax).cwiseAbs2();

  VectorXd v = VectorXd::Ones(n);
  v(n - 1) += std::sqrt(static_cast<double>(n));
  const MatrixXd Q = MatrixXd::Identity(n, n) - 2.0 * v * v.transpose() / v.squaredNorm();

  C2Result r;
  MatrixXd warm = sq;
  auto test = [&](double D) {
    MatrixXd hi = sq * (D * D);
    const auto f = feasible(sq, hi, Q, opt, warm);
    r.projections += f.steps;
    return f.feasible;
  };

  double lo = 1.0, hi = dmax / dmin;
  if (test(lo)) {
    r.value = r.lower = r.upper = 1.0;
    return r;
  }
  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    (test(mid) ? hi : lo) = mid;
    ++r.bisection_steps;
  }
  r.lower = lo;
  r.upper = hi;
  r.value = hi;
  return r;
}

Eigen::MatrixXd ball_metric(const BallTable& table, std::int64_t n) {
  if (table.radius() < 2 * n) throw DomainCoverageError("ball_metric: table too small", 2 * n);
  const auto P = static_cast<Eigen::Index>(table.count(n));
  MatrixXd m(P, P);
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = 0; j < P; ++j)
      m(i, j) = static_cast<double>(left_quotient_distance(table, table.element(static_cast<std::size_t>(i)), table.element(static_cast<std::size_t>(j))));
  return m;
}

Eigen::MatrixXd cycle_metric(int n) {
  if (n < 3) throw InvalidArgument("cycle_metric: n must be >= 3");
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::min(std::abs(i - j), n - std::abs(i - j));
  return m;
}

}  // namespace heis
