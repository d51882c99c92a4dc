#include "heislab/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"
#include "heislab/poincare.hpp"

namespace heis {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  return parallel::sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

void remove_mean(Vec& x) {
  const double m = parallel::sum(x.size(), [&](std::size_t i) { return x[i]; }) / static_cast<double>(x.size());
  parallel::for_each(x.size(), [&](std::size_t i) { x[i] -= m; });
}

struct RowBuilder {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
  std::vector<double> diag;
  explicit RowBuilder(std::size_t n) : rows(n), diag(n, 0.0) {}
  void edge(std::uint32_t i, std::uint32_t j, double w) {
    rows[i].emplace_back(j, w);
    rows[j].emplace_back(i, w);
  }
  GraphForm build() {
    GraphForm g;
    g.diag = std::move(diag);
    g.row_ptr.assign(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::sort(rows[i].begin(), rows[i].end());
      g.row_ptr[i + 1] = g.row_ptr[i] + rows[i].size();
    }
    g.col.reserve(g.row_ptr.back());
    g.weight.reserve(g.row_ptr.back());
    for (auto& r : rows)
      for (auto [j, w] : r) {
        g.col.push_back(j);
        g.weight.push_back(w);
      }
    return g;
  }
};

}  // namespace

void GraphForm::apply(const Vec& x, Vec& y) const {
  y.resize(x.size());
  parallel::for_each(x.size(), [&](std::size_t i) {
    double s = diag[i] * x[i];
    for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) s += weight[e] * (x[i] - x[col[e]]);
    y[i] = s;
  });
}

double GraphForm::quadratic(const Vec& x) const {
  Vec y;
  apply(x, y);
  return dot(x, y);
}

SpectralProblem assemble_spectral_problem(const BallTable& table, std::int64_t n, const SpectralOptions& opt) {
  if (n < 1) throw InvalidArgument("spectral: n must be >= 1");
  if (opt.k_max < 0) throw InvalidArgument("spectral: k_max must be >= 0");
  SpectralProblem pb;
  std::vector<std::uint32_t> pos(table.size(), kNoIndex);
  auto in_u = [&](std::uint32_t j) { return j != kNoIndex && pos[j] != kNoIndex; };

  if (opt.form == SpectralForm::Global) {
    if (table.radius() < n) throw DomainCoverageError("spectral: table smaller than support", n);
    const std::size_t m = table.count(n);
    for (std::size_t i = 0; i < m; ++i) {
      pos[i] = static_cast<std::uint32_t>(i);
      pb.unknowns.push_back(i);
    }
    RowBuilder h(m), v(m);
    std::int64_t zmin = 0, zmax = 0;
    for (std::size_t i = 0; i < m; ++i) {
      zmin = std::min(zmin, table.element(i).z);
      zmax = std::max(zmax, table.element(i).z);
      for (Generator s : {Generator::A, Generator::B}) {
        const std::uint32_t j = table.neighbor(i, s);
        if (in_u(j)) h.edge(static_cast<std::uint32_t>(i), j, 1.0);
      }
      for (Generator s : kGenerators)
        if (!in_u(table.neighbor(i, s))) h.diag[i] += 1.0;
    }
    const std::int64_t extent = zmax - zmin;
    const std::int64_t K = opt.k_max > 0 ? opt.k_max : extent;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::int64_t k = 1; k <= K; ++k) {
        const double w = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
        const std::uint32_t up = k <= extent ? table.vertical_shift(i, k) : kNoIndex;
        const std::uint32_t down = k <= extent ? table.vertical_shift(i, -k) : kNoIndex;
        if (in_u(up))
          v.edge(static_cast<std::uint32_t>(i), up, w);
        else
          v.diag[i] += w;
        if (!in_u(down)) v.diag[i] += w;
      }
      if (opt.k_max == 0) v.diag[i] += 2.0 * zeta_tail(2.0, K);
    }
    pb.horizontal = h.build();
    pb.vertical = v.build();
    return pb;
  }

  if (opt.multiplier < 1) throw InvalidArgument("spectral: multiplier must be >= 1");
  const std::int64_t K = opt.k_max > 0 ? opt.k_max : n * n;
  const auto root = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(K))));
  const std::int64_t need = std::max(opt.multiplier * n + 1, n + 4 * root);
  if (table.radius() < need) throw DomainCoverageError("spectral local form: table too small", need);
  const std::size_t mh = table.count(opt.multiplier * n);
  const std::size_t mv = table.count(n);
  std::vector<char> mark(table.size(), 0);
  for (std::size_t i = 0; i < mh; ++i) {
    mark[i] = 1;
    mark[table.neighbor(i, Generator::A)] = 1;
    mark[table.neighbor(i, Generator::B)] = 1;
  }
  for (std::size_t i = 0; i < mv; ++i)
    for (std::int64_t k = 1; k <= K; ++k) {
      const std::uint32_t j = table.vertical_shift(i, k);
      if (j == kNoIndex) throw InternalConsistencyError("spectral: vertical shift outside table");
      // A vertical endpoint outside the horizontal region could move freely and make the quotient unbounded.
      if (static_cast<std::int64_t>(table.distance(j)) > opt.multiplier * n)
        throw InvalidArgument("spectral local form: multiplier too small, B_n c^k leaves B_{multiplier*n}");
      mark[j] = 1;
    }
  for (std::size_t i = 0; i < table.size(); ++i)
    if (mark[i]) {
      pos[i] = static_cast<std::uint32_t>(pb.unknowns.size());
      pb.unknowns.push_back(i);
    }
  const std::size_t N = pb.unknowns.size();
  RowBuilder h(N), v(N);
  for (std::size_t i = 0; i < mh; ++i)
    for (Generator s : {Generator::A, Generator::B}) h.edge(pos[i], pos[table.neighbor(i, s)], 1.0);
  for (std::size_t i = 0; i < mv; ++i)
    for (std::int64_t k = 1; k <= K; ++k)
      v.edge(pos[i], pos[table.vertical_shift(i, k)], 1.0 / (static_cast<double>(k) * static_cast<double>(k)));
  pb.horizontal = h.build();
  pb.vertical = v.build();
  pb.deflate_constants = true;
  return pb;
}

namespace {

Eigen::MatrixXd dense_of(const GraphForm& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, i) += g.diag[static_cast<std::size_t>(i)];
    for (std::size_t e = g.row_ptr[static_cast<std::size_t>(i)]; e < g.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
      M(i, i) += g.weight[e];
      M(i, static_cast<Eigen::Index>(g.col[e])) -= g.weight[e];
    }
  }
  return M;
}

SpectralResult solve_dense(const SpectralProblem& pb) {
  Eigen::MatrixXd A = dense_of(pb.vertical);
  Eigen::MatrixXd B = dense_of(pb.horizontal);
  const auto n = A.rows();
  Eigen::MatrixXd Q;
  if (pb.deflate_constants) {
    // Householder reflector mapping e_1 to the normalized constant vector;
    // its remaining columns span the complement.
    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    u(0) -= 1.0;
    const double un = u.norm();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    if (un > 0) H -= 2.0 * (u / un) * (u / un).transpose();
    Q = H.rightCols(n - 1);
    A = Q.transpose() * A * Q;
    B = Q.transpose() * B * Q;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense generalized eigensolver failed", 0.0, 0.0);
  const auto last = es.eigenvalues().size() - 1;
  Eigen::VectorXd x = es.eigenvectors().col(last);
  if (pb.deflate_constants) x = Q * x;
  SpectralResult r;
  r.eigenvalue = es.eigenvalues()(last);
  r.dense = true;
  r.eigenvector.assign(x.data(), x.data() + x.size());
  return r;
}

// Jacobi-preconditioned CG for the horizontal form.
void cg_solve(const GraphForm& B, const Vec& rhs, Vec& x, bool deflate) {
  const std::size_t n = rhs.size();
  Vec inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = B.diag[i];
    for (std::size_t e = B.row_ptr[i]; e < B.row_ptr[i + 1]; ++e) d += B.weight[e];
    inv_diag[i] = d > 0 ? 1.0 / d : 1.0;
  }
  Vec r = rhs;
  if (deflate) remove_mean(r);
  x.assign(n, 0.0);
  Vec z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  if (deflate) remove_mean(z);
  p = z;
  double rz = dot(r, z);
  const double stop = 1e-20 * dot(r, r);
  for (int it = 0; it < 5000 && dot(r, r) > stop; ++it) {
    B.apply(p, q);
    const double alpha = rz / dot(p, q);
    parallel::for_each(n, [&](std::size_t i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = inv_diag[i] * r[i];
    });
    if (deflate) remove_mean(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel::for_each(n, [&](std::size_t i) { p[i] = z[i] + beta * p[i]; });
  }
  if (deflate) remove_mean(x);
}

std::uint64_t splitmix(std::uint64_t v) {
  v += 0x9E3779B97F4A7C15ull;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
  return v ^ (v >> 31);
}

}  // namespace

SpectralResult solve_spectral(const SpectralProblem& pb, const SpectralOptions& opt) {
  const std::size_t n = pb.unknowns.size();
  const std::size_t effective = pb.deflate_constants ? n - 1 : n;
  if (effective == 0) throw InvalidArgument("spectral: no unknowns");
  SpectralResult res;
  res.unknowns = n;
  if (effective < opt.dense_threshold) {
    res = solve_dense(pb);
    res.unknowns = n;
  } else {
    const GraphForm& A = pb.vertical;
    const GraphForm& B = pb.horizontal;
    Vec x(n), Ax, Bx, w, p, Ap, Bp, Aw, Bw;
    for (std::size_t i = 0; i < n; ++i)
      x[i] = 1.0 + static_cast<double>(splitmix(i) >> 11) * 0x1.0p-53 + 0.1 * static_cast<double>(i) / static_cast<double>(n);
    if (pb.deflate_constants) remove_mean(x);
    auto normalize = [&](Vec& v) {
      Vec tmp;
      B.apply(v, tmp);
      const double s = 1.0 / std::sqrt(dot(v, tmp));
      for (double& e : v) e *= s;
    };
    normalize(x);
    double lambda = A.quadratic(x), previous = -1.0;
    int calm = 0;
    std::int64_t it = 0;
    for (;; ++it) {
      if (it >= opt.max_iterations) throw ConvergenceError("spectral iteration cap reached", previous, lambda);
      A.apply(x, Ax);
      B.apply(x, Bx);
      Vec r(n);
      parallel::for_each(n, [&](std::size_t i) { r[i] = Ax[i] - lambda * Bx[i]; });
      res.residual = std::sqrt(dot(r, r) / std::max(dot(Bx, Bx), 1e-300)) / std::max(std::abs(lambda), 1e-300);
      cg_solve(B, r, w, pb.deflate_constants);
      normalize(w);

      std::vector<const Vec*> basis{&x, &w};
      if (!p.empty()) basis.push_back(&p);
      for (;;) {
        const auto m = static_cast<Eigen::Index>(basis.size());
        std::vector<Vec> As(basis.size()), Bs(basis.size());
        for (std::size_t c = 0; c < basis.size(); ++c) {
          A.apply(*basis[c], As[c]);
          B.apply(*basis[c], Bs[c]);
        }
        Eigen::MatrixXd GA(m, m), GB(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
          for (Eigen::Index b = a; b < m; ++b) {
            GA(a, b) = GA(b, a) = dot(*basis[static_cast<std::size_t>(a)], As[static_cast<std::size_t>(b)]);
            GB(a, b) = GB(b, a) = dot(*basis[static_cast<std::size_t>(a)], Bs[static_cast<std::size_t>(b)]);
          }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gb(GB);
        if (gb.eigenvalues()(0) < 1e-12 * gb.eigenvalues()(m - 1) && basis.size() > 1) {
          basis.pop_back();
          continue;
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(GA, GB);
        const Eigen::VectorXd c = es.eigenvectors().col(m - 1);
        Vec xn(n, 0.0), pn(n, 0.0);
        parallel::for_each(n, [&](std::size_t i) {
          double s = 0.0;
          for (Eigen::Index k = 1; k < m; ++k) s += c(k) * (*basis[static_cast<std::size_t>(k)])[i];
          pn[i] = s;
          xn[i] = c(0) * x[i] + s;
        });
        x = std::move(xn);
        p = std::move(pn);
        previous = lambda;
        lambda = es.eigenvalues()(m - 1);
        break;
      }
      if (pb.deflate_constants) {
        remove_mean(x);
        remove_mean(p);
      }
      normalize(x);
      if (!p.empty() && dot(p, p) > 0) normalize(p);
      if (std::abs(lambda - previous) <= opt.rel_tol * std::abs(lambda)) {
        if (++calm >= 2) break;
      } else {
        calm = 0;
      }
    }
    res.eigenvalue = lambda;
    res.iterations = it + 1;
    res.eigenvector = x;
    res.unknowns = n;
  }
  res.ratio_bound = std::sqrt(std::max(res.eigenvalue, 0.0));
  return res;
}

SpectralResult optimal_constant_spectral(const BallTable& table, std::int64_t n, const SpectralOptions& opt) {
  return solve_spectral(assemble_spectral_problem(table, n, opt), opt);
}

}  // namespace heis
