#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "heislab/continuous.hpp"
#include "heislab/error.hpp"
#include "heislab/quadrature.hpp"

using namespace heis;

namespace {

GridSpec cube(std::size_t n, double L) { return {n, n, n, L, L, L}; }

GridFunction sample_scalar(const GridSpec& s, const std::function<double(double, double, double)>& f) {
  return GridFunction::sample(s, 1, [&](double x, double y, double z, std::span<double> out) { out[0] = f(x, y, z); });
}

GridFunction sample_bump(const GridSpec& s, const Bump& b) {
  return sample_scalar(s, [&](double x, double y, double z) { return b(x, y, z); });
}

double gauss(double x, double y, double z, double a, double sz) {
  return std::exp(-(x * x + y * y) / (2 * a * a) - z * z / (2 * sz * sz));
}

// splitmix64 stream, independent of the library's generators.
struct Mix {
  std::uint64_t s;
  double next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

}  // namespace

TEST_CASE("horizontal gradient matches analytic derivatives to second order") {
  // f = x * g with g a Gaussian; d_a f = g + x g_x, d_b f = x g_y + x^2 g_z.
  auto max_err = [](std::size_t n) {
    const double L = 9.0;
    const GridSpec s{n, n, n, L, L, L};
    const auto f = sample_scalar(s, [](double x, double y, double z) { return x * gauss(x, y, z, 1.0, 1.2); });
    const auto g = horizontal_gradient(f);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double x = s.x(i), y = s.y(j), z = s.z(k);
          const double w = gauss(x, y, z, 1.0, 1.2);
          const double da = w - x * x * w;
          const double db = x * (-y * w) + x * x * (-z / 1.44 * w);
          err = std::max({err, std::abs(g(i, j, k, 0) - da), std::abs(g(i, j, k, 1) - db)});
        }
    return err;
  };
  const double e1 = max_err(64), e2 = max_err(128);
  MESSAGE("gradient max errors " << e1 << " " << e2);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e2 < 0.02);

  // At the centre cell of an odd grid the a-derivative of x g is g(0) = 1.
  const GridSpec s = cube(81, 8.0);
  const auto f = sample_scalar(s, [](double x, double y, double z) { return x * gauss(x, y, z, 1.0, 1.0); });
  CHECK(horizontal_gradient(f)(40, 40, 40, 0) == doctest::Approx(1.0).epsilon(s.hx() * s.hx()));
}

TEST_CASE("gradient of a function of z alone") {
  const GridSpec s{12, 10, 30, 2.0, 2.0, 3.0};
  const auto f = sample_scalar(s, [](double, double, double z) { return z * z < 4 ? std::exp(-1 / (1 - z * z / 4)) : 0.0; });
  GridFunction g;
  CHECK_THROWS_AS(g = horizontal_gradient(f), BoundaryContamination);
  const auto h = sample_scalar(s, [](double x, double y, double z) {
    const double ok = std::abs(x) < 1.5 && std::abs(y) < 1.5;
    return ok && z * z < 4 ? std::exp(-1 / (1 - z * z / 4)) : 0.0;
  });
  g = horizontal_gradient(h);
  // Cells whose x and y neighbours all lie inside the plateau.
  for (std::size_t i = 3; i < 9; ++i)
    for (std::size_t j = 2; j < 8; ++j)
      for (std::size_t k = 1; k + 1 < 30; ++k) {
        CHECK(g(i, j, k, 0) == 0.0);
        const double dz = (h(i, j, k + 1) - h(i, j, k - 1)) / (2 * s.hz());
        CHECK(g(i, j, k, 1) == doctest::Approx(s.x(i) * dz).epsilon(1e-14).scale(1e-14));
      }
  const GridFunction zero(s, 3);
  CHECK(horizontal_gradient(zero).is_zero());
  CHECK(horizontal_gradient(zero).dim() == 6);
}

TEST_CASE("Poisson convolution is positive and nearly mass preserving") {
  const GridSpec s{4, 4, 256, 1.0, 1.0, 10.0};
  const auto f = sample_bump(s, {BumpFamily::Euclidean, 0.9, 3.0, 1.0});
  const double tol = 1e-6;
  for (double t : {0.05, 1.0, 5.0}) {
    const auto out = center_convolve(f, {KernelKind::P, t}, tol);
    double in_mass = 0, out_mass = 0;
    for (std::size_t c = 0; c < s.cells(); ++c) {
      CHECK(out.data()[c] >= 0.0);
      in_mass += f.data()[c];
      out_mass += out.data()[c];
    }
    CHECK(out_mass <= in_mass * (1 + tol));
    // Only the kernel mass that leaves the box (support ends at |z| = 3) is lost.
    CHECK(out_mass >= in_mass * (1 - KernelFamily{KernelKind::P, t}.tail_mass(s.Lz - 3.0)));
  }
}

TEST_CASE("delta column reproduces the Q profile") {
  for (std::size_t nz : {801u, 1601u}) {
    const GridSpec s{1, 1, nz, 1.0, 1.0, 20.0};
    GridFunction f(s, 1);
    const std::size_t mid = nz / 2;
    f(0, 0, mid) = 1.0 / s.hz();
    const KernelFamily Q{KernelKind::Q, 1.0};
    const auto out = center_convolve(f, Q, 1e-8);
    double err = 0.0;
    for (std::size_t k = 0; k < nz; ++k) err = std::max(err, std::abs(out(0, 0, k) - Q(s.z(k) - s.z(mid))));
    MESSAGE("nz " << nz << " max pointwise error " << err);
    CHECK(err < 0.1 * s.hz() * s.hz());
  }
}

TEST_CASE("Q_2t agrees with P_t * Q_t on the grid") {
  const double tol = 1e-7;
  auto defect = [&](std::size_t nz) {
    const GridSpec s{1, 1, nz, 1.0, 1.0, 400.0};
    const auto f = sample_scalar(s, [](double, double, double z) { return z * z < 9 ? std::exp(-1 / (1 - z * z / 9)) : 0.0; });
    double l1 = 0.0, fl1 = 0.0;
    const auto lhs = center_convolve(f, {KernelKind::Q, 2.0}, tol);
    const auto rhs = center_convolve(center_convolve(f, {KernelKind::Q, 1.0}, tol), {KernelKind::P, 1.0}, tol);
    for (std::size_t k = 0; k < nz; ++k) {
      l1 += std::abs(lhs(0, 0, k) - rhs(0, 0, k)) * s.hz();
      fl1 += std::abs(f(0, 0, k)) * s.hz();
    }
    return l1 / fl1;
  };
  const double d1 = defect(4000), d2 = defect(8000);
  MESSAGE("relative l1 defects " << d1 << " " << d2);
  CHECK(d2 < 5 * tol + 2e-4);
  CHECK(d2 < d1);
}

TEST_CASE("vertical side of a Gaussian: closed form and Monte Carlo") {
  // For f = exp(-(x^2+y^2)/2a^2 - z^2/2s^2), p = q = 2, the vertical side is pi*a.
  const double a = 1.0, sz = 1.0;
  const GridSpec s{32, 32, 64, 8.0, 8.0, 8.0};
  const auto f = sample_scalar(s, [&](double x, double y, double z) { return gauss(x, y, z, a, sz); });
  const auto v = vertical_lhs_continuous(f, 2.0, 2.0);
  MESSAGE("grid " << v.value << " +- " << v.error_bar << " exact " << std::numbers::pi * a << " tails " << v.small_tail
                  << " " << v.large_tail);
  REQUIRE(v.has_error_bar);
  CHECK(v.value == doctest::Approx(std::numbers::pi * a).epsilon(5e-3));

  // Monte Carlo over (t, x, y, z): t uniform on (0, T], z over [-Lz - T, Lz],
  // plus the exact-limit tail I_inf / T for t > T.
  const double T = 16.0, L = 8.0;
  const double vol = (2 * L) * (2 * L) * (2 * L + T) * T;
  Mix rng{20240611};
  const std::size_t N = 10'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double t = T * (1.0 - rng.next());
    const double x = -L + 2 * L * rng.next(), y = -L + 2 * L * rng.next();
    const double z = -L - T + (2 * L + T) * rng.next();
    const double d = gauss(x, y, z + t, a, sz) - gauss(x, y, z, a, sz);
    const double val = vol * d * d / (t * t);
    sum += val;
    sum2 += val * val;
  }
  const double mean = sum / N, var = (sum2 / N - mean * mean) / N;
  const double i_inf = 2 * std::numbers::pi * a * a * std::sqrt(std::numbers::pi) * sz;
  const double sq = mean + i_inf / T;
  const double mc = std::sqrt(sq), mc_err = std::sqrt(var) / (2 * mc);
  const double bar = std::sqrt(mc_err * mc_err + v.error_bar * v.error_bar);
  MESSAGE("mc " << mc << " +- " << mc_err);
  CHECK(std::abs(v.value - mc) <= 3 * bar);
  CHECK(mc == doctest::Approx(std::numbers::pi * a).epsilon(5 * mc_err / mc));
}

TEST_CASE("vertical side edge cases") {
  const GridSpec s{8, 8, 16, 1.0, 1.0, 1.0};
  const GridFunction zero(s, 2);
  CHECK(vertical_lhs_continuous(zero, 2, 2).value == 0.0);
  const auto f = sample_bump(s, {BumpFamily::Euclidean, 0.8, 0.8, 1.0});
  CHECK_THROWS_AS(vertical_lhs_continuous(f, 2, 2, {0.1, 2.5}), BoundaryContamination);
  CHECK_THROWS_AS(vertical_lhs_continuous(f, 2, 2, {0.5, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(vertical_lhs_continuous(f, 0.5, 2), InvalidArgument);
  // Below one cell the interpolated increment is a pure power of t.
  const double h = s.hz();
  CHECK(vertical_increment(f, 0.25 * h, 3.0) == doctest::Approx(std::pow(0.25, 3.0) * vertical_increment(f, h, 3.0)).epsilon(1e-12));
  // Large shifts separate the supports.
  double mass = 0;
  for (double v : f.data()) mass += v * v;
  CHECK(vertical_increment(f, 2 * s.Lz + 3 * h, 2.0) == doctest::Approx(2 * mass * s.cell_measure()).epsilon(1e-12));
}

TEST_CASE("horizontal side of a product bump against a separable oracle") {
  // p = 2: ||grad_H f||^2 = 2 A' A^2 + M2 A A' with A = int w^2, A' = int w'^2,
  // M2 = int x^2 w^2 for the profile w on [-1, 1] scaled by R.
  const double R = 1.5;
  auto w = [](double u) { return u * u < 1 ? std::exp(-1 / (1 - u * u)) : 0.0; };
  auto dw = [&](double u) { return u * u < 1 ? w(u) * (-2 * u / ((1 - u * u) * (1 - u * u))) : 0.0; };
  quad::Options opt{1e-15, 1e-12, 4000, true};
  const double A = R * quad::integrate([&](double u) { return w(u) * w(u); }, -1, 1, opt).value;
  const double Ad = quad::integrate([&](double u) { return dw(u) * dw(u); }, -1, 1, opt).value / R;
  const double M2 = R * R * R * quad::integrate([&](double u) { return u * u * w(u) * w(u); }, -1, 1, opt).value;
  const double exact = std::sqrt(2 * Ad * A * A + M2 * A * Ad);
  auto rel = [&](std::size_t n) {
    const auto f = sample_bump(cube(n, 1.6), {BumpFamily::Product, R, R, 1.0});
    return std::abs(horizontal_rhs_continuous(f, 2.0).value - exact) / exact;
  };
  const double e1 = rel(32), e2 = rel(64);
  MESSAGE("rhs relative errors " << e1 << " " << e2);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e2 < 1e-2);
  CHECK(horizontal_rhs_continuous(GridFunction(cube(8, 1.0), 1), 2.0).value == 0.0);
}

TEST_CASE("dilation covariance of both sides") {
  // Same box for f and f o dilation, so the dilated copy is resolved on half
  // as many cells per axis.
  const double lambda = 2.0;
  struct Case {
    Bump b;
    GridSpec s;
  };
  const Case cases[] = {{{BumpFamily::Product, 2.0, 4.0, 1.0}, {64, 64, 64, 2.2, 2.2, 4.4}},
                        {{BumpFamily::Koranyi, 2.0, 4.0, 1.0}, {128, 128, 128, 2.2, 2.2, 1.1}}};
  for (const auto& c : cases)
    for (double p : {2.0, 3.0}) {
      const auto r0 = continuous_inequality_report(sample_bump(c.s, c.b), p, 3.0);
      const auto r1 = continuous_inequality_report(sample_bump(c.s, c.b.dilated(lambda)), p, 3.0);
      const double factor = std::pow(lambda, 1 - 4 / p);
      MESSAGE(to_string(c.b.family) << " p " << p << " lhs " << r1.base.lhs / r0.base.lhs / factor << " rhs "
                                    << r1.base.rhs / r0.base.rhs / factor);
      CHECK(r1.base.lhs / r0.base.lhs == doctest::Approx(factor).epsilon(0.02));
      CHECK(r1.base.rhs / r0.base.rhs == doctest::Approx(factor).epsilon(0.02));
    }
}

TEST_CASE("three bump families give comparable ratios") {
  const GridSpec s{48, 48, 48, 1.6, 1.6, 1.6};
  double lo = 1e300, hi = 0;
  for (auto fam : {BumpFamily::Product, BumpFamily::Koranyi, BumpFamily::Euclidean}) {
    const auto r = continuous_inequality_report(sample_bump(s, {fam, 1.5, 1.5, 1.0}), 2, 2);
    MESSAGE(to_string(fam) << " ratio " << r.base.ratio << " +- " << r.ratio_error);
    lo = std::min(lo, r.base.ratio);
    hi = std::max(hi, r.base.ratio);
  }
  CHECK(hi / lo <= 3.0);
}

TEST_CASE("report sentinels and flags") {
  const GridSpec s{8, 8, 8, 1.0, 1.0, 1.0};
  const auto r = continuous_inequality_report(GridFunction(s, 1), 2, 2);
  CHECK(r.degenerate);
  CHECK(std::isnan(r.base.ratio));
  const auto f = sample_bump(s, {BumpFamily::Euclidean, 0.9, 0.9, 1.0});
  const auto one = continuous_inequality_report(f, 1, 2);
  CHECK(one.outside_theorem);
  CHECK(std::isfinite(one.base.ratio));
  CHECK_FALSE(continuous_inequality_report(f, 2, 2).outside_theorem);
  CHECK_THROWS_AS(continuous_inequality_report(f, 3, 2), InvalidArgument);
  CHECK_THROWS_AS(continuous_inequality_report(f, 2, 1.5), InvalidArgument);
}

TEST_CASE("g-function") {
  const GridSpec s{12, 12, 64, 1.0, 1.0, 4.0};
  const auto t = log_grid(s.hz(), 2 * s.Lz - s.hz(), 12);
  const GridFunction zero(s, 1);
  CHECK(g_function(zero, 2, t).g.is_zero());
  const Bump bumps[] = {{BumpFamily::Product, 0.9, 1.0, 1.0},
                        {BumpFamily::Koranyi, 0.9, 1.0, 1.0},
                        {BumpFamily::Euclidean, 0.9, 1.5, 1.0},
                        {BumpFamily::Euclidean, 0.6, 0.5, 1.0},
                        {BumpFamily::Product, 0.8, 3.0, 1.0}};
  for (const auto& b : bumps) {
    const auto f = sample_bump(s, b);
    const auto g = g_function(f, 2, t);
    MESSAGE(to_string(b.family) << " g ratio " << g.norm_ratio << " tail share " << g.tail_fraction);
    CHECK(std::isfinite(g.norm_ratio));
    CHECK(g.norm_ratio > 0);
    auto f3 = f;
    f3.scale(3.0);
    const auto g3 = g_function(f3, 2, t);
    for (std::size_t c = 0; c < s.cells(); ++c) CHECK(g3.g.data()[c] == doctest::Approx(3 * g.g.data()[c]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(g_function(zero, 1.5, t), InvalidArgument);
}

TEST_CASE("grid file round trip") {
  const GridSpec s{3, 4, 5, 1.0, 2.0, 3.0};
  const auto f = GridFunction::sample(s, 2, [](double x, double y, double z, std::span<double> o) {
    o[0] = x + 10 * y;
    o[1] = z;
  });
  std::stringstream ss;
  write_grid(ss, f);
  CHECK(ss.str().size() == 8 + 8 + 24 + 48 + 3 * 4 * 5 * 2 * 8);
  const auto g = read_grid(ss);
  CHECK(g.data() == f.data());
  CHECK(g.dim() == 2);
  CHECK(g.spec().Lz == 3.0);
  std::stringstream bad("HEISGRIX");
  CHECK_THROWS_AS(read_grid(bad), InvalidArgument);
  auto str = ss.str();
  std::stringstream cut(str.substr(0, str.size() - 3));
  CHECK_THROWS_AS(read_grid(cut), InvalidArgument);
}
