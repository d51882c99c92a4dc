#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "heislab/error.hpp"
#include "heislab/perimeter.hpp"
#include "heislab/rng.hpp"

using namespace heis;

namespace {

// Exit measure by dense sampling of z.
double brute_exit(const Intervals& s, double t) {
  auto in = [&](double z) {
    for (auto [a, b] : s)
      if (z >= a && z <= b) return true;
    return false;
  };
  const double lo = s.front().first, hi = s.back().second;
  const int n = 200000;
  const double h = (hi - lo) / n;
  double m = 0;
  for (int i = 0; i < n; ++i) {
    const double z = lo + (i + 0.5) * h;
    if (in(z) && (!in(z + t) || !in(z - t))) m += h;
  }
  return m;
}

}  // namespace

TEST_CASE("interval algebra and exit lengths") {
  const Intervals s{{0, 3}, {4, 5}};
  CHECK(total_length(s) == 4);
  CHECK(intersect(s, {{2, 4.5}}) == Intervals{{2, 3}, {4, 4.5}});
  CHECK(exit_length(s, 0.5) == doctest::Approx(2.0));
  for (double t : {0.1, 0.5, 0.9, 1.3, 2.0, 4.5, 7.0}) CHECK(exit_length(s, t) == doctest::Approx(brute_exit(s, t)).epsilon(1e-4));
  CHECK(exit_length({{1, 2}}, 0.2) == doctest::Approx(0.4));
  CHECK(exit_length({{1, 2}}, 3) == 1.0);
  CHECK(exit_length({}, 1) == 0.0);
}

TEST_CASE("cube: vertical perimeter and coarse total") {
  for (double s : {1.0, 2.5}) {
    const auto A = make_cube(s);
    CHECK(region_measure(A) == doctest::Approx(s * s * s).epsilon(1e-12));
    for (double t : {1e-3, 0.1 * s, 0.3 * s, 0.49 * s}) CHECK(std::abs(vertical_perimeter(A, t) - 2 * t * s * s) <= 1e-8);
    CHECK(vertical_perimeter(A, s) == doctest::Approx(s * s * s).epsilon(1e-12));
    CHECK(vertical_perimeter(A, 3 * s) == doctest::Approx(s * s * s).epsilon(1e-12));
  }
  for (double s : {2.0, 3.0})
    for (double eps : {0.5, 0.1, 1.0 / 1024}) {
      const double exact = 4 * s * s * (1 - std::sqrt(eps));
      CHECK(coarse_total_vertical_perimeter(make_cube(s), eps) == doctest::Approx(exact).epsilon(1e-6));
    }
  CHECK(coarse_total_vertical_perimeter(make_cube(2), 1 - 1e-9) < 1e-7);
  CHECK_THROWS_AS(coarse_total_vertical_perimeter(make_cube(2), 1.0), InvalidArgument);
  CHECK_THROWS_AS(vertical_perimeter(make_cube(2), 0.0), InvalidArgument);
}

TEST_CASE("Koranyi ball: v_t against Monte Carlo") {
  const auto A = make_koranyi_ball(1.0);
  auto inside = [](double x, double y, double z) {
    const double r2 = x * x + y * y;
    return r2 * r2 + 16 * z * z < 1;
  };
  const CounterRng rng{77};
  const std::uint64_t N = 10'000'000;
  const double vol = 2.0 * 2.0 * 0.5;  // box [-1,1]^2 x [-1/4,1/4]
  for (double t : {0.05, 0.2, 0.8}) {
    double hits = 0;
    for (std::uint64_t i = 0; i < N; ++i) {
      const double x = 2 * rng.uniform(3 * i) - 1, y = 2 * rng.uniform(3 * i + 1) - 1, z = 0.5 * rng.uniform(3 * i + 2) - 0.25;
      if (inside(x, y, z) && (!inside(x, y, z + t) || !inside(x, y, z - t))) hits += 1;
    }
    const double p = hits / N, mc = vol * p, err = vol * std::sqrt(p * (1 - p) / N);
    const double v = vertical_perimeter(A, t);
    MESSAGE("t " << t << " quadrature " << v << " mc " << mc << " +- " << err);
    CHECK(std::abs(v - mc) <= 3 * err);
  }
  // Every point leaves once t exceeds the height of the ball.
  CHECK(vertical_perimeter(A, 0.6) == doctest::Approx(region_measure(A)).epsilon(1e-10));
  CHECK(region_measure(A) == doctest::Approx(std::numbers::pi * std::numbers::pi / 8).epsilon(1e-9));
}

TEST_CASE("v_t is nondecreasing and bounded by the measure") {
  for (const auto& A : region_library()) {
    const double mu = region_measure(A);
    double prev = 0;
    for (double t = 1e-3; t < 4; t *= 1.7) {
      const double v = vertical_perimeter(A, t);
      CHECK(v >= prev - 1e-10);
      CHECK(v <= mu * (1 + 1e-10));
      prev = v;
    }
    CHECK(prev == doctest::Approx(mu).epsilon(1e-9));
  }
}

TEST_CASE("coarse total is monotone in 1/eps for the Koranyi ball") {
  const auto A = make_koranyi_ball(1.0);
  double prev = 0;
  for (int k = 2; k <= 10; k += 2) {
    const double v = coarse_total_vertical_perimeter(A, std::ldexp(1.0, -k));
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("surface perimeter of the cube") {
  for (double s : {1.0, 2.0}) {
    const auto A = make_cube(s);
    const double exact = 4 * s * s + s * s * s / 2;
    CHECK(horizontal_perimeter_surface(A, GradientNorm::L1) == doctest::Approx(exact).epsilon(1e-10));
    CHECK(horizontal_perimeter_surface(A, GradientNorm::L2) == doctest::Approx(exact).epsilon(1e-10));
  }
  // Individual faces: slab faces give their area, top and bottom give int |x|.
  const auto A = make_cube(2.0);
  double slab = 0, cap = 0;
  for (std::size_t i = 0; i < A.boundary.size(); ++i) {
    RegionSpec one = A;
    one.boundary = {A.boundary[i]};
    const double v = horizontal_perimeter_surface(one, GradientNorm::L2);
    (i < 4 ? slab : cap) += v;
    if (i < 4) CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
    else CHECK(v == doctest::Approx(2.0).epsilon(1e-10));  // int_{-1}^1 int_{-1}^1 |x| dx dy
  }
  CHECK(slab + cap == doctest::Approx(20.0));
}

TEST_CASE("surface and mollified perimeters agree") {
  for (const char* name : {"euclidean_ball", "cube"}) {
    const auto A = region_by_name(name);
    for (auto norm : {GradientNorm::L2, GradientNorm::L1}) {
      const auto t0 = std::chrono::steady_clock::now();
      const double s = horizontal_perimeter_surface(A, norm);
      const auto m = horizontal_perimeter_mollified(A, norm);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      MESSAGE(std::string(name) << " " << to_string(norm) << " surface " << s << " mollified " << m.value << " raw " << m.raw[0] << " "
                   << m.raw[1] << " " << m.raw[2] << " (" << secs << " s)");
      CHECK(m.value == doctest::Approx(s).epsilon(0.02));
    }
  }
}

TEST_CASE("dilation and vertical translation") {
  const auto A = make_cube(1.0);
  const auto B = A.dilated(2.0);
  CHECK(region_measure(B) == doctest::Approx(16 * region_measure(A)).epsilon(1e-10));
  for (double t : {0.05, 0.3, 1.0, 3.0}) CHECK(vertical_perimeter(B, t) == doctest::Approx(16 * vertical_perimeter(A, t / 4)).epsilon(1e-8));
  CHECK(horizontal_perimeter_surface(B, GradientNorm::L2) == doctest::Approx(8 * horizontal_perimeter_surface(A, GradientNorm::L2)).epsilon(0.01));
  const auto K = make_koranyi_ball(1.0), K2 = K.dilated(2.0);
  CHECK(horizontal_perimeter_surface(K2, GradientNorm::L1) == doctest::Approx(8 * horizontal_perimeter_surface(K, GradientNorm::L1)).epsilon(1e-8));

  for (const auto& R : region_library()) {
    const auto T = R.translated_vertically(0.37);
    CHECK(region_measure(T) == doctest::Approx(region_measure(R)).epsilon(1e-10));
    CHECK(vertical_perimeter(T, 0.21) == doctest::Approx(vertical_perimeter(R, 0.21)).epsilon(1e-10));
    CHECK(horizontal_perimeter_surface(T, GradientNorm::L2) == doctest::Approx(horizontal_perimeter_surface(R, GradientNorm::L2)).epsilon(1e-10));
  }
}

TEST_CASE("conjecture report on the library") {
  std::vector<double> eps;
  for (int k = 2; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
  std::vector<PerimeterReport> reps;
  for (const auto& A : region_library()) {
    const auto r = conjecture_report(A, eps);
    for (const auto& row : r.rows) {
      CHECK(row.cs_holds);
      CHECK(std::isfinite(row.rho_l2));
      CHECK(row.rho_l1 >= 0);
    }
    CHECK(std::isfinite(r.sigma2_l2));
    CHECK(r.sup_proxy > 0);
    CHECK(r.p2_variant * r.p2_variant == doctest::Approx(r.sq_integral));
    MESSAGE(r.region << " mu " << r.measure << " PER " << r.per_l2 << " sigma2 " << r.sigma2_l2 << " rho(2^-10) " << r.rows.back().rho_l2
                     << " p4 " << r.p4_variant << " sup " << r.sup_proxy);
    reps.push_back(r);
  }
  // Cube side 1: v_t = 2t for t < 1/2, so integral_0^inf v^2/t^2 = 4 * 1/2 + 1/(1/2) = 4.
  CHECK(reps[0].sq_integral == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(reps[0].sup_proxy == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  std::ostringstream csv;
  write_report_csv(csv, reps);
  CHECK(csv.str().rfind("region,kind,param", 0) == 0);
  CHECK_THROWS_AS(conjecture_report(make_cube(1), {0.7}), InvalidArgument);
}

TEST_CASE("Monte Carlo coarse total: N vs 4N and against quadrature") {
  const auto A = make_koranyi_ball(1.0);
  const double eps = std::ldexp(1.0, -10);
  const auto a = coarse_total_vertical_perimeter_mc(A, eps, 1'000'000, 5);
  const auto b = coarse_total_vertical_perimeter_mc(A, eps, 4'000'000, 6);
  const double q = coarse_total_vertical_perimeter(A, eps);
  MESSAGE("mc " << a.value << " +- " << a.std_error << " / " << b.value << " +- " << b.std_error << " quadrature " << q);
  CHECK(std::abs(a.value - b.value) <= 0.02 * b.value);
  CHECK(std::abs(b.value - q) <= 3 * b.std_error);
  const auto v = vertical_perimeter_mc(make_cube(1), 0.2, 200000, 1);
  CHECK(std::abs(v.value - 0.4) <= 4 * v.std_error);
}
