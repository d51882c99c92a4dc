#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heislab/error.hpp"
#include "heislab/kernels.hpp"
#include "heislab/quadrature.hpp"

using namespace heis;

TEST_CASE("kernel formulas are consistent with their primitives and derivatives") {
  for (double t : {0.1, 1.0, 7.0}) {
    const KernelFamily P{KernelKind::P, t}, Q{KernelKind::Q, t}, R{KernelKind::R, t};
    for (double x : {-30.0, -1.3, 0.0, 0.4, 2.5, 11.0}) {
      const double e = 1e-5 * std::max(1.0, std::abs(x));
      for (const auto* k : {&P, &Q, &R}) {
        const double num = ((*k).primitive(x + e) - (*k).primitive(x - e)) / (2 * e);
        CHECK((*k)(x) == doctest::Approx(num).epsilon(1e-6).scale(1.0 / t));
      }
      const double dt = 1e-6 * t;
      const double dPdt = (KernelFamily{KernelKind::P, t + dt}(x) - KernelFamily{KernelKind::P, t - dt}(x)) / (2 * dt);
      CHECK(Q(x) == doctest::Approx(dPdt).epsilon(1e-6));
      const double dPdx = (P(x + e) - P(x - e)) / (2 * e);
      CHECK(R(x) == doctest::Approx(dPdx).epsilon(1e-5));
    }
  }
}

TEST_CASE("tail masses agree with brute quadrature") {
  quad::Options opt;
  opt.rel_tol = 1e-12;
  for (double t : {0.5, 2.0}) {
    const double U = 5 * t;
    for (auto kind : {KernelKind::P, KernelKind::Q, KernelKind::R}) {
      const KernelFamily k{kind, t};
      // integral over [U, 1e8] of |k| plus the primitive-based remainder.
      const auto body = quad::integrate([&](double u) { return std::abs(k(u)); }, U, 1e4, opt);
      const double far = std::abs(k.primitive(1e300) - k.primitive(1e4));
      CHECK(k.tail_mass(U) == doctest::Approx(2 * (body.value + far)).epsilon(1e-9));
    }
  }
  const KernelFamily P{KernelKind::P, 1.0};
  const double U = P.truncation_radius(1e-6);
  CHECK(P.tail_mass(U) <= 1e-6);
  CHECK(P.tail_mass(U * 0.99) > 1e-6);
}

TEST_CASE("adaptive quadrature on known integrals") {
  const auto r = quad::integrate([](double x) { return std::exp(-x * x); }, -10, 10);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  const auto s = quad::integrate([](double x) { return 1 / std::sqrt(x); }, 0, 1, {1e-10, 1e-10, 4000, true});
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-9));
  auto v = quad::integrate_n<2>([](double x) { return quad::Values<2>{std::sin(x), x * x}; }, 0, std::numbers::pi);
  CHECK(v.value[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(v.value[1] == doctest::Approx(std::pow(std::numbers::pi, 3) / 3).epsilon(1e-13));
  CHECK_THROWS_AS(quad::integrate([](double x) { return std::sin(1 / x) / x; }, 1e-9, 1, {0, 1e-14, 50, true}), QuadratureError);
  CHECK(quad::gauss_legendre([](double x) { return std::cos(x); }, 0, 1, 3) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
}

TEST_CASE("kernel identity suite") {
  for (double t : {0.1, 1.0, 10.0}) {
    const auto rows = kernel_identity_suite(t, 1e-6);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.rel_error <= 1e-9);
  }
  const auto one = kernel_identity_suite(1.0, 1e-6);
  CHECK(one[1].value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(one[2].value == doctest::Approx(2 / std::numbers::pi).epsilon(1e-9));
  CHECK(kernel_identity_suite(10.0, 1e-7)[3].value == doctest::Approx(2 / (10 * std::numbers::pi)).epsilon(1e-9));
  CHECK_THROWS_AS(kernel_identity_suite(0.0, 1e-6), InvalidArgument);
}

TEST_CASE("semigroup identities on a coarse window") {
  const auto r = semigroup_check(1.0, 1e-2, 20.0, 200.0);
  CHECK(r.pp_l1 < 1e-5);
  CHECK(r.pq_l1 < 1e-5);
}
