#include "heislab/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "heislab/error.hpp"
#include "heislab/quadrature.hpp"

namespace heis {

namespace {

constexpr double kPi = std::numbers::pi;

void require_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("kernel scale t must be positive and finite");
}

}  // namespace

double KernelFamily::operator()(double x) const {
  const double d = t * t + x * x;
  switch (kind) {
    case KernelKind::P: return t / (kPi * d);
    case KernelKind::Q: return (x * x - t * t) / (kPi * d * d);
    case KernelKind::R: return -2.0 * t * x / (kPi * d * d);
  }
  return 0.0;
}

double KernelFamily::primitive(double x) const {
  switch (kind) {
    case KernelKind::P: return std::atan(x / t) / kPi;
    case KernelKind::Q: return -x / (kPi * (t * t + x * x));
    case KernelKind::R: return t / (kPi * (t * t + x * x));
  }
  return 0.0;
}

double KernelFamily::tail_mass(double U) const {
  switch (kind) {
    case KernelKind::P: return 1.0 - 2.0 * std::atan(U / t) / kPi;
    case KernelKind::Q:
      if (U < t) throw InvalidArgument("Q tail formula needs U >= t");
      return 2.0 * U / (kPi * (t * t + U * U));
    case KernelKind::R: return 2.0 * t / (kPi * (t * t + U * U));
  }
  return 0.0;
}

double KernelFamily::truncation_radius(double tol) const {
  if (!(tol > 0.0)) throw InvalidArgument("tail tolerance must be positive");
  double lo = t, hi = t;
  while (tail_mass(hi) > tol) hi *= 2.0;
  if (hi == lo) return t;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tail_mass(mid) > tol ? lo : hi) = mid;
  }
  return hi;
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::P: return "P";
    case KernelKind::Q: return "Q";
    case KernelKind::R: return "R";
  }
  return "?";
}

KernelKind kernel_kind_from(const std::string& s) {
  if (s == "P" || s == "p") return KernelKind::P;
  if (s == "Q" || s == "q") return KernelKind::Q;
  if (s == "R" || s == "r") return KernelKind::R;
  throw InvalidArgument("unknown kernel kind '" + s + "'");
}

std::vector<IdentityCheck> kernel_identity_suite(double t, double quad_tol) {
  require_t(t);
  if (!(quad_tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
  quad::Options opt;
  opt.rel_tol = std::min(quad_tol * 1e-3, 1e-10);
  opt.abs_tol = 0.0;
  const KernelFamily P{KernelKind::P, t}, Q{KernelKind::Q, t}, R{KernelKind::R, t};
  const double U = 1e4 * t;
  std::vector<IdentityCheck> out;
  auto push = [&](std::string name, double value, double exact, double qerr) {
    IdentityCheck c{std::move(name), value, exact, std::abs(value - exact), 0.0, qerr};
    c.rel_error = c.abs_error / std::abs(exact);
    if (!(c.rel_error <= quad_tol))
      throw QuadratureError("identity '" + c.name + "' missed tolerance", c.rel_error);
    out.push_back(c);
  };

  {
    const auto body = quad::integrate([&](double x) { return P(x); }, 0.0, U, opt);
    push("integral_P", 2.0 * body.value + P.tail_mass(U), 1.0, 2.0 * body.error);
  }
  {
    // x = s^2 removes the square-root singularity at the origin.
    const double X = 1e6 * t, S = std::sqrt(X);
    const auto body = quad::integrate([&](double s) { return 2.0 * s * s * P(s * s); }, 0.0, S, opt);
    // integral_X^inf sqrt(x) t / (pi (t^2 + x^2)) dx as a series in (t/X)^2.
    double tail = 0.0, term = 1.0;
    for (int j = 0; j < 6; ++j) {
      tail += term * std::pow(X, -0.5 - 2.0 * j) / (0.5 + 2.0 * j);
      term *= -t * t;
    }
    tail *= t / kPi;
    push("half_moment_P", body.value + tail, std::sqrt(t / 2.0), body.error);
  }
  {
    const auto inner = quad::integrate([&](double x) { return std::abs(Q(x)); }, 0.0, t, opt);
    const auto outer = quad::integrate([&](double x) { return std::abs(Q(x)); }, t, U, opt);
    push("l1_norm_Q", 2.0 * (inner.value + outer.value) + Q.tail_mass(U), 2.0 / (kPi * t), 2.0 * (inner.error + outer.error));
  }
  {
    const auto body = quad::integrate([&](double x) { return std::abs(R(x)); }, 0.0, U, opt);
    push("l1_norm_R", 2.0 * body.value + R.tail_mass(U), 2.0 / (kPi * t), 2.0 * body.error);
  }
  return out;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  explicit FftwBuffer(std::size_t n) {
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    if (!real || !spec) throw ResourceError("fftw allocation failed", static_cast<double>(n) * 24.0);
  }
  ~FftwBuffer() {
    fftw_free(real);
    fftw_free(spec);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

SemigroupCheck semigroup_check(double t, double h, double L, double W) {
  require_t(t);
  if (!(h > 0.0) || !(L > 0.0) || !(W >= L)) throw InvalidArgument("semigroup check: need h > 0 and W >= L > 0");
  const auto M = static_cast<std::size_t>(std::llround(2.0 * W / h)) + 1;
  std::size_t n = 1;
  while (n < 2 * M - 1) n <<= 1;

  FftwBuffer a(n), b(n), c(n);
  fftw_plan fwd_a, fwd_b, fwd_c, inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), a.real, a.spec, FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), b.real, b.spec, FFTW_ESTIMATE);
    fwd_c = fftw_plan_dft_r2c_1d(static_cast<int>(n), c.real, c.spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), c.spec, c.real, FFTW_ESTIMATE);
  }
  const KernelFamily P{KernelKind::P, t}, Q{KernelKind::Q, t};
  auto sample = [&](double* dst, const KernelFamily& k, bool weighted) {
    for (std::size_t j = 0; j < n; ++j) dst[j] = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const double w = weighted ? ((j == 0 || j + 1 == M) ? 0.5 * h : h) : 1.0;
      dst[j] = w * k(-W + static_cast<double>(j) * h);
    }
  };
  sample(a.real, P, true);
  sample(b.real, P, false);
  sample(c.real, Q, false);
  fftw_execute(fwd_a);
  fftw_execute(fwd_b);
  fftw_execute(fwd_c);

  // Product spectra, then inverse; index m of the result sits at x = -2W + m h.
  auto convolve_into_c = [&](const fftw_complex* rhs) {
    for (std::size_t k = 0; k < n / 2 + 1; ++k) {
      const std::complex<double> u(a.spec[k][0], a.spec[k][1]), v(rhs[k][0], rhs[k][1]);
      const std::complex<double> w = u * v / static_cast<double>(n);
      c.spec[k][0] = w.real();
      c.spec[k][1] = w.imag();
    }
    fftw_execute(inv);
  };
  auto l1_defect = [&](const KernelFamily& target) {
    const auto lo = static_cast<std::size_t>(std::llround((2.0 * W - L) / h));
    const auto hi = static_cast<std::size_t>(std::llround((2.0 * W + L) / h));
    double s = 0.0;
    for (std::size_t m = lo; m <= hi; ++m) {
      const double x = -2.0 * W + static_cast<double>(m) * h;
      const double w = (m == lo || m == hi) ? 0.5 * h : h;
      s += w * std::abs(c.real[m] - target(x));
    }
    return s;
  };

  SemigroupCheck out;
  out.t = t;
  std::vector<double> q_spec(2 * (n / 2 + 1));
  for (std::size_t k = 0; k < n / 2 + 1; ++k) {
    q_spec[2 * k] = c.spec[k][0];
    q_spec[2 * k + 1] = c.spec[k][1];
  }
  convolve_into_c(b.spec);
  out.pp_l1 = l1_defect(KernelFamily{KernelKind::P, 2.0 * t});
  convolve_into_c(reinterpret_cast<const fftw_complex*>(q_spec.data()));
  out.pq_l1 = l1_defect(KernelFamily{KernelKind::Q, 2.0 * t});
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_a);
    fftw_destroy_plan(fwd_b);
    fftw_destroy_plan(fwd_c);
    fftw_destroy_plan(inv);
  }
  return out;
}

}  // namespace heis
