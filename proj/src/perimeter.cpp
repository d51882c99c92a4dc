#include "heislab/perimeter.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"
#include "heislab/quadrature.hpp"
#include "heislab/rng.hpp"

namespace heis {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double total_length(const Intervals& s) {
  double l = 0.0;
  for (const auto& [a, b] : s) l += b - a;
  return l;
}

Intervals intersect(const Intervals& a, const Intervals& b) {
  Intervals out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first), hi = std::min(a[i].second, b[j].second);
    if (lo < hi) out.emplace_back(lo, hi);
    (a[i].second < b[j].second ? i : j)++;
  }
  return out;
}

Intervals shifted(const Intervals& s, double u) {
  Intervals out = s;
  for (auto& [a, b] : out) {
    a += u;
    b += u;
  }
  return out;
}

double exit_length(const Intervals& s, double t) {
  if (s.empty()) return 0.0;
  if (s.size() == 1) return std::min(s[0].second - s[0].first, 2.0 * t);
  return total_length(s) - total_length(intersect(intersect(s, shifted(s, -t)), shifted(s, t)));
}

bool RegionSpec::contains(double x, double y, double z) const {
  if (footprint == Footprint::Rect ? (std::abs(x) > fx || std::abs(y) > fy) : (x * x + y * y > fx * fx)) return false;
  for (const auto& [a, b] : section(x, y))
    if (z >= a && z <= b) return true;
  return false;
}

RegionSpec RegionSpec::dilated(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("dilation factor must be positive");
  RegionSpec r = *this;
  const double l2 = lambda * lambda, l3 = l2 * lambda;
  r.name = name + "*" + std::to_string(lambda);
  r.Lx *= lambda;
  r.Ly *= lambda;
  r.Lz *= l2;
  r.fx *= lambda;
  r.fy *= lambda;
  r.max_section *= l2;
  r.section = [sec = section, lambda, l2](double x, double y) {
    auto s = sec(x / lambda, y / lambda);
    for (auto& [a, b] : s) {
      a *= l2;
      b *= l2;
    }
    return s;
  };
  for (auto& p : r.boundary)
    p.eval = [ev = p.eval, lambda, l2, l3](double u, double v, std::array<double, 3>& P, std::array<double, 3>& N) {
      ev(u, v, P, N);
      P = {lambda * P[0], lambda * P[1], l2 * P[2]};
      N = {l3 * N[0], l3 * N[1], l2 * N[2]};
    };
  return r;
}

RegionSpec RegionSpec::translated_vertically(double u) const {
  RegionSpec r = *this;
  r.name = name + "+c^" + std::to_string(u);
  r.Lz += std::abs(u);
  r.section = [sec = section, u](double x, double y) { return shifted(sec(x, y), u); };
  for (auto& p : r.boundary)
    p.eval = [ev = p.eval, u](double a, double b, std::array<double, 3>& P, std::array<double, 3>& N) {
      ev(a, b, P, N);
      P[2] += u;
    };
  return r;
}

namespace {

struct ProfileSegment {
  double s0, s1;
  std::function<void(double s, double& r, double& z, double& r_dr, double& dz)> eval;  // r_dr = r * dr/ds
};

// Surface of revolution: profile runs from the bottom axis point to the top
// one with the region on its left in the (r, z) half-plane.
std::vector<Patch> revolve(const std::vector<ProfileSegment>& profile) {
  std::vector<Patch> out;
  for (const auto& seg : profile) {
    Patch p;
    p.u0 = seg.s0;
    p.u1 = seg.s1;
    p.v0 = 0.0;
    p.v1 = 2.0 * kPi;
    p.eval = [ev = seg.eval](double s, double th, std::array<double, 3>& P, std::array<double, 3>& N) {
      double r, z, r_dr, dz;
      ev(s, r, z, r_dr, dz);
      const double c = std::cos(th), sn = std::sin(th);
      P = {r * c, r * sn, z};
      N = {dz * r * c, dz * r * sn, -r_dr};
    };
    out.push_back(std::move(p));
  }
  return out;
}

ProfileSegment flat_disk(double z, double R, bool top) {
  // Bottom: r goes 0 -> R; top: R -> 0.
  return {0.0, R, [z, R, top](double s, double& r, double& zz, double& r_dr, double& dz) {
            r = top ? R - s : s;
            zz = z;
            r_dr = top ? -r : r;
            dz = 0.0;
          }};
}

}  // namespace

RegionSpec make_cube(double side) {
  if (!(side > 0.0)) throw InvalidArgument("cube side must be positive");
  const double h = side / 2;
  RegionSpec r;
  r.name = "cube";
  r.Lx = r.Ly = r.Lz = h;
  r.footprint = Footprint::Rect;
  r.fx = r.fy = h;
  r.section = [h](double x, double y) { return (std::abs(x) <= h && std::abs(y) <= h) ? Intervals{{-h, h}} : Intervals{}; };
  r.max_section = side;
  auto face = [&](int axis, double sign) {
    Patch p{-h, h, -h, h, {}};
    p.eval = [axis, sign, h](double u, double v, std::array<double, 3>& P, std::array<double, 3>& N) {
      N = {0, 0, 0};
      N[axis] = sign;
      if (axis == 0) P = {sign * h, u, v};
      if (axis == 1) P = {u, sign * h, v};
      if (axis == 2) P = {u, v, sign * h};
    };
    r.boundary.push_back(std::move(p));
  };
  for (int axis = 0; axis < 3; ++axis) {
    face(axis, 1.0);
    face(axis, -1.0);
  }
  return r;
}

RegionSpec make_euclidean_ball(double R) {
  if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
  RegionSpec r;
  r.name = "euclidean_ball";
  r.Lx = r.Ly = r.Lz = R;
  r.footprint = Footprint::Disk;
  r.fx = r.fy = R;
  r.section = [R](double x, double y) {
    const double q = R * R - x * x - y * y;
    if (q <= 0.0) return Intervals{};
    const double w = std::sqrt(q);
    return Intervals{{-w, w}};
  };
  r.max_section = 2 * R;
  r.boundary = revolve({{-kPi / 2, kPi / 2, [R](double a, double& rr, double& z, double& r_dr, double& dz) {
                           rr = R * std::cos(a);
                           z = R * std::sin(a);
                           r_dr = -R * R * std::cos(a) * std::sin(a);
                           dz = R * std::cos(a);
                         }}});
  return r;
}

RegionSpec make_koranyi_ball(double R) {
  if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
  RegionSpec r;
  r.name = "koranyi_ball";
  const double R2 = R * R, R4 = R2 * R2;
  r.Lx = r.Ly = R;
  r.Lz = R2 / 4;
  r.footprint = Footprint::Disk;
  r.fx = r.fy = R;
  r.section = [R4](double x, double y) {
    const double q = x * x + y * y;
    const double w = R4 - q * q;
    if (w <= 0.0) return Intervals{};
    const double h = std::sqrt(w) / 4;
    return Intervals{{-h, h}};
  };
  r.max_section = R2 / 2;
  // (r^4 + 16 z^2) = R^4 as r = R sqrt(cos a), z = R^2 sin(a) / 4.
  r.boundary = revolve({{-kPi / 2, kPi / 2, [R, R2](double a, double& rr, double& z, double& r_dr, double& dz) {
                           const double c = std::max(std::cos(a), 0.0);
                           rr = R * std::sqrt(c);
                           z = R2 * std::sin(a) / 4;
                           r_dr = -R2 * std::sin(a) / 2;
                           dz = R2 * c / 4;
                         }}});
  return r;
}

RegionSpec make_cylinder() {
  RegionSpec r;
  r.name = "cylinder";
  r.Lx = r.Ly = r.Lz = 1;
  r.footprint = Footprint::Disk;
  r.fx = r.fy = 1;
  r.section = [](double x, double y) { return x * x + y * y < 1 ? Intervals{{-1.0, 1.0}} : Intervals{}; };
  r.max_section = 2;
  r.boundary = revolve({flat_disk(-1, 1, false),
                        {-1, 1,
                         [](double s, double& rr, double& z, double& r_dr, double& dz) {
                           rr = 1;
                           z = s;
                           r_dr = 0;
                           dz = 1;
                         }},
                        flat_disk(1, 1, true)});
  return r;
}

RegionSpec make_paraboloid_cap() {
  RegionSpec r;
  r.name = "paraboloid_cap";
  const double rho = std::sqrt(2.0);
  r.Lx = r.Ly = rho;
  r.Lz = 1;
  r.footprint = Footprint::Disk;
  r.fx = r.fy = rho;
  r.section = [](double x, double y) {
    const double top = 1 - x * x - y * y;
    return top > -1 ? Intervals{{-1.0, top}} : Intervals{};
  };
  r.max_section = 2;
  r.boundary = revolve({flat_disk(-1, rho, false), {0, rho, [rho](double s, double& rr, double& z, double& r_dr, double& dz) {
                                                      rr = rho - s;
                                                      z = 1 - rr * rr;
                                                      r_dr = -rr;
                                                      dz = 2 * rr;
                                                    }}});
  return r;
}

std::vector<RegionSpec> region_library() {
  return {make_cube(1.0), make_euclidean_ball(1.0), make_koranyi_ball(1.0), make_cylinder(), make_paraboloid_cap()};
}

RegionSpec region_by_name(const std::string& name) {
  for (auto& r : region_library())
    if (r.name == name) return r;
  throw InvalidArgument("unknown region '" + name + "' (cube, euclidean_ball, koranyi_ball, cylinder, paraboloid_cap)");
}

namespace {

quad::Options inner_options(const PerimeterOptions& o) { return {o.abs_tol, o.rel_tol * 0.1, o.max_intervals, true}; }
quad::Options outer_options(const PerimeterOptions& o) { return {o.abs_tol, o.rel_tol, o.max_intervals, true}; }

template <class G>
double integrate_footprint(const RegionSpec& A, G&& g, const PerimeterOptions& opt) {
  const auto in = inner_options(opt), out = outer_options(opt);
  if (A.footprint == Footprint::Rect) {
    return quad::integrate(
               [&](double x) { return quad::integrate([&](double y) { return g(x, y); }, -A.fy, A.fy, in).value; }, -A.fx,
               A.fx, out)
        .value;
  }
  const double R = A.fx;
  return quad::integrate(
             [&](double th) {
               const double c = std::cos(th), s = std::sin(th);
               return quad::integrate([&](double r) { return r * g(r * c, r * s); }, 0.0, R, in).value;
             },
             0.0, 2 * kPi, out)
      .value;
}

void require_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("t must be positive and finite");
}

double saturation_scale(const RegionSpec& A) { return A.z_convex ? A.max_section / 2 : 2 * A.Lz; }

}  // namespace

double region_measure(const RegionSpec& A, const PerimeterOptions& opt) {
  return integrate_footprint(A, [&](double x, double y) { return total_length(A.section(x, y)); }, opt);
}

double vertical_perimeter(const RegionSpec& A, double t, const PerimeterOptions& opt) {
  require_t(t);
  return integrate_footprint(A, [&](double x, double y) { return exit_length(A.section(x, y), t); }, opt);
}

namespace {

// V and W over [log eps, 0] on shared nodes.
std::pair<double, double> coarse_pair(const RegionSpec& A, double eps, const PerimeterOptions& opt) {
  PerimeterOptions o = opt;
  quad::Options q{opt.abs_tol, std::max(1e-8, 100 * opt.rel_tol), opt.max_intervals, true};
  const auto r = quad::integrate_n<2>(
      [&](double u) {
        const double t = std::exp(u);
        const double v = vertical_perimeter(A, t, o);
        return quad::Values<2>{v / std::sqrt(t), v * v / t};
      },
      std::log(eps), 0.0, q);
  return {r.value[0], r.value[1]};
}

}  // namespace

double coarse_total_vertical_perimeter(const RegionSpec& A, double eps, const PerimeterOptions& opt) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  return coarse_pair(A, eps, opt).first;
}

double horizontal_perimeter_surface(const RegionSpec& A, GradientNorm norm, const PerimeterOptions& opt) {
  if (A.boundary.empty()) throw InvalidArgument("region '" + A.name + "' has no boundary parameterization");
  const auto in = inner_options(opt), out = outer_options(opt);
  double total = 0.0;
  for (const auto& p : A.boundary) {
    auto density = [&](double u, double v) {
      std::array<double, 3> P, N;
      p.eval(u, v, P, N);
      const double a = N[0], b = N[1] + P[0] * N[2];
      return norm == GradientNorm::L1 ? std::abs(a) + std::abs(b) : std::hypot(a, b);
    };
    total += quad::integrate(
                 [&](double v) { return quad::integrate([&](double u) { return density(u, v); }, p.u0, p.u1, in).value; },
                 p.v0, p.v1, out)
                 .value;
  }
  return total;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * kPi); }

// DFT of a periodic 1-D kernel given on offsets -M..M.
std::vector<std::complex<double>> kernel_spectrum(const std::vector<double>& ker, std::size_t n, std::size_t len) {
  const auto M = static_cast<std::ptrdiff_t>(ker.size() / 2);
  std::vector<std::complex<double>> out(len);
  for (std::size_t k = 0; k < len; ++k) {
    std::complex<double> s = 0.0;
    for (std::ptrdiff_t m = -M; m <= M; ++m) {
      const double ang = -2 * kPi * static_cast<double>(k) * static_cast<double>(m) / static_cast<double>(n);
      s += ker[static_cast<std::size_t>(m + M)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

}  // namespace

MollifiedResult horizontal_perimeter_mollified(const RegionSpec& A, GradientNorm norm, const MollifiedOptions& opt) {
  const double Lmax = std::max({A.Lx, A.Ly, A.Lz});
  if (opt.cells_per_axis < 96) throw InvalidArgument("mollified perimeter needs at least 96 cells per axis");
  const double sigma = opt.sigma > 0 ? opt.sigma : 4.0 * Lmax / static_cast<double>(opt.cells_per_axis - 80);
  const double g = sigma / 2;
  const double margin = 5.0 * 4.0 * sigma;
  auto cells = [&](double L) { return static_cast<std::size_t>(std::ceil(2 * (L + margin) / g)); };
  const std::size_t nx = cells(A.Lx), ny = cells(A.Ly), nz = cells(A.Lz);
  const double est = static_cast<double>(nx * ny * nz) * 8.0 * 6.0;
  if (est > 3e9) throw ResourceError("mollified grid too large", est);
  const double x0 = -0.5 * static_cast<double>(nx) * g, y0 = -0.5 * static_cast<double>(ny) * g,
               z0 = -0.5 * static_cast<double>(nz) * g;
  const std::size_t N = nx * ny * nz, nzc = nz / 2 + 1, NC = nx * ny * nzc;

  // Cell volume fractions: exact in z, 3x3 midpoint samples in (x, y).
  std::unique_ptr<double, FftwFree> f(fftw_alloc_real(N));
  std::unique_ptr<fftw_complex, FftwFree> F(fftw_alloc_complex(NC)), G(fftw_alloc_complex(NC));
  std::unique_ptr<double, FftwFree> dx(fftw_alloc_real(N)), dy(fftw_alloc_real(N)), dz(fftw_alloc_real(N));
  if (!f || !F || !G || !dx || !dy || !dz) throw ResourceError("mollified grid allocation failed", est);
  parallel::for_each(nx * ny, [&](std::size_t line) {
    const std::size_t i = line / ny, j = line % ny;
    double* col = f.get() + line * nz;
    std::fill(col, col + nz, 0.0);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double x = x0 + (static_cast<double>(i) + (a + 0.5) / 3.0) * g;
        const double y = y0 + (static_cast<double>(j) + (b + 0.5) / 3.0) * g;
        if (A.footprint == Footprint::Rect ? (std::abs(x) > A.fx || std::abs(y) > A.fy) : (x * x + y * y > A.fx * A.fx))
          continue;
        for (const auto& [lo, hi] : A.section(x, y)) {
          const auto k0 = static_cast<std::size_t>(std::max(0.0, std::floor((lo - z0) / g)));
          const auto k1 = std::min(nz - 1, static_cast<std::size_t>(std::floor((hi - z0) / g)));
          for (std::size_t k = k0; k <= k1; ++k) {
            const double c0 = z0 + static_cast<double>(k) * g;
            const double ov = std::min(hi, c0 + g) - std::max(lo, c0);
            if (ov > 0) col[k] += ov / g / 9.0;
          }
        }
      }
  });

  fftw_plan fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_3d(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), f.get(), F.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_3d(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), G.get(), dx.get(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);

  MollifiedResult res;
  res.spacing = g;
  for (int level = 0; level < 3; ++level) {
    const double s = sigma * static_cast<double>(4 >> level);
    res.sigma[static_cast<std::size_t>(level)] = s;
    const auto M = static_cast<std::ptrdiff_t>(std::ceil(5.0 * s / g));
    std::vector<double> W(static_cast<std::size_t>(2 * M + 1)), D(W.size());
    for (std::ptrdiff_t m = -M; m <= M; ++m) {
      const double lo = (static_cast<double>(m) - 0.5) * g / s, hi = (static_cast<double>(m) + 0.5) * g / s;
      W[static_cast<std::size_t>(m + M)] = normal_cdf(hi) - normal_cdf(lo);
      D[static_cast<std::size_t>(m + M)] = (normal_pdf(hi) - normal_pdf(lo)) / s;
    }
    const auto Wx = kernel_spectrum(W, nx, nx), Dx = kernel_spectrum(D, nx, nx);
    const auto Wy = kernel_spectrum(W, ny, ny), Dy = kernel_spectrum(D, ny, ny);
    const auto Wz = kernel_spectrum(W, nz, nzc), Dz = kernel_spectrum(D, nz, nzc);
    auto derivative = [&](const auto& kx, const auto& ky, const auto& kz, double* dst) {
      const double scale = 1.0 / static_cast<double>(N);
      parallel::for_each(nx * ny, [&](std::size_t line) {
        const std::size_t i = line / ny, j = line % ny;
        const std::complex<double> xy = kx[i] * ky[j] * scale;
        for (std::size_t k = 0; k < nzc; ++k) {
          const std::size_t c = line * nzc + k;
          const std::complex<double> v = std::complex<double>(F.get()[c][0], F.get()[c][1]) * xy * kz[k];
          G.get()[c][0] = v.real();
          G.get()[c][1] = v.imag();
        }
      });
      fftw_execute_dft_c2r(inv, G.get(), dst);
    };
    derivative(Dx, Wy, Wz, dx.get());
    derivative(Wx, Dy, Wz, dy.get());
    derivative(Wx, Wy, Dz, dz.get());
    const double total = parallel::sum(nx * ny, [&](std::size_t line) {
      const double x = x0 + (static_cast<double>(line / ny) + 0.5) * g;
      double acc = 0.0;
      for (std::size_t k = 0; k < nz; ++k) {
        const std::size_t c = line * nz + k;
        const double a = dx.get()[c], b = dy.get()[c] + x * dz.get()[c];
        acc += norm == GradientNorm::L1 ? std::abs(a) + std::abs(b) : std::hypot(a, b);
      }
      return acc;
    });
    res.raw[static_cast<std::size_t>(level)] = total * g * g * g;
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  // raw = P0 + a s + b s^2 at s, 2s, 4s (stored 4s, 2s, s).
  const double p4 = res.raw[0], p2 = res.raw[1], p1 = res.raw[2];
  const double d_coarse = std::abs(p2 - p4), d_fine = std::abs(p1 - p2);
  if (d_fine > d_coarse && d_fine > 1e-12 * std::abs(p1))
    throw ConvergenceError("mollified perimeter does not settle as the width shrinks", p2, p1);
  res.value = (8 * p1 - 6 * p2 + p4) / 3;
  return res;
}

double horizontal_perimeter(const RegionSpec& A, GradientNorm norm, PerimeterMethod method) {
  return method == PerimeterMethod::Surface ? horizontal_perimeter_surface(A, norm) : horizontal_perimeter_mollified(A, norm).value;
}

double vertical_p_variant(const RegionSpec& A, double p, const PerimeterOptions& opt) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("p must be finite and >= 1");
  const double ts = saturation_scale(A);
  const double mu = region_measure(A, opt);
  quad::Options q{opt.abs_tol, std::max(1e-8, 100 * opt.rel_tol), opt.max_intervals, true};
  const double body =
      quad::integrate([&](double t) { return std::pow(vertical_perimeter(A, t, opt), p) * std::pow(t, -1 - p / 2); }, 0.0, ts, q).value;
  const double tail = std::pow(mu, p) * (2 / p) * std::pow(ts, -p / 2);
  return std::pow(body + tail, 1 / p);
}

PerimeterReport conjecture_report(const RegionSpec& A, const std::vector<double>& eps_list, const PerimeterOptions& opt) {
  for (double e : eps_list)
    if (!(e > 0.0) || !(e < 0.5)) throw InvalidArgument("eps values must lie in (0, 1/2)");
  PerimeterReport r;
  r.region = A.name;
  r.measure = region_measure(A, opt);
  r.t_saturation = saturation_scale(A);
  for (int i = -12; i <= 1; ++i) {
    const double t = r.t_saturation * std::pow(2.0, i);
    r.t_grid.push_back(t);
    r.v_t.push_back(vertical_perimeter(A, t, opt));
  }
  r.per_l1 = horizontal_perimeter_surface(A, GradientNorm::L1, opt);
  r.per_l2 = horizontal_perimeter_surface(A, GradientNorm::L2, opt);
  const double p2 = vertical_p_variant(A, 2.0, opt);
  r.sq_integral = p2 * p2;
  r.p2_variant = p2;
  r.p4_variant = vertical_p_variant(A, 4.0, opt);
  r.sigma2_l1 = r.sq_integral / (r.per_l1 * r.per_l1);
  r.sigma2_l2 = r.sq_integral / (r.per_l2 * r.per_l2);

  // sup_t v_t / sqrt(t) lies in (0, t_sat]: scan in log t, then golden section.
  auto phi = [&](double lt) { return vertical_perimeter(A, std::exp(lt), opt) * std::exp(-lt / 2); };
  const double lo = std::log(r.t_saturation) - 12 * std::log(2.0), hi = std::log(r.t_saturation);
  const int steps = 96;
  int best = 0;
  std::vector<double> vals(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    vals[static_cast<std::size_t>(i)] = phi(lo + (hi - lo) * i / steps);
    if (vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(best)]) best = i;
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / steps, b = lo + (hi - lo) * std::min(best + 1, steps) / steps;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = b - gr * (b - a), d = a + gr * (b - a), fc = phi(c), fd = phi(d);
  for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = phi(d);
    }
  }
  const double lt = fc > fd ? c : d;
  r.sup_proxy = std::max({fc, fd, vals[static_cast<std::size_t>(best)]});
  r.sup_proxy_t = r.sup_proxy == vals[static_cast<std::size_t>(best)] ? std::exp(lo + (hi - lo) * best / steps) : std::exp(lt);

  for (double e : eps_list) {
    EpsRow row;
    row.eps = e;
    row.log_inv_eps = std::log(1 / e);
    std::tie(row.V, row.W) = coarse_pair(A, e, opt);
    row.cs_bound = std::sqrt(row.log_inv_eps * row.W);
    row.cs_holds = row.V <= row.cs_bound * (1 + 1e-8);
    row.rho_l1 = row.V / (std::sqrt(row.log_inv_eps) * r.per_l1);
    row.rho_l2 = row.V / (std::sqrt(row.log_inv_eps) * r.per_l2);
    r.rows.push_back(row);
  }
  return r;
}

namespace {

double box_volume(const RegionSpec& A) { return 8 * A.Lx * A.Ly * A.Lz; }

bool in_sections(const Intervals& s, double z) {
  for (const auto& [a, b] : s)
    if (z >= a && z <= b) return true;
  return false;
}

bool exits(const RegionSpec& A, double x, double y, double z, double t) {
  if (A.footprint == Footprint::Rect ? (std::abs(x) > A.fx || std::abs(y) > A.fy) : (x * x + y * y > A.fx * A.fx)) return false;
  const auto s = A.section(x, y);
  return in_sections(s, z) && (!in_sections(s, z + t) || !in_sections(s, z - t));
}

MonteCarloEstimate bernoulli(double scale, double hits, std::uint64_t n) {
  const double p = hits / static_cast<double>(n);
  return {scale * p, scale * std::sqrt(p * (1 - p) / static_cast<double>(n)), n};
}

}  // namespace

MonteCarloEstimate vertical_perimeter_mc(const RegionSpec& A, double t, std::uint64_t samples, std::uint64_t seed) {
  require_t(t);
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const CounterRng rng{seed};
  const double hits = parallel::sum(samples, [&](std::size_t i) {
    const double x = A.Lx * (2 * rng.uniform(3 * i) - 1), y = A.Ly * (2 * rng.uniform(3 * i + 1) - 1),
                 z = A.Lz * (2 * rng.uniform(3 * i + 2) - 1);
    return exits(A, x, y, z, t) ? 1.0 : 0.0;
  });
  return bernoulli(box_volume(A), hits, samples);
}

MonteCarloEstimate coarse_total_vertical_perimeter_mc(const RegionSpec& A, double eps, std::uint64_t samples, std::uint64_t seed) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const CounterRng rng{seed};
  const double r0 = 1 / std::sqrt(eps);
  const double Z = 2 * (r0 - 1);
  const double hits = parallel::sum(samples, [&](std::size_t i) {
    const double u = rng.uniform(4 * i);
    const double root = r0 - u * (r0 - 1);
    const double t = 1 / (root * root);
    const double x = A.Lx * (2 * rng.uniform(4 * i + 1) - 1), y = A.Ly * (2 * rng.uniform(4 * i + 2) - 1),
                 z = A.Lz * (2 * rng.uniform(4 * i + 3) - 1);
    return exits(A, x, y, z, t) ? 1.0 : 0.0;
  });
  return bernoulli(Z * box_volume(A), hits, samples);
}

void write_report_csv(std::ostream& os, const std::vector<PerimeterReport>& reports) {
  os << "region,kind,param,log_inv_eps,V_eps,rho_l1,rho_l2,v_t\n";
  os.precision(17);
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.t_grid.size(); ++i) os << r.region << ",t," << r.t_grid[i] << ",,,,," << r.v_t[i] << "\n";
    for (const auto& e : r.rows)
      os << r.region << ",eps," << e.eps << "," << e.log_inv_eps << "," << e.V << "," << e.rho_l1 << "," << e.rho_l2 << ",\n";
  }
}

std::string to_string(GradientNorm n) { return n == GradientNorm::L1 ? "l1" : "l2"; }
std::string to_string(PerimeterMethod m) { return m == PerimeterMethod::Surface ? "surface" : "mollified"; }

}  // namespace heis
