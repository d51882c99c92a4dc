#include "heislab/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"

namespace heis {

namespace {

double abs_pow(double v, double p) {
  const double a = std::abs(v);
  return p == 2.0 ? a * a : std::pow(a, p);
}

bool line_is_zero(const GridFunction& f, std::size_t line) {
  const std::size_t len = f.spec().nz * static_cast<std::size_t>(f.dim());
  const double* v = f.data().data() + line * len;
  return std::all_of(v, v + len, [](double x) { return x == 0.0; });
}

std::vector<std::size_t> nonzero_lines(const GridFunction& f) {
  const std::size_t lines = f.spec().nx * f.spec().ny;
  std::vector<char> flag(lines);
  parallel::for_each(lines, [&](std::size_t l) { flag[l] = !line_is_zero(f, l); });
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < lines; ++l)
    if (flag[l]) out.push_back(l);
  return out;
}

GridFunction gradient_unchecked(const GridFunction& f) {
  const auto& s = f.spec();
  const int d = f.dim();
  GridFunction g(s, 2 * d);
  const double ihx = 0.5 / s.hx(), ihy = 0.5 / s.hy(), ihz = 0.5 / s.hz();
  auto val = [&](std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, int c) {
    if (i < 0 || j < 0 || k < 0 || i >= static_cast<std::ptrdiff_t>(s.nx) || j >= static_cast<std::ptrdiff_t>(s.ny) ||
        k >= static_cast<std::ptrdiff_t>(s.nz))
      return 0.0;
    return f(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k), c);
  };
  parallel::for_each(s.nx * s.ny, [&](std::size_t line) {
    const auto i = static_cast<std::ptrdiff_t>(line / s.ny), j = static_cast<std::ptrdiff_t>(line % s.ny);
    const double x = s.x(static_cast<std::size_t>(i));
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(s.nz); ++k)
      for (int c = 0; c < d; ++c) {
        const double dx = (val(i + 1, j, k, c) - val(i - 1, j, k, c)) * ihx;
        const double dy = (val(i, j + 1, k, c) - val(i, j - 1, k, c)) * ihy;
        const double dz = (val(i, j, k + 1, c) - val(i, j, k - 1, c)) * ihz;
        const std::size_t cell = g.cell(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        g.at(cell)[c] = dx;
        g.at(cell)[d + c] = dy + x * dz;
      }
  });
  return g;
}

// Sum over cells of ||F(z + t) - f(z)||_p^p on the given lines, F the
// piecewise-linear interpolant of the z-samples (zero past the ends).
double increment_on_lines(const GridFunction& f, const std::vector<std::size_t>& lines, double t, double p) {
  const auto& s = f.spec();
  const auto nz = static_cast<std::ptrdiff_t>(s.nz);
  const int d = f.dim();
  const double shift = t / s.hz();
  const auto m = static_cast<std::ptrdiff_t>(std::floor(shift));
  const double theta = shift - static_cast<double>(m);
  const double sum = parallel::sum(lines.size(), [&](std::size_t li) {
    const double* v = f.data().data() + lines[li] * s.nz * static_cast<std::size_t>(d);
    auto at = [&](std::ptrdiff_t k, int c) { return (k < 0 || k >= nz) ? 0.0 : v[k * d + c]; };
    double acc = 0.0;
    auto term = [&](std::ptrdiff_t k) {
      for (int c = 0; c < d; ++c) {
        const double moved = (1.0 - theta) * at(k + m, c) + theta * at(k + m + 1, c);
        acc += abs_pow(moved - at(k, c), p);
      }
    };
    // k < 0 only sees the shifted copy; k + m + 1 >= 0 is needed for it to be nonzero.
    for (std::ptrdiff_t k = -m - 1; k <= std::min<std::ptrdiff_t>(-1, nz - 1 - m); ++k) term(k);
    for (std::ptrdiff_t k = 0; k < nz; ++k) term(k);
    return acc;
  });
  return sum * s.cell_measure();
}

void validate_t_grid(const std::vector<double>& t, const GridSpec& s) {
  if (t.size() < 2) throw InvalidArgument("t grid needs at least two points");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i])) throw InvalidArgument("t grid values must be positive and finite");
    if (i && !(t[i] > t[i - 1])) throw InvalidArgument("t grid must be strictly increasing");
  }
  if (t.back() > 2.0 * s.Lz) throw BoundaryContamination("t grid exceeds the box height 2*Lz");
}

// Trapezoid weights in log t.
std::vector<double> log_trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = std::log(t[i + 1] / t[i]);
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

VerticalResult vertical_unchecked(const GridFunction& f, double p, double q, const std::vector<double>& t) {
  VerticalResult r;
  const auto lines = nonzero_lines(f);
  if (lines.empty()) {
    r.large_tail_exact = true;
    return r;
  }
  const auto w = log_trapezoid_weights(t);
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    g[i] = std::pow(increment_on_lines(f, lines, t[i], p), q / p) * std::pow(t[i], -q / 2.0);
  std::vector<double> terms(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) terms[i] = w[i] * g[i];
  r.bulk = parallel::pairwise_sum(terms);
  // Below one cell the interpolated increment is exactly (t/hz)^p I(hz), so
  // this is exact whenever tmin <= hz.
  r.small_tail = 2.0 / q * g.front();
  const double mass = parallel::sum(f.data().size(), [&](std::size_t i) { return abs_pow(f.data()[i], p); });
  const double limit = 2.0 * mass * f.spec().cell_measure();
  r.large_tail = 2.0 / q * std::pow(limit, q / p) * std::pow(t.back(), -q / 2.0);

  std::ptrdiff_t extent = 0;
  const auto& s = f.spec();
  for (std::size_t l : lines) {
    const double* v = f.data().data() + l * s.nz * static_cast<std::size_t>(f.dim());
    std::ptrdiff_t lo = -1, hi = -1;
    for (std::size_t k = 0; k < s.nz * static_cast<std::size_t>(f.dim()); ++k)
      if (v[k] != 0.0) {
        const auto kk = static_cast<std::ptrdiff_t>(k / static_cast<std::size_t>(f.dim()));
        if (lo < 0) lo = kk;
        hi = kk;
      }
    extent = std::max(extent, hi - lo + 1);
  }
  r.large_tail_exact = t.back() >= static_cast<double>(extent + 1) * s.hz();
  r.value = std::pow(r.bulk + r.small_tail + r.large_tail, 1.0 / q);
  return r;
}

double horizontal_unchecked(const GridFunction& f, double p) {
  const auto g = gradient_unchecked(f);
  const double s = parallel::sum(g.data().size(), [&](std::size_t i) { return abs_pow(g.data()[i], p); });
  return std::pow(s * f.spec().cell_measure(), 1.0 / p);
}

bool can_coarsen(const GridSpec& s) {
  return s.nx % 2 == 0 && s.ny % 2 == 0 && s.nz % 2 == 0 && s.nx >= 8 && s.ny >= 8 && s.nz >= 8;
}

void require_exponent(double p, const char* what) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument(std::string(what) + " must be finite and >= 1");
}

}  // namespace

GridFunction horizontal_gradient(const GridFunction& f) {
  f.check_compact_support();
  return gradient_unchecked(f);
}

GridFunction center_convolve(const GridFunction& f, const KernelFamily& k, double tail_tol) {
  if (!(tail_tol > 0.0)) throw InvalidArgument("tail tolerance must be positive");
  if (!(k.t > 0.0) || !std::isfinite(k.t)) throw InvalidArgument("kernel scale t must be positive and finite");
  const auto& s = f.spec();
  const double h = s.hz();
  const double U = k.truncation_radius(tail_tol);
  const auto M = static_cast<std::ptrdiff_t>(std::min<double>(std::ceil(U / h - 0.5), static_cast<double>(s.nz - 1)));
  std::vector<double> w(static_cast<std::size_t>(2 * M + 1));
  for (std::ptrdiff_t m = -M; m <= M; ++m)
    w[static_cast<std::size_t>(m + M)] = k.primitive((static_cast<double>(m) + 0.5) * h) - k.primitive((static_cast<double>(m) - 0.5) * h);

  GridFunction out(s, f.dim());
  const int d = f.dim();
  const auto nz = static_cast<std::ptrdiff_t>(s.nz);
  parallel::for_each(s.nx * s.ny, [&](std::size_t line) {
    if (line_is_zero(f, line)) return;
    const double* src = f.data().data() + line * s.nz * static_cast<std::size_t>(d);
    double* dst = out.data().data() + line * s.nz * static_cast<std::size_t>(d);
    for (std::ptrdiff_t kz = 0; kz < nz; ++kz) {
      const std::ptrdiff_t lo = std::max(-M, kz - (nz - 1)), hi = std::min(M, kz);
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t m = lo; m <= hi; ++m) acc += w[static_cast<std::size_t>(m + M)] * src[(kz - m) * d + c];
        dst[kz * d + c] = acc;
      }
    }
  });
  return out;
}

std::vector<double> log_grid(double tmin, double tmax, int per_decade) {
  if (!(tmin > 0.0) || !(tmax > tmin) || per_decade < 1) throw InvalidArgument("log grid needs 0 < tmin < tmax and per_decade >= 1");
  const double decades = std::log10(tmax / tmin);
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(decades * per_decade)) + 1);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = tmin * std::pow(tmax / tmin, static_cast<double>(i) / static_cast<double>(n - 1));
  t.back() = tmax;
  return t;
}

std::vector<double> default_vertical_grid(const GridSpec& spec) {
  return log_grid(spec.hz(), 2.0 * spec.Lz - spec.hz(), 48);
}

double vertical_increment(const GridFunction& f, double t, double p) {
  require_exponent(p, "p");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("shift t must be finite and >= 0");
  return increment_on_lines(f, nonzero_lines(f), t, p);
}

VerticalResult vertical_lhs_continuous(const GridFunction& f, double p, double q, const std::vector<double>& t_grid) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  const auto t = t_grid.empty() ? default_vertical_grid(f.spec()) : t_grid;
  validate_t_grid(t, f.spec());
  f.check_compact_support();
  auto r = vertical_unchecked(f, p, q, t);
  if (can_coarsen(f.spec()) && r.value > 0.0) {
    const auto coarse = vertical_unchecked(f.coarsen(), p, q, t);
    r.error_bar = std::abs(r.value - coarse.value) / 3.0;
    r.has_error_bar = true;
  }
  return r;
}

HorizontalResult horizontal_rhs_continuous(const GridFunction& f, double p) {
  require_exponent(p, "p");
  f.check_compact_support();
  HorizontalResult r;
  r.value = horizontal_unchecked(f, p);
  if (can_coarsen(f.spec()) && r.value > 0.0) {
    r.error_bar = std::abs(r.value - horizontal_unchecked(f.coarsen(), p)) / 3.0;
    r.has_error_bar = true;
  }
  return r;
}

GFunctionResult g_function(const GridFunction& f, double q, const std::vector<double>& t_grid, double p_norm,
                           double tail_tol) {
  if (!(q >= 2.0) || !std::isfinite(q)) throw InvalidArgument("g-function needs finite q >= 2");
  require_exponent(p_norm, "norm exponent");
  validate_t_grid(t_grid, f.spec());
  f.check_compact_support();
  const auto& s = f.spec();
  const std::size_t cells = s.cells();
  const auto w = log_trapezoid_weights(t_grid);
  std::vector<double> acc(cells, 0.0), tails(cells, 0.0);
  auto component_norm_q = [&](const GridFunction& v, std::size_t cell) {
    double s2 = 0.0;
    for (double x : v.at(cell)) s2 += x * x;
    return std::pow(s2, q / 2.0);
  };
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const auto conv = center_convolve(f, KernelFamily{KernelKind::Q, t}, tail_tol);
    const double tq = std::pow(t, q);
    const bool end = i == 0 || i + 1 == t_grid.size();
    parallel::for_each(cells, [&](std::size_t c) {
      const double v = tq * component_norm_q(conv, c);
      acc[c] += w[i] * v;
      if (end) tails[c] += v / q;
    });
  }
  GFunctionResult r{GridFunction(s, 1), 0.0, 0.0};
  for (std::size_t c = 0; c < cells; ++c) {
    const double total = acc[c] + tails[c];
    r.g.data()[c] = std::pow(total, 1.0 / q);
    if (total > 0.0) r.tail_fraction = std::max(r.tail_fraction, tails[c] / total);
  }
  const double gp = parallel::sum(cells, [&](std::size_t c) { return std::pow(r.g.data()[c], p_norm); });
  const double fp = parallel::sum(cells, [&](std::size_t c) {
    double s2 = 0.0;
    for (double x : f.at(c)) s2 += x * x;
    return std::pow(s2, p_norm / 2.0);
  });
  r.norm_ratio = fp > 0.0 ? std::pow(gp / fp, 1.0 / p_norm) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

ContinuousReport continuous_inequality_report(const GridFunction& f, double p, double q, const std::vector<double>& t_grid) {
  require_exponent(p, "p");
  if (!(q >= 2.0) || !std::isfinite(q)) throw InvalidArgument("q must be finite and >= 2");
  if (p > q) throw InvalidArgument("need p <= q");
  ContinuousReport r;
  r.base.p = p;
  r.base.q = q;
  r.base.radius_multiplier = 0;
  r.outside_theorem = p <= 1.0;
  r.vertical = vertical_lhs_continuous(f, p, q, t_grid);
  r.horizontal = horizontal_rhs_continuous(f, p);
  r.base.lhs = r.vertical.value;
  r.base.rhs = r.horizontal.value;
  r.base.tail = r.vertical.small_tail + r.vertical.large_tail;
  if (f.is_zero()) {
    r.degenerate = true;
    r.base.ratio = std::numeric_limits<double>::quiet_NaN();
    r.ratio_error = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.base.ratio = r.base.lhs / r.base.rhs;
  const double el = r.vertical.error_bar / r.base.lhs, er = r.horizontal.error_bar / r.base.rhs;
  r.ratio_error = r.base.ratio * std::sqrt(el * el + er * er);
  return r;
}

}  // namespace heis
