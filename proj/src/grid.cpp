#include "heislab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"

namespace heis {

static_assert(std::endian::native == std::endian::little, "grid serialization assumes a little-endian host");

void GridSpec::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) throw InvalidArgument("grid needs at least one cell per axis");
  if (!(Lx > 0) || !(Ly > 0) || !(Lz > 0) || !std::isfinite(Lx) || !std::isfinite(Ly) || !std::isfinite(Lz))
    throw InvalidArgument("grid half-widths must be positive and finite");
  if (static_cast<double>(nx) * static_cast<double>(ny) * static_cast<double>(nz) > 2e9)
    throw ResourceError("grid too large", static_cast<double>(nx) * static_cast<double>(ny) * static_cast<double>(nz) * 8.0);
}

GridFunction::GridFunction(const GridSpec& spec, int dim) : spec_(spec), dim_(dim) {
  spec.validate();
  if (dim < 1) throw InvalidArgument("grid function dimension must be >= 1");
  data_.assign(spec.cells() * static_cast<std::size_t>(dim), 0.0);
}

GridFunction GridFunction::sample(const GridSpec& spec, int dim, const PointFunction& f) {
  GridFunction g(spec, dim);
  parallel::for_each(spec.nx * spec.ny, [&](std::size_t line) {
    const std::size_t i = line / spec.ny, j = line % spec.ny;
    for (std::size_t k = 0; k < spec.nz; ++k) {
      auto out = g.at(g.cell(i, j, k));
      f(spec.x(i), spec.y(j), spec.z(k), out);
    }
  });
  for (double v : g.data_)
    if (!std::isfinite(v)) throw InvalidArgument("grid function has a non-finite sample");
  return g;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

void GridFunction::check_compact_support(double rel_tol) const {
  const double limit = rel_tol * max_abs();
  const auto& s = spec_;
  auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
    for (double v : at(cell(i, j, k)))
      if (std::abs(v) > limit)
        throw BoundaryContamination("grid function does not vanish on the outer cell layer (cell " + std::to_string(i) + "," +
                                    std::to_string(j) + "," + std::to_string(k) + ")");
  };
  for (std::size_t i = 0; i < s.nx; ++i)
    for (std::size_t j = 0; j < s.ny; ++j) {
      const bool edge_xy = i == 0 || j == 0 || i + 1 == s.nx || j + 1 == s.ny;
      if (edge_xy) {
        for (std::size_t k = 0; k < s.nz; ++k) check(i, j, k);
      } else {
        check(i, j, 0);
        check(i, j, s.nz - 1);
      }
    }
}

GridFunction GridFunction::coarsen() const {
  const auto& s = spec_;
  if (s.nx % 2 || s.ny % 2 || s.nz % 2) throw InvalidArgument("coarsening needs even cell counts");
  GridSpec c = s;
  c.nx /= 2;
  c.ny /= 2;
  c.nz /= 2;
  GridFunction g(c, dim_);
  parallel::for_each(c.nx * c.ny, [&](std::size_t line) {
    const std::size_t i = line / c.ny, j = line % c.ny;
    for (std::size_t k = 0; k < c.nz; ++k)
      for (int d = 0; d < dim_; ++d) {
        double sum = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t e = 0; e < 2; ++e) sum += (*this)(2 * i + a, 2 * j + b, 2 * k + e, d);
        g(i, j, k, d) = sum / 8.0;
      }
  });
  return g;
}

void GridFunction::scale(double s) {
  for (double& v : data_) v *= s;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw InvalidArgument("grid file truncated");
  return v;
}

}  // namespace

void write_grid(std::ostream& os, const GridFunction& f) {
  const auto& s = f.spec();
  os.write("HEISGRID", 8);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.dim()));
  for (std::size_t n : {s.nx, s.ny, s.nz}) put<std::uint64_t>(os, n);
  for (double v : {s.Lx, s.Ly, s.Lz, s.hx(), s.hy(), s.hz()}) put<double>(os, v);
  os.write(reinterpret_cast<const char*>(f.data().data()), static_cast<std::streamsize>(f.data().size() * sizeof(double)));
}

GridFunction read_grid(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, "HEISGRID", 8) != 0) throw InvalidArgument("not a grid file");
  if (get<std::uint32_t>(is) != 1) throw InvalidArgument("unsupported grid file version");
  const auto dim = get<std::uint32_t>(is);
  GridSpec s;
  s.nx = get<std::uint64_t>(is);
  s.ny = get<std::uint64_t>(is);
  s.nz = get<std::uint64_t>(is);
  s.Lx = get<double>(is);
  s.Ly = get<double>(is);
  s.Lz = get<double>(is);
  const double hx = get<double>(is), hy = get<double>(is), hz = get<double>(is);
  if (hx != s.hx() || hy != s.hy() || hz != s.hz()) throw InvalidArgument("grid file spacing inconsistent with box and counts");
  GridFunction f(s, static_cast<int>(dim));
  if (!is.read(reinterpret_cast<char*>(f.data().data()), static_cast<std::streamsize>(f.data().size() * sizeof(double))))
    throw InvalidArgument("grid file truncated");
  return f;
}

double Bump::operator()(double x, double y, double z) const {
  auto w = [](double u) { return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0; };
  const double X = x / R, Y = y / R, Z = z / Rz;
  switch (family) {
    case BumpFamily::Product: return amplitude * w(X * X) * w(Y * Y) * w(Z * Z);
    case BumpFamily::Koranyi: {
      const double r2 = X * X + Y * Y;
      return amplitude * w(r2 * r2 + 16.0 * Z * Z);
    }
    case BumpFamily::Euclidean: return amplitude * w(X * X + Y * Y + Z * Z);
    case BumpFamily::Gaussian: return amplitude * std::exp(-0.5 * (X * X + Y * Y + Z * Z));
  }
  return 0.0;
}

BumpFamily bump_family_from(const std::string& s) {
  if (s == "product") return BumpFamily::Product;
  if (s == "koranyi") return BumpFamily::Koranyi;
  if (s == "euclidean") return BumpFamily::Euclidean;
  if (s == "gaussian") return BumpFamily::Gaussian;
  throw InvalidArgument("unknown bump family '" + s + "'");
}

std::string to_string(BumpFamily f) {
  switch (f) {
    case BumpFamily::Product: return "product";
    case BumpFamily::Koranyi: return "koranyi";
    case BumpFamily::Euclidean: return "euclidean";
    case BumpFamily::Gaussian: return "gaussian";
  }
  return "?";
}

}  // namespace heis
