#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace heis {

/// Uniform cell-centred grid on [-Lx,Lx] x [-Ly,Ly] x [-Lz,Lz] in the global
/// coordinates (x, y, z) of c^z b^y a^x. Haar measure is Lebesgue, so every
/// cell has measure hx*hy*hz.
struct GridSpec {
  std::size_t nx = 0, ny = 0, nz = 0;
  double Lx = 1.0, Ly = 1.0, Lz = 1.0;

  double hx() const { return 2.0 * Lx / static_cast<double>(nx); }
  double hy() const { return 2.0 * Ly / static_cast<double>(ny); }
  double hz() const { return 2.0 * Lz / static_cast<double>(nz); }
  double x(std::size_t i) const { return -Lx + (static_cast<double>(i) + 0.5) * hx(); }
  double y(std::size_t j) const { return -Ly + (static_cast<double>(j) + 0.5) * hy(); }
  double z(std::size_t k) const { return -Lz + (static_cast<double>(k) + 0.5) * hz(); }
  double cell_measure() const { return hx() * hy() * hz(); }
  std::size_t cells() const { return nx * ny * nz; }
  void validate() const;
};

using PointFunction = std::function<void(double x, double y, double z, std::span<double> out)>;

/// Samples stored z-fastest: ((i*ny + j)*nz + k)*dim + c.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(const GridSpec& spec, int dim);

  static GridFunction sample(const GridSpec& spec, int dim, const PointFunction& f);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  std::size_t cell(std::size_t i, std::size_t j, std::size_t k) const { return (i * spec_.ny + j) * spec_.nz + k; }
  std::span<double> at(std::size_t cell) { return {data_.data() + cell * dim_, static_cast<std::size_t>(dim_)}; }
  std::span<const double> at(std::size_t cell) const { return {data_.data() + cell * dim_, static_cast<std::size_t>(dim_)}; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k, int c = 0) { return data_[cell(i, j, k) * dim_ + c]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k, int c = 0) const { return data_[cell(i, j, k) * dim_ + c]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const;
  bool is_zero() const;
  /// Throws BoundaryContamination if the outermost cell layer carries more
  /// than rel_tol * max |f|.
  void check_compact_support(double rel_tol = 1e-10) const;
  /// 2x2x2 block average onto the grid with half the cells per axis.
  GridFunction coarsen() const;
  void scale(double s);

 private:
  GridSpec spec_;
  int dim_ = 0;
  std::vector<double> data_;
};

/// Binary layout, little-endian: "HEISGRID", u32 version (1), u32 dim,
/// u64 nx ny nz, f64 Lx Ly Lz, f64 hx hy hz, then nx*ny*nz*dim f64 values in
/// the storage order above.
void write_grid(std::ostream& os, const GridFunction& f);
GridFunction read_grid(std::istream& is);

enum class BumpFamily { Product, Koranyi, Euclidean, Gaussian };

/// Smooth test functions. R is the horizontal scale and Rz the vertical one;
/// the dilation (x, y, z) -> (l x, l y, l^2 z) maps (R, Rz) to (R/l, Rz/l^2).
struct Bump {
  BumpFamily family = BumpFamily::Product;
  double R = 1.0;
  double Rz = 1.0;
  double amplitude = 1.0;

  double operator()(double x, double y, double z) const;
  Bump dilated(double lambda) const { return {family, R / lambda, Rz / (lambda * lambda), amplitude}; }
};

BumpFamily bump_family_from(const std::string& s);
std::string to_string(BumpFamily f);

}  // namespace heis
