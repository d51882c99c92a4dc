#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace heis {

/// Sorted, disjoint z-intervals [lo, hi].
using Intervals = std::vector<std::pair<double, double>>;

double total_length(const Intervals& s);
Intervals intersect(const Intervals& a, const Intervals& b);
Intervals shifted(const Intervals& s, double u);

/// Boundary patch over [u0,u1] x [v0,v1]: eval gives the point P and the
/// outward normal N = P_u x P_v (not normalized, so |N| du dv = dsigma).
struct Patch {
  double u0 = 0, u1 = 1, v0 = 0, v1 = 1;
  std::function<void(double u, double v, std::array<double, 3>& P, std::array<double, 3>& N)> eval;
};

enum class Footprint { Rect, Disk };

/// A bounded region given by its z-sections over a horizontal footprint.
struct RegionSpec {
  std::string name;
  double Lx = 1, Ly = 1, Lz = 1;  // bounding half-widths about the origin
  Footprint footprint = Footprint::Rect;
  double fx = 1, fy = 1;          // Rect: |x| <= fx, |y| <= fy. Disk: radius fx.
  std::function<Intervals(double x, double y)> section;
  std::vector<Patch> boundary;
  bool z_convex = true;
  double max_section = 0;         // sup over (x, y) of the section length

  bool contains(double x, double y, double z) const;
  /// Image under (x, y, z) -> (l x, l y, l^2 z).
  RegionSpec dilated(double lambda) const;
  /// Image under right or left multiplication by c^u.
  RegionSpec translated_vertically(double u) const;
};

RegionSpec make_cube(double side);
RegionSpec make_euclidean_ball(double radius = 1.0);
RegionSpec make_koranyi_ball(double radius = 1.0);
RegionSpec make_cylinder();
RegionSpec make_paraboloid_cap();
std::vector<RegionSpec> region_library();
RegionSpec region_by_name(const std::string& name);

struct PerimeterOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_intervals = 4000;
};

/// |sec| - |sec ∩ (sec - t) ∩ (sec + t)|: the part that leaves under c^t or c^-t.
double exit_length(const Intervals& section, double t);

double region_measure(const RegionSpec& A, const PerimeterOptions& opt = {});
double vertical_perimeter(const RegionSpec& A, double t, const PerimeterOptions& opt = {});
/// integral_eps^1 v_t / t^{3/2} dt, adaptive in log t.
double coarse_total_vertical_perimeter(const RegionSpec& A, double eps, const PerimeterOptions& opt = {});

enum class GradientNorm { L1, L2 };
enum class PerimeterMethod { Surface, Mollified };

struct MollifiedOptions {
  double sigma = 0;           // smallest width; 0 picks one from the box and cells_per_axis
  std::size_t cells_per_axis = 192;
};

struct MollifiedResult {
  double value = 0;                    // extrapolated to zero width
  std::array<double, 3> sigma{};       // 4s, 2s, s
  std::array<double, 3> raw{};         // values at those widths
  double spacing = 0;
};

double horizontal_perimeter_surface(const RegionSpec& A, GradientNorm norm, const PerimeterOptions& opt = {});
MollifiedResult horizontal_perimeter_mollified(const RegionSpec& A, GradientNorm norm, const MollifiedOptions& opt = {});
double horizontal_perimeter(const RegionSpec& A, GradientNorm norm, PerimeterMethod method);

struct EpsRow {
  double eps = 0;
  double log_inv_eps = 0;
  double V = 0;              // coarse total vertical perimeter
  double W = 0;              // integral_eps^1 v_t^2 / t^2 dt on the same nodes
  double cs_bound = 0;       // sqrt(log(1/eps) * W)
  bool cs_holds = false;     // V <= cs_bound (1 + 1e-8)
  double rho_l1 = 0, rho_l2 = 0;
};

struct PerimeterReport {
  std::string region;
  double measure = 0;
  double t_saturation = 0;   // v_t = measure for t >= this
  std::vector<double> t_grid, v_t;
  double per_l1 = 0, per_l2 = 0;
  double sq_integral = 0;    // integral_0^inf v_t^2 / t^2 dt
  double sigma2_l1 = 0, sigma2_l2 = 0;
  double p2_variant = 0, p4_variant = 0;
  double sup_proxy = 0, sup_proxy_t = 0;  // sup_t v_t / sqrt(t) and where
  std::vector<EpsRow> rows;
};

/// (integral_0^inf v_t^p / t^{1 + p/2} dt)^{1/p}, split at saturation with the tail in closed form.
double vertical_p_variant(const RegionSpec& A, double p, const PerimeterOptions& opt = {});

PerimeterReport conjecture_report(const RegionSpec& A, const std::vector<double>& eps_list, const PerimeterOptions& opt = {});

struct MonteCarloEstimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
};

/// v_t by uniform sampling of the bounding box.
MonteCarloEstimate vertical_perimeter_mc(const RegionSpec& A, double t, std::uint64_t samples, std::uint64_t seed);
/// V^(eps) with t drawn from the density proportional to t^{-3/2} on [eps, 1].
MonteCarloEstimate coarse_total_vertical_perimeter_mc(const RegionSpec& A, double eps, std::uint64_t samples, std::uint64_t seed);

/// region,kind,param,log_inv_eps,value_V,rho_l1,rho_l2,v_t rows.
void write_report_csv(std::ostream& os, const std::vector<PerimeterReport>& reports);

std::string to_string(GradientNorm n);
std::string to_string(PerimeterMethod m);

}  // namespace heis
