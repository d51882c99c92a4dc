#pragma once

#include <vector>

#include "heislab/grid.hpp"
#include "heislab/kernels.hpp"
#include "heislab/poincare.hpp"

namespace heis {

/// Components [0, d) hold the a-derivative, [d, 2d) the b-derivative:
/// d/dx f and d/dy f + x d/dz f, by centred differences with zero outside.
GridFunction horizontal_gradient(const GridFunction& f);

/// Convolution along every z-line with the kernel truncated where its exact
/// tail mass drops below tail_tol (and at the box). Each grid weight is the
/// exact kernel integral over one cell.
GridFunction center_convolve(const GridFunction& f, const KernelFamily& k, double tail_tol);

/// n points per decade from tmin to tmax inclusive, log-spaced.
std::vector<double> log_grid(double tmin, double tmax, int per_decade);
/// hz to 2Lz - hz at 48 per decade.
std::vector<double> default_vertical_grid(const GridSpec& spec);

/// integral ||f(x, y, z + t) - f(x, y, z)||_p^p over the grid, with linear
/// interpolation in z and f = 0 off the grid.
double vertical_increment(const GridFunction& f, double t, double p);

struct VerticalResult {
  double value = 0.0;
  double bulk = 0.0;         // log-trapezoid over the t grid (before the 1/q power)
  double small_tail = 0.0;   // (0, tmin): exact for the interpolated profile
  double large_tail = 0.0;   // (tmax, inf) with the disjoint-shift limit
  bool large_tail_exact = false;
  double error_bar = 0.0;    // |fine - coarse| / 3, 0 if no coarse grid exists
  bool has_error_bar = false;
};

VerticalResult vertical_lhs_continuous(const GridFunction& f, double p, double q, const std::vector<double>& t_grid = {});

struct HorizontalResult {
  double value = 0.0;
  double error_bar = 0.0;
  bool has_error_bar = false;
};

HorizontalResult horizontal_rhs_continuous(const GridFunction& f, double p);

struct GFunctionResult {
  GridFunction g;
  double norm_ratio = 0.0;   // ||g||_p / ||f||_p, NaN for f = 0
  double tail_fraction = 0.0;  // largest share of a point's value coming from the two endpoint tails
};

/// Pointwise (integral t^{q-1} ||Q_t * f||^q dt)^{1/q}, component norm l_2.
GFunctionResult g_function(const GridFunction& f, double q, const std::vector<double>& t_grid, double p_norm = 2.0,
                           double tail_tol = 1e-6);

struct ContinuousReport {
  PoincareReport base;
  VerticalResult vertical;
  HorizontalResult horizontal;
  double ratio_error = 0.0;
  bool outside_theorem = false;  // p <= 1: reported only
  bool degenerate = false;       // f = 0
};

ContinuousReport continuous_inequality_report(const GridFunction& f, double p, double q,
                                              const std::vector<double>& t_grid = {});

}  // namespace heis
