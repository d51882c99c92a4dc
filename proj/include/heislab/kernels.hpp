#pragma once

#include <string>
#include <vector>

namespace heis {

enum class KernelKind { P, Q, R };

/// Poisson kernel P_t(x) = t / (pi (t^2 + x^2)) and its t- and x-derivatives
/// Q_t = dP_t/dt, R_t = dP_t/dx.
struct KernelFamily {
  KernelKind kind = KernelKind::P;
  double t = 1.0;

  double operator()(double x) const;
  /// An antiderivative in x.
  double primitive(double x) const;
  /// Integral of |kernel| over |x| > U. Exact; requires U >= t for Q.
  double tail_mass(double U) const;
  /// Smallest U (>= t) with tail_mass(U) <= tol.
  double truncation_radius(double tol) const;
};

std::string to_string(KernelKind k);
KernelKind kernel_kind_from(const std::string& s);

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double exact = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double quadrature_error = 0.0;
};

/// integral of P_t, half moment integral_0^inf sqrt(x) P_t, ||Q_t||_1 and
/// ||R_t||_1 by adaptive quadrature plus closed-form tails.
std::vector<IdentityCheck> kernel_identity_suite(double t, double quad_tol);

struct SemigroupCheck {
  double t = 0.0;
  double pp_l1 = 0.0;  // || P_2t - P_t * P_t ||_1 on the window
  double pq_l1 = 0.0;  // || Q_2t - P_t * Q_t ||_1 on the window
};

/// Samples on a uniform grid of spacing h over [-W, W], convolves by FFT with
/// trapezoid weights, and measures the L1 defect over [-L, L].
SemigroupCheck semigroup_check(double t, double h = 1e-3, double L = 50.0, double W = 1000.0);

}  // namespace heis
