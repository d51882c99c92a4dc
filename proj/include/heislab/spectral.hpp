#pragma once

#include <cstdint>
#include <vector>

#include "heislab/ball.hpp"

namespace heis {

/// Symmetric operator of the form y_i = diag_i x_i + sum_j w_ij (x_i - x_j),
/// stored row-wise so rows can be applied independently.
struct GraphForm {
  std::vector<double> diag;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> weight;

  std::size_t size() const { return diag.size(); }
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  double quadratic(const std::vector<double>& x) const;
};

enum class SpectralForm {
  Global,  // f supported in B_n, both sums over the whole group
  Local,   // vertical sum over B_n, k <= k_max; horizontal sum over B_{multiplier*n}
};

struct SpectralOptions {
  SpectralForm form = SpectralForm::Global;
  std::int64_t multiplier = 21;
  std::int64_t k_max = 0;  // 0: all k for the global form, n^2 for the local form
  double rel_tol = 1e-9;
  std::int64_t max_iterations = 100000;
  std::size_t dense_threshold = 2000;
};

struct SpectralProblem {
  std::vector<std::size_t> unknowns;  // ball indices
  GraphForm vertical;
  GraphForm horizontal;
  bool deflate_constants = false;
};

struct SpectralResult {
  double eigenvalue = 0.0;   // sup of vertical / horizontal quadratic forms
  double ratio_bound = 0.0;  // sqrt(eigenvalue), the matching bound on lhs / rhs
  std::size_t unknowns = 0;
  std::int64_t iterations = 0;
  double residual = 0.0;
  bool dense = false;
  std::vector<double> eigenvector;  // over problem.unknowns
};

SpectralProblem assemble_spectral_problem(const BallTable& table, std::int64_t n, const SpectralOptions& opt);

/// Largest generalized eigenvalue of the (vertical, horizontal) pencil for
/// p = q = 2 and scalar f. Dense below opt.dense_threshold unknowns,
/// otherwise a locally optimal block iteration preconditioned by the
/// horizontal form. Throws ConvergenceError at the iteration cap.
SpectralResult optimal_constant_spectral(const BallTable& table, std::int64_t n, const SpectralOptions& opt = {});
SpectralResult solve_spectral(const SpectralProblem& problem, const SpectralOptions& opt);

}  // namespace heis
