#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "heislab/ball.hpp"

namespace heis {

/// Capacities C and demands D on n points, both symmetric, nonnegative and
/// row-major n x n.
struct CutInstance {
  int n = 0;
  std::vector<double> C, D;

  double c(int i, int j) const { return C[static_cast<std::size_t>(i) * n + j]; }
  double d(int i, int j) const { return D[static_cast<std::size_t>(i) * n + j]; }
  void validate() const;
};

struct CutResult {
  double value = 0;            // sum C |1_S(i) - 1_S(j)| / sum D |1_S(i) - 1_S(j)|
  std::vector<int> side;       // members of S, sorted; never contains n - 1
  std::uint64_t cuts_evaluated = 0;
  bool exact = false;
};

inline constexpr int kMaxBruteForcePoints = 24;

/// Minimum over all cuts with nonzero demand, by Gray-code enumeration.
/// Ties go to the smallest bitmask of S.
CutResult sparsest_cut_bruteforce(const CutInstance& inst);

/// Best of coordinate sweeps and random cuts; an upper bound on the minimum.
/// coords holds n rows of dim values each (may be empty).
CutResult sparsest_cut_sampled(const CutInstance& inst, std::uint64_t samples, std::uint64_t seed,
                               const std::vector<double>& coords = {}, int dim = 0);

/// Value of one cut, summed from scratch.
double cut_ratio(const CutInstance& inst, const std::vector<int>& side);

/// Text: n, then n rows of C, then n rows of D.
CutInstance read_cut_instance(std::istream& is);
void write_cut_instance(std::ostream& os, const CutInstance& inst);

/// Cayley graph of B_n as capacities, uniform demands.
CutInstance heisenberg_cut_instance(const BallTable& table, std::int64_t n);
CutInstance cycle_cut_instance(int n);

}  // namespace heis
