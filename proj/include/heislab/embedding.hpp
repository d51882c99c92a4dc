#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "heislab/ball.hpp"
#include "heislab/poincare.hpp"

namespace heis {

/// A map from the group into l_p^dim.
struct EmbeddingSpec {
  std::string name;
  double p = 2.0;
  int dim = 0;
  Evaluator eval;
};

/// (x, y, z) -> (x, y) in l_2^2.
EmbeddingSpec horizontal_projection();
/// (x, y, z) -> (x, y, z) in l_2^3.
EmbeddingSpec coordinate_embedding();
/// x -> (d_W(x, y))_{y in B_radius} in l_inf; isometric on B_radius. Needs a
/// table of radius >= 2 * radius.
EmbeddingSpec frechet_embedding(const BallTable& table, std::int64_t radius);
EmbeddingSpec scaled_embedding(const EmbeddingSpec& e, double lambda);

struct DistortionOptions {
  std::uint64_t exact_point_limit = 100000;  // above this, pairs are sampled
  std::uint64_t sample_pairs = 10'000'000;
  std::uint64_t seed = 1;
};

struct DistortionResult {
  std::int64_t n = 0;
  std::uint64_t points = 0;
  std::uint64_t pairs = 0;
  double expansion = 0;    // max ||f(x) - f(y)|| / d_W(x, y)
  double contraction = 0;  // min of the same
  double distortion = 0;   // expansion / contraction, inf if the map collapses a pair
  bool sampled = false;
};

/// Over distinct pairs of B_n. Needs a table of radius >= 2n.
DistortionResult distortion(const EmbeddingSpec& e, const BallTable& table, std::int64_t n, const DistortionOptions& opt = {});

struct LowerBoundResult {
  double q = 2;
  std::int64_t n = 0;
  double K = 0;
  std::int64_t multiplier = 21;
  double vertical_sum = 0;        // sum_{k <= n^2} d_W(c^k)^q / k^{1 + q/2}
  std::uint64_t ball_n = 0;       // |B_n|
  std::uint64_t ball_outer = 0;   // |B_{multiplier n}|
  double bound = 0;               // raw value of the chain
  bool vacuous = false;           // bound <= 1
};

/// D >= (|B_n| vertical_sum / (K * 2 * |B_{m n}|))^{1/q} for any map that is
/// D-bi-Lipschitz on B_{(m+1) n}, given the local inequality with constant K
/// (sides raised to the power q). Needs table radius >= 4n. ball_outer = 0
/// counts |B_{m n}| with the streaming BFS.
LowerBoundResult poincare_lower_bound(double q, std::int64_t n, double K, const BallTable& table, std::int64_t multiplier = 21,
                                      std::uint64_t ball_outer = 0);

struct C2Result {
  double value = 0;  // upper end of the final bracket
  double lower = 0, upper = 0;
  int bisection_steps = 0;
  std::uint64_t projections = 0;
};

struct C2Options {
  double tol = 1e-4;              // bracket width on D
  int max_iterations = 200000;    // alternating projections per feasibility test
  double feasibility_tol = 1e-9;  // Frobenius gap, relative to the largest squared distance
};

/// Least Euclidean distortion of a finite metric (at most 64 points), by
/// bisection on D with an alternating-projection feasibility test between the
/// Euclidean distance matrix cone and the distortion box.
C2Result exact_c2_small(const Eigen::MatrixXd& metric, const C2Options& opt = {});

Eigen::MatrixXd ball_metric(const BallTable& table, std::int64_t n);
Eigen::MatrixXd cycle_metric(int n);

}  // namespace heis
