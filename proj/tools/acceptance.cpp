// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heislab/ball.hpp"
#include "heislab/cli.hpp"
#include "heislab/continuous.hpp"
#include "heislab/embedding.hpp"
#include "heislab/error.hpp"
#include "heislab/group.hpp"
#include "heislab/kernels.hpp"
#include "heislab/parallel.hpp"
#include "heislab/perimeter.hpp"
#include "heislab/poincare.hpp"
#include "heislab/sparsest_cut.hpp"
#include "heislab/spectral.hpp"

using namespace heis;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// splitmix64, kept separate from the library's generator.
struct Mix {
  std::uint64_t s;
  std::uint64_t bits() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
  double gaussian() {
    const double u = 1.0 - uniform(), v = uniform();
    return std::sqrt(-2 * std::log(u)) * std::cos(2 * std::numbers::pi * v);
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << title << ": " << o.detail << " ("
            << fmt(seconds_since(t0)) << " s)" << std::endl;
}

Outcome kernels() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::size_t checks = 0;
  for (double t : {0.1, 1.0, 10.0})
    for (const auto& c : kernel_identity_suite(t, 1e-6)) {
      worst = std::max(worst, c.rel_error);
      ++checks;
    }
  const double wall = seconds_since(t0);
  return {checks == 12 && worst <= 1e-6 && wall < 1.0,
          std::to_string(checks) + " identities, worst relative error " + fmt(worst) + ", " + fmt(wall) + " s"};
}

Outcome semigroup() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto s = semigroup_check(t, 1e-3, 50.0);
    worst = std::max({worst, s.pp_l1, s.pq_l1});
  }
  const double wall = seconds_since(t0);
  return {worst < 1e-5 && wall < 10.0, "largest L1 defect " + fmt(worst) + ", " + fmt(wall) + " s"};
}

Outcome group_facts() {
  bool words = true;
  for (std::int64_t m = 1; m <= 100; ++m) words = words && evaluate(commutator_word(m)) == GroupElement{0, 0, m * m};

  // The closed form for the length of c^k is checked against BFS wherever
  // the table reaches, then used up to k = 900.
  const BallTable t = build_ball(60);
  bool formula = true;
  std::int64_t verified = 0;
  for (std::int64_t k = 1; k <= 900; ++k) {
    const auto idx = t.find({0, 0, k});
    if (!idx) continue;
    formula = formula && central_power_length(k) == t.distance(*idx);
    ++verified;
  }
  bool bound = true;
  double lo = 1e300, hi = 0;
  for (std::int64_t k = 1; k <= 900; ++k) {
    const std::int64_t d = central_power_length(k);
    bound = bound && d <= 4 * static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    if (k >= 100) {
      const double r = static_cast<double>(d) / std::sqrt(static_cast<double>(k));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  const std::int64_t dc = t.distance(t.index_of({0, 0, 1}));
  const bool stable = hi / lo < 1.1;
  return {words && formula && verified >= 225 && bound && dc == 4 && stable,
          "commutators exact " + std::string(words ? "yes" : "no") + ", closed form matches BFS on " + std::to_string(verified) +
              " powers, d(c) = " + std::to_string(dc) + ", d(c^k)/sqrt(k) in [" + fmt(lo) + ", " + fmt(hi) + "] over [100, 900]"};
}

Outcome growth() {
  const auto t0 = Clock::now();
  const BallTable t = build_ball(32);
  const double wall = seconds_since(t0);
  const double mem = static_cast<double>(t.memory_bytes());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::int64_t n = 8; n <= 32; ++n) {
    const double x = std::log(static_cast<double>(n)), y = std::log(static_cast<double>(t.count(n)));
    sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {slope >= 3.7 && slope <= 4.3 && wall < 60 && mem < 4.0 * 1024 * 1024 * 1024,
          "slope " + fmt(slope) + ", |B_32| = " + std::to_string(t.size()) + ", " + fmt(wall) + " s, " + fmt(mem / 1048576) + " MiB"};
}

LatticeFunction random_function(const BallTable& t, int dim, std::int64_t support, Mix& rng) {
  LatticeFunction f(t, dim, TargetSpace::ell_p(2));
  for (std::size_t i = 0; i < t.count(support); ++i)
    for (auto& v : f.at(i)) v = rng.gaussian();
  return f;
}

Outcome proven_suites() {
  Mix rng{2024};
  const BallTable big = build_ball(19);
  std::size_t kleiner_runs = 0, kleiner_ok = 0;
  for (std::int64_t n = 1; n <= 6; ++n)
    for (double p : {1.0, 2.0})
      for (int s = 0; s < 100; ++s) {
        const auto f = random_function(big, 3, 3 * n + 1, rng);
        const auto r = kleiner_local_check(f, n, p);
        ++kleiner_runs;
        if (r.lhs <= r.rhs_with_constant) ++kleiner_ok;
      }

  double worst_gap = -1e300;
  std::size_t global_runs = 0;
  std::vector<double> bounds;
  for (std::int64_t n = 2; n <= 6; ++n) {
    const BallTable t = build_ball(n + 1);
    const auto sr = optimal_constant_spectral(t, n);
    bounds.push_back(sr.eigenvalue);
    if (n > 5) continue;
    for (int s = 0; s < 20; ++s) {
      const auto f = random_function(t, 1, n, rng);
      const auto r = global_inequality_report(f, 2, 2, 4 * n * n);
      worst_gap = std::max(worst_gap, r.ratio - sr.ratio_bound);
      ++global_runs;
    }
  }
  const double spread = *std::max_element(bounds.begin(), bounds.end()) / *std::min_element(bounds.begin(), bounds.end());
  std::string list;
  for (double b : bounds) list += (list.empty() ? "" : ", ") + fmt(b);
  return {kleiner_ok == kleiner_runs && worst_gap <= 1e-8 && spread < 4,
          "path bound held " + std::to_string(kleiner_ok) + "/" + std::to_string(kleiner_runs) + ", " + std::to_string(global_runs) +
              " global trials, largest ratio minus bound " + fmt(worst_gap) + ", spectral constants B_2..B_6 {" + list +
              "} spread " + fmt(spread)};
}

GridFunction sample_bump(const GridSpec& s, const Bump& b) {
  return GridFunction::sample(s, 1, [&](double x, double y, double z, std::span<double> out) { out[0] = b(x, y, z); });
}

Outcome continuous() {
  const double lambda = 2.0;
  struct Case {
    Bump b;
    GridSpec s;
  };
  const Case cases[] = {{{BumpFamily::Product, 2.0, 4.0, 1.0}, {64, 64, 64, 2.2, 2.2, 4.4}},
                        {{BumpFamily::Koranyi, 2.0, 4.0, 1.0}, {128, 128, 128, 2.2, 2.2, 1.1}}};
  double worst = 0, fine_wall = 0;
  for (const auto& c : cases)
    for (double p : {2.0, 3.0}) {
      const auto t0 = Clock::now();
      const auto r0 = continuous_inequality_report(sample_bump(c.s, c.b), p, 3.0);
      if (c.s.nx == 128) fine_wall = std::max(fine_wall, seconds_since(t0));
      const auto r1 = continuous_inequality_report(sample_bump(c.s, c.b.dilated(lambda)), p, 3.0);
      const double factor = std::pow(lambda, 1 - 4 / p);
      worst = std::max({worst, std::abs(r1.base.lhs / r0.base.lhs / factor - 1), std::abs(r1.base.rhs / r0.base.rhs / factor - 1)});
    }
  const GridSpec s{48, 48, 48, 1.6, 1.6, 1.6};
  double lo = 1e300, hi = 0;
  for (auto fam : {BumpFamily::Product, BumpFamily::Koranyi, BumpFamily::Euclidean}) {
    const auto r = continuous_inequality_report(sample_bump(s, {fam, 1.5, 1.5, 1.0}), 2, 2);
    lo = std::min(lo, r.base.ratio);
    hi = std::max(hi, r.base.ratio);
  }
  return {worst <= 0.02 && hi / lo <= 3 && fine_wall < 300,
          "dilation deviation " + fmt(100 * worst) + "%, family spread " + fmt(hi / lo) + ", 128^3 run " + fmt(fine_wall) + " s"};
}

Outcome perimeter_suite() {
  double cube_vt = 0, cube_V = 0;
  for (double s : {1.0, 2.5})
    for (double t : {1e-3, 0.1 * s, 0.3 * s, 0.49 * s})
      cube_vt = std::max(cube_vt, std::abs(vertical_perimeter(make_cube(s), t) - 2 * t * s * s));
  for (double s : {2.0, 3.0})
    for (double eps : {0.5, 0.1, 1.0 / 1024}) {
      const double exact = 4 * s * s * (1 - std::sqrt(eps));
      cube_V = std::max(cube_V, std::abs(coarse_total_vertical_perimeter(make_cube(s), eps) / exact - 1));
    }

  const auto K = make_koranyi_ball(1.0);
  double mc_sigma = 0;
  for (double t : {0.05, 0.2, 0.8}) {
    const auto m = vertical_perimeter_mc(K, t, 4'000'000, 11);
    mc_sigma = std::max(mc_sigma, std::abs(vertical_perimeter(K, t) - m.value) / m.std_error);
  }

  std::vector<double> eps;
  for (int k = 2; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
  bool cs = true, rho = true;
  std::size_t regions = 0;
  for (const auto& A : region_library()) {
    const auto r = conjecture_report(A, eps);
    ++regions;
    rho = rho && r.rows.size() == eps.size() && r.rows.back().eps == std::ldexp(1.0, -10);
    for (const auto& row : r.rows) {
      cs = cs && row.cs_holds;
      rho = rho && std::isfinite(row.rho_l1) && std::isfinite(row.rho_l2);
    }
  }
  const auto a = coarse_total_vertical_perimeter_mc(K, std::ldexp(1.0, -10), 1'000'000, 5);
  const auto b = coarse_total_vertical_perimeter_mc(K, std::ldexp(1.0, -10), 4'000'000, 6);
  const double nn = std::abs(a.value - b.value) / b.value;
  return {cube_vt <= 1e-8 && cube_V <= 1e-6 && mc_sigma <= 3 && cs && rho && nn <= 0.02,
          "cube v_t error " + fmt(cube_vt) + ", cube V rel error " + fmt(cube_V) + ", Koranyi v_t vs MC " + fmt(mc_sigma) +
              " sigma, Cauchy-Schwarz " + (cs ? "holds" : "fails") + " on " + std::to_string(regions) +
              " regions, MC N vs 4N " + fmt(100 * nn) + "%"};
}

Outcome distortion_pipeline() {
  const BallTable t = build_ball(32);
  const double K = optimal_constant_spectral(t, 4).eigenvalue;
  const auto growth = ball_growth(21 * 8);
  double lo = 1e300, hi = 0;
  for (std::int64_t n = 2; n <= 8; ++n) {
    const auto r = poincare_lower_bound(2, n, K, t, 21, growth[static_cast<std::size_t>(21 * n)]);
    const double shape = r.bound / std::sqrt(std::log(static_cast<double>(n)));
    lo = std::min(lo, shape);
    hi = std::max(hi, shape);
  }
  bool below = true;
  std::string c2s;
  for (std::int64_t n : {1, 2}) {
    const auto lb = poincare_lower_bound(2, n, K, t, 21, growth[static_cast<std::size_t>(21 * n)]);
    const auto c2 = exact_c2_small(ball_metric(t, n));
    below = below && lb.bound <= c2.lower;
    c2s += (c2s.empty() ? "" : ", ") + ("B_" + std::to_string(n) + " " + fmt(lb.bound) + " <= " + fmt(c2.value));
  }
  const auto cyc = exact_c2_small(cycle_metric(4));
  const double cyc_err = std::abs(cyc.value - std::sqrt(2.0));
  return {hi / lo <= 2 && below && cyc_err <= 1e-3,
          "shape spread over n = 2..8 " + fmt(hi / lo) + " (K = " + fmt(K) + "), " + c2s + ", 4-cycle " + fmt(cyc.value)};
}

// Every subset containing point 0, by direct double loops.
double naive_sparsest(const CutInstance& I) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (1ULL << (I.n - 1)); ++mask) {
    double c = 0, d = 0;
    for (int i = 0; i < I.n; ++i)
      for (int j = 0; j < I.n; ++j)
        if (((mask >> i) & 1) != ((mask >> j) & 1)) c += I.c(i, j), d += I.d(i, j);
    if (d > 0) best = std::min(best, c / d);
  }
  return best;
}

CutInstance random_instance(int n, std::uint64_t seed) {
  Mix rng{seed};
  CutInstance I;
  I.n = n;
  I.C.assign(static_cast<std::size_t>(n * n), 0.0);
  I.D = I.C;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      I.C[i * n + j] = I.C[j * n + i] = static_cast<double>(rng.bits() % 6);
      I.D[i * n + j] = I.D[j * n + i] = static_cast<double>(rng.bits() % 6);
    }
  return I;
}

Outcome sparsest_cut_suite() {
  const auto cyc = cycle_cut_instance(4);
  const auto r = sparsest_cut_bruteforce(cyc);
  const bool cycle_ok = r.value == naive_sparsest(cyc) && r.value == 0.5;

  // Integer data: the scaled sums are exact, so the ratio must be the
  // correctly rounded quotient of the scaled sums on the same cut.
  const auto base = random_instance(12, 3);
  const auto r0 = sparsest_cut_bruteforce(base);
  bool scaling = r0.value == naive_sparsest(base);
  for (auto [a, b] : {std::pair{3.0, 3.0}, {8.0, 2.0}, {5.0, 7.0}}) {
    CutInstance s = base;
    for (auto& v : s.C) v *= a;
    for (auto& v : s.D) v *= b;
    const auto rs = sparsest_cut_bruteforce(s);
    double c = 0, d = 0;
    for (int i = 0; i < base.n; ++i)
      for (int j = 0; j < base.n; ++j) {
        const bool si = std::binary_search(r0.side.begin(), r0.side.end(), i), sj = std::binary_search(r0.side.begin(), r0.side.end(), j);
        if (si != sj) c += base.c(i, j), d += base.d(i, j);
      }
    scaling = scaling && rs.side == r0.side && rs.value == (a * c) / (b * d);
  }

  const auto big = random_instance(20, 9);
  const auto t0 = Clock::now();
  const auto rb = sparsest_cut_bruteforce(big);
  const double wall = seconds_since(t0);
  return {cycle_ok && scaling && rb.cuts_evaluated == (1ULL << 19) - 1 && wall < 30,
          "4-cycle " + fmt(r.value) + " (oracle " + fmt(naive_sparsest(cyc)) + "), scaling exact " + (scaling ? "yes" : "no") +
              ", n = 20 enumerated " + std::to_string(rb.cuts_evaluated) + " cuts in " + fmt(wall) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("heislab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> runs = {
      {"ball", "--radius", "6"},
      {"ball", "--radius", "24", "--count-only", "--format", "json"},
      {"poincare-local", "--n", "2", "--dim", "2", "--seed", "5"},
      {"poincare-global", "--n", "3", "--trials", "3", "--spectral"},
      {"spectral", "--n", "3"},
      {"spectral", "--n", "2", "--form", "local", "--multiplier", "5"},
      {"kleiner", "--n", "2", "--trials", "3", "--seed", "9"},
      {"ell1-conjecture", "--n", "2", "--function", "xyz"},
      {"kernel-check", "--t", "0.5,2", "--semigroup"},
      {"continuous-check", "--cells", "24", "--family", "koranyi", "--p", "3", "--q", "3"},
      {"gfunction", "--cells", "16"},
      {"perimeter", "--region", "cube", "--format", "csv"},
      {"perimeter", "--region", "koranyi_ball", "--mc-samples", "100000"},
      {"conjecture", "--region", "koranyi_ball", "--mc-samples", "50000", "--format", "csv"},
      {"distortion", "--embedding", "coordinate", "--n", "4"},
      {"distortion", "--embedding", "coordinate", "--n", "6", "--exact-limit", "100", "--sample-pairs", "200000"},
      {"lower-bound", "--n", "2,3"},
      {"c2-exact", "--metric", "ball:1"},
      {"sparsest-cut", "--instance", "random:16", "--seed", "4"},
      {"sparsest-cut", "--instance", "ball:3", "--samples", "2000"},
  };
  std::size_t same = 0;
  std::string bad;
  std::ostringstream sink;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string ref;
    bool ok = true;
    for (const char* th : {"1", "4", "8"}) {
      auto args = runs[i];
      const fs::path out = dir / ("run" + std::to_string(i) + "_" + th);
      args.insert(args.end(), {"--threads", th, "--out", out.string()});
      if (cli::run(args, sink, sink) != 0) {
        ok = false;
        break;
      }
      const std::string body = slurp(out);
      if (std::string(th) == "1") ref = body;
      else ok = ok && body == ref && !body.empty();
    }
    if (ok) ++same;
    else bad += " " + runs[i][0];
  }
  parallel::set_threads(1);
  fs::remove_all(dir);
  std::set<std::string> names;
  for (const auto& r : runs) names.insert(r[0]);
  return {same == runs.size(), std::to_string(same) + "/" + std::to_string(runs.size()) + " runs over " + std::to_string(names.size()) +
                                   " subcommands identical at 1, 4 and 8 threads" + (bad.empty() ? "" : ", differing:" + bad)};
}

}  // namespace

int main() {
  parallel::set_threads(1);
  criterion(1, "kernel identities", kernels);
  criterion(2, "semigroup identities", semigroup);
  criterion(3, "group and metric facts", group_facts);
  criterion(4, "growth exponent", growth);
  criterion(5, "proven inequality suites", proven_suites);
  criterion(6, "continuous diagnostics", continuous);
  criterion(7, "perimeter suite", perimeter_suite);
  criterion(8, "distortion pipeline", distortion_pipeline);
  criterion(9, "sparsest cut", sparsest_cut_suite);
  criterion(10, "reproducibility", reproducibility);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
