#include "heislab/sparsest_cut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "heislab/error.hpp"
#include "heislab/parallel.hpp"
#include "heislab/rng.hpp"

namespace heis {

void CutInstance::validate() const {
  if (n < 2) throw InvalidArgument("cut instance: need at least 2 points");
  const std::size_t m = static_cast<std::size_t>(n) * n;
  if (C.size() != m || D.size() != m) throw InvalidArgument("cut instance: matrices must be n x n");
  bool any_demand = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (double v : {c(i, j), d(i, j)})
        if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("cut instance: entries must be finite and nonnegative");
      if (c(i, j) != c(j, i) || d(i, j) != d(j, i)) throw InvalidArgument("cut instance: matrices must be symmetric");
      if (i != j && d(i, j) > 0) any_demand = true;
    }
  if (!any_demand) throw InvalidArgument("cut instance: all demands are zero");
}

double cut_ratio(const CutInstance& inst, const std::vector<int>& side) {
  std::vector<char> in(static_cast<std::size_t>(inst.n), 0);
  for (int v : side) in[static_cast<std::size_t>(v)] = 1;
  double num = 0, den = 0;
  for (int i = 0; i < inst.n; ++i)
    for (int j = 0; j < inst.n; ++j)
      if (in[i] != in[j]) {
        num += inst.c(i, j);
        den += inst.d(i, j);
      }
  return den > 0 ? num / den : std::numeric_limits<double>::infinity();
}

namespace {

constexpr std::uint64_t kGrayChunk = 1u << 16;

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::uint32_t mask = 0;
  bool better(double v, std::uint32_t m) const { return v < value || (v == value && m < mask); }
};

std::vector<int> members(std::uint32_t mask) {
  std::vector<int> s;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1) s.push_back(i);
  return s;
}

}  // namespace

CutResult sparsest_cut_bruteforce(const CutInstance& inst) {
  inst.validate();
  const int n = inst.n;
  if (n > kMaxBruteForcePoints) throw InvalidArgument("sparsest_cut_bruteforce: at most " + std::to_string(kMaxBruteForcePoints) + " points");
  // Point n-1 stays outside S; the free points are 0..n-2.
  const int f = n - 1;
  const std::uint64_t total = std::uint64_t{1} << f;  // Gray index 0 is the empty set
  const std::size_t nc = static_cast<std::size_t>((total + kGrayChunk - 1) / kGrayChunk);
  std::vector<double> rowC(n, 0.0), rowD(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) {
        rowC[i] += inst.c(i, j);
        rowD[i] += inst.d(i, j);
      }

  std::vector<Best> part(nc);
  parallel::for_each_chunk(nc, [&](std::size_t c) {
    const std::uint64_t b = c * kGrayChunk, e = std::min(total, b + kGrayChunk);
    std::uint32_t mask = static_cast<std::uint32_t>(b ^ (b >> 1));
    // Per point: weight into S (excluding itself), and the running cut sums.
    std::vector<double> inC(n, 0.0), inD(n, 0.0);
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (j == i || !(mask >> j & 1)) continue;
        inC[i] += inst.c(i, j);
        inD[i] += inst.d(i, j);
        if (!(mask >> i & 1)) {
          num += inst.c(i, j);
          den += inst.d(i, j);
        }
      }
    Best best;
    auto consider = [&] {
      if (mask != 0 && den > 0) {
        const double v = num / den;
        if (best.better(v, mask)) best = {v, mask};
      }
    };
    consider();
    for (std::uint64_t g = b + 1; g < e; ++g) {
      const int v = std::countr_zero(g);
      const bool joining = !(mask >> v & 1);
      const double outC = rowC[v] - inC[v], outD = rowD[v] - inD[v];
      const double sgn = joining ? 1.0 : -1.0;
      num += sgn * (outC - inC[v]);
      den += sgn * (outD - inD[v]);
      mask ^= std::uint32_t{1} << v;
      for (int u = 0; u < n; ++u) {
        if (u == v) continue;
        inC[u] += sgn * inst.c(u, v);
        inD[u] += sgn * inst.d(u, v);
      }
      consider();
    }
    part[c] = best;
  });

  Best best;
  for (const auto& p : part)
    if (best.better(p.value, p.mask)) best = p;
  if (!std::isfinite(best.value)) throw InvalidArgument("sparsest_cut_bruteforce: no cut separates any demand");
  CutResult r;
  r.side = members(best.mask);
  // summed from scratch so the value does not depend on the chunking
  r.value = cut_ratio(inst, r.side);
  r.cuts_evaluated = total - 1;
  r.exact = true;
  return r;
}

CutResult sparsest_cut_sampled(const CutInstance& inst, std::uint64_t samples, std::uint64_t seed, const std::vector<double>& coords, int dim) {
  inst.validate();
  const int n = inst.n;
  if (dim < 0 || coords.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(dim))
    throw InvalidArgument("sparsest_cut_sampled: coords must hold n rows of dim values");

  CutResult best;
  best.value = std::numeric_limits<double>::infinity();
  auto offer = [&](std::vector<char>& in) {
    // S never holds n-1; flip to the complement, which is the same cut.
    if (in[n - 1])
      for (auto& b : in) b = !b;
    std::vector<int> side;
    for (int i = 0; i < n; ++i)
      if (in[i]) side.push_back(i);
    ++best.cuts_evaluated;
    if (side.empty()) return;
    const double v = cut_ratio(inst, side);
    if (v < best.value || (v == best.value && side < best.side)) {
      best.value = v;
      best.side = std::move(side);
    }
  };

  // Sweeps: every prefix of the points sorted by one coordinate.
  for (int a = 0; a < dim; ++a) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return coords[i * dim + a] < coords[j * dim + a]; });
    std::vector<char> in(n, 0);
    for (int k = 0; k + 1 < n; ++k) {
      in[order[k]] = 1;
      if (coords[order[k] * dim + a] == coords[order[k + 1] * dim + a]) continue;
      std::vector<char> copy = in;
      offer(copy);
    }
  }
  const CounterRng rng{seed};
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::vector<char> in(n);
    for (int i = 0; i < n; ++i) in[i] = rng.bits(s * static_cast<std::uint64_t>(n) + i) & 1;
    offer(in);
  }
  if (!std::isfinite(best.value)) throw InvalidArgument("sparsest_cut_sampled: no sampled cut separates any demand");
  return best;
}

CutInstance read_cut_instance(std::istream& is) {
  CutInstance inst;
  long long n = 0;
  if (!(is >> n) || n < 2 || n > 100000) throw InvalidArgument("cut instance: bad point count");
  inst.n = static_cast<int>(n);
  const std::size_t m = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  inst.C.resize(m);
  inst.D.resize(m);
  for (auto* mat : {&inst.C, &inst.D})
    for (double& v : *mat)
      if (!(is >> v)) throw InvalidArgument("cut instance: truncated matrix");
  inst.validate();
  return inst;
}

void write_cut_instance(std::ostream& os, const CutInstance& inst) {
  os << inst.n << '\n';
  os.precision(17);
  for (const auto* mat : {&inst.C, &inst.D})
    for (int i = 0; i < inst.n; ++i) {
      for (int j = 0; j < inst.n; ++j) os << (j ? " " : "") << (*mat)[static_cast<std::size_t>(i) * inst.n + j];
      os << '\n';
    }
}

CutInstance heisenberg_cut_instance(const BallTable& table, std::int64_t n) {
  if (n < 0 || n > table.radius()) throw DomainCoverageError("heisenberg_cut_instance: table too small", n);
  CutInstance inst;
  const std::size_t P = table.count(n);
  inst.n = static_cast<int>(P);
  inst.C.assign(P * P, 0.0);
  inst.D.assign(P * P, 1.0);
  for (std::size_t i = 0; i < P; ++i) {
    inst.D[i * P + i] = 0.0;
    for (Generator s : kGenerators) {
      const std::uint32_t j = table.neighbor(i, s);
      if (j != kNoIndex && j < P) inst.C[i * P + j] = 1.0;
    }
  }
  return inst;
}

CutInstance cycle_cut_instance(int n) {
  if (n < 3) throw InvalidArgument("cycle_cut_instance: n must be >= 3");
  CutInstance inst;
  inst.n = n;
  const std::size_t N = static_cast<std::size_t>(n);
  inst.C.assign(N * N, 0.0);
  inst.D.assign(N * N, 1.0);
  for (int i = 0; i < n; ++i) {
    inst.D[i * N + i] = 0.0;
    const int j = (i + 1) % n;
    inst.C[i * N + j] = inst.C[j * N + i] = 1.0;
  }
  return inst;
}

}  // namespace heis
