#include <cmath>
#include <fstream>

#include "command.hpp"
#include "heislab/embedding.hpp"
#include "heislab/error.hpp"
#include "heislab/rng.hpp"
#include "heislab/sparsest_cut.hpp"
#include "heislab/spectral.hpp"

namespace heis::cli {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// "kind:value" selector, e.g. cycle:4 or file:metric.txt.
std::pair<std::string, std::string> selector(const std::string& s, const std::string& what) {
  const auto c = s.find(':');
  if (c == std::string::npos) throw InvalidArgument(what + " must look like kind:value");
  return {s.substr(0, c), s.substr(c + 1)};
}

long long to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InvalidArgument(what + ": not an integer: '" + s + "'");
  return v;
}

class DistortionCommand : public Command {
  std::string embedding = "coordinate";
  std::int64_t n = 2, frechet_radius = 0;
  double scale = 1;
  std::uint64_t exact_limit = 100000, sample_pairs = 10'000'000;

 public:
  std::string name() const override { return "distortion"; }
  std::string help() const override { return "Bi-Lipschitz distortion of an explicit map on B_n"; }
  void define(Params& ps) override {
    ps.add("embedding", embedding, "horizontal, coordinate or frechet");
    ps.add("n", n, "ball radius n")->required();
    ps.add("scale", scale, "multiply the map by this factor");
    ps.add("frechet-radius", frechet_radius, "anchors B_r of the Frechet map (0: n)");
    ps.add("exact-limit", exact_limit, "largest |B_n| scanned over all pairs");
    ps.add("sample-pairs", sample_pairs, "pairs drawn above the exact limit");
  }
  void run(Context& ctx) override {
    require(n >= 1 && n <= 40, "n must be in [1, 40]");
    require(scale > 0 && std::isfinite(scale), "scale must be positive");
    require(frechet_radius >= 0 && frechet_radius <= 20, "frechet-radius must be in [0, 20]");
    require(sample_pairs >= 1, "sample-pairs must be >= 1");
    const std::int64_t fr = frechet_radius > 0 ? frechet_radius : n;
    const BallTable t = build_ball(2 * std::max(n, embedding == "frechet" ? fr : n));
    EmbeddingSpec e;
    if (embedding == "horizontal") e = horizontal_projection();
    else if (embedding == "coordinate") e = coordinate_embedding();
    else if (embedding == "frechet") e = frechet_embedding(t, fr);
    else throw InvalidArgument("unknown embedding '" + embedding + "' (horizontal, coordinate, frechet)");
    if (scale != 1) e = scaled_embedding(e, scale);
    DistortionOptions opt;
    opt.exact_point_limit = exact_limit;
    opt.sample_pairs = sample_pairs;
    opt.seed = ctx.seed;
    const auto r = distortion(e, t, n, opt);
    ctx.result = {{"embedding", e.name},
                  {"target_p", e.p},
                  {"dim", e.dim},
                  {"n", r.n},
                  {"points", r.points},
                  {"pairs", r.pairs},
                  {"sampled", r.sampled},
                  {"expansion", r.expansion},
                  {"contraction", r.contraction},
                  {"distortion", r.distortion},
                  {"collapsed", r.contraction == 0}};
  }
};

class LowerBoundCommand : public Command {
  double q = 2, K = 0;
  std::string n_list = "2,3,4,5,6,7,8";
  std::int64_t multiplier = 21, k_support = 4;

 public:
  std::string name() const override { return "lower-bound"; }
  std::string help() const override { return "Distortion lower bound from the Poincare chain with a measured constant"; }
  void define(Params& ps) override {
    ps.add("q", q, "exponent q >= 2");
    ps.add("n", n_list, "comma-separated ball radii");
    ps.add("K", K, "inequality constant (0: measure it spectrally)");
    ps.add("k-support", k_support, "support radius for the spectral constant");
    ps.add("multiplier", multiplier, "horizontal side over B_{multiplier n}");
  }
  void run(Context& ctx) override {
    require(q >= 2 && std::isfinite(q), "q must be finite and >= 2");
    require(K >= 0, "K must be >= 0");
    require(multiplier >= 1 && multiplier <= 64, "multiplier must be in [1, 64]");
    require(k_support >= 1 && k_support <= 12, "k-support must be in [1, 12]");
    std::vector<std::int64_t> ns;
    for (double v : parse_list(n_list, "n")) {
      require(v == std::floor(v) && v >= 1 && v <= 16, "n must be integers in [1, 16]");
      ns.push_back(static_cast<std::int64_t>(v));
    }
    require(!ns.empty(), "need at least one n");
    const std::int64_t nmax = *std::max_element(ns.begin(), ns.end());
    const BallTable t = build_ball(std::max(4 * nmax, k_support + 1));
    double Kused = K;
    if (K == 0) {
      Kused = optimal_constant_spectral(t, k_support).eigenvalue;
      ctx.constant("K", Kused, "measured", "spectral constant, global form, support B_" + std::to_string(k_support));
    } else {
      ctx.constant("K", Kused, "user");
    }
    ctx.constant("multiplier", static_cast<double>(multiplier), multiplier == 21 ? "fixed" : "user");
    const auto growth = ball_growth(multiplier * nmax);
    Json rows = Json::array();
    for (std::int64_t n : ns) {
      const auto r = poincare_lower_bound(q, n, Kused, t, multiplier, growth[static_cast<std::size_t>(multiplier * n)]);
      rows.push_back({{"n", n},
                      {"vertical_sum", r.vertical_sum},
                      {"ball_n", r.ball_n},
                      {"ball_outer", r.ball_outer},
                      {"bound", r.bound},
                      {"vacuous", r.vacuous},
                      {"shape", r.bound / std::pow(std::log(static_cast<double>(n)), 1 / q)}});
    }
    ctx.result = {{"q", q}, {"K", Kused}, {"multiplier", multiplier}, {"rows", rows}};
  }
};

Eigen::MatrixXd read_metric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read metric file " + path);
  long long n = 0;
  if (!(in >> n) || n < 2 || n > 64) throw InvalidArgument("metric file: bad point count");
  Eigen::MatrixXd m(n, n);
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j)
      if (!(in >> m(i, j))) throw InvalidArgument("metric file: truncated");
  return m;
}

class C2Command : public Command {
  std::string metric = "cycle:4";
  double tol = 1e-4;

 public:
  std::string name() const override { return "c2-exact"; }
  std::string help() const override { return "Least Euclidean distortion of a small metric"; }
  void define(Params& ps) override {
    ps.add("metric", metric, "cycle:N, ball:N (word metric on B_N) or file:PATH");
    ps.add("tol", tol, "bracket width on the distortion");
  }
  void run(Context& ctx) override {
    require(tol > 0 && tol < 1, "tol must be in (0, 1)");
    const auto [kind, arg] = selector(metric, "metric");
    Eigen::MatrixXd m;
    if (kind == "cycle") {
      const auto n = to_int(arg, "cycle length");
      require(n >= 3 && n <= 64, "cycle length must be in [3, 64]");
      m = cycle_metric(static_cast<int>(n));
    } else if (kind == "ball") {
      const auto n = to_int(arg, "ball radius");
      require(n >= 1 && n <= 2, "ball radius must be 1 or 2 (at most 64 points)");
      m = ball_metric(build_ball(2 * n), n);
    } else if (kind == "file") {
      m = read_metric(arg);
    } else {
      throw InvalidArgument("unknown metric kind '" + kind + "'");
    }
    C2Options opt;
    opt.tol = tol;
    const auto r = exact_c2_small(m, opt);
    ctx.result = {{"metric", metric},
                  {"points", m.rows()},
                  {"c2", r.value},
                  {"bracket", {r.lower, r.upper}},
                  {"bisection_steps", r.bisection_steps},
                  {"projections", r.projections}};
  }
};

CutInstance random_cut_instance(int n, std::uint64_t seed) {
  const CounterRng rng{seed};
  CutInstance I;
  I.n = n;
  const std::size_t N = static_cast<std::size_t>(n);
  I.C.assign(N * N, 0.0);
  I.D.assign(N * N, 0.0);
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      I.C[i * N + j] = I.C[j * N + i] = static_cast<double>(rng.bits(k++) % 5);
      I.D[i * N + j] = I.D[j * N + i] = static_cast<double>(rng.bits(k++) % 5);
    }
  return I;
}

class CutCommand : public Command {
  std::string instance = "cycle:4";
  std::uint64_t samples = 0;

 public:
  std::string name() const override { return "sparsest-cut"; }
  std::string help() const override { return "Sparsest cut by exhaustive enumeration (or sampled upper bound)"; }
  void define(Params& ps) override {
    ps.add("instance", instance, "cycle:N, ball:N, random:N or file:PATH");
    ps.add("samples", samples, "random cuts for the sampled upper bound (0: exact enumeration)");
  }
  void run(Context& ctx) override {
    const auto [kind, arg] = selector(instance, "instance");
    CutInstance I;
    std::vector<double> coords;
    int dim = 0;
    if (kind == "cycle") {
      const auto n = to_int(arg, "cycle length");
      require(n >= 3 && n <= 4096, "cycle length must be in [3, 4096]");
      I = cycle_cut_instance(static_cast<int>(n));
    } else if (kind == "ball") {
      const auto n = to_int(arg, "ball radius");
      require(n >= 1 && n <= 4, "ball radius must be in [1, 4]");
      const BallTable t = build_ball(n);
      I = heisenberg_cut_instance(t, n);
      dim = 3;
      for (const auto& g : t.elements())
        for (auto v : {g.x, g.y, g.z}) coords.push_back(static_cast<double>(v));
    } else if (kind == "random") {
      const auto n = to_int(arg, "point count");
      require(n >= 2 && n <= 4096, "point count must be in [2, 4096]");
      I = random_cut_instance(static_cast<int>(n), ctx.seed);
    } else if (kind == "file") {
      std::ifstream in(arg);
      if (!in) throw InvalidArgument("cannot read instance file " + arg);
      I = read_cut_instance(in);
    } else {
      throw InvalidArgument("unknown instance kind '" + kind + "'");
    }
    I.validate();
    require(samples > 0 || I.n <= kMaxBruteForcePoints,
            "exact enumeration needs at most " + std::to_string(kMaxBruteForcePoints) + " points; use --samples");
    const CutResult r = samples > 0 ? sparsest_cut_sampled(I, samples, ctx.seed, coords, dim) : sparsest_cut_bruteforce(I);
    std::string mask(static_cast<std::size_t>(I.n), '0');
    for (int v : r.side) mask[static_cast<std::size_t>(v)] = '1';
    ctx.result = {{"instance", instance}, {"points", I.n},           {"value", r.value},
                  {"exact", r.exact},     {"cut", r.side},          {"cut_mask", mask},
                  {"cuts_evaluated", r.cuts_evaluated}};
  }
};

}  // namespace

std::vector<std::unique_ptr<Command>> embedding_commands() {
  std::vector<std::unique_ptr<Command>> v;
  v.push_back(std::make_unique<DistortionCommand>());
  v.push_back(std::make_unique<LowerBoundCommand>());
  v.push_back(std::make_unique<C2Command>());
  v.push_back(std::make_unique<CutCommand>());
  return v;
}

}  // namespace heis::cli
