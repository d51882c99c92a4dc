#include <cmath>
#include <numbers>
#include <sstream>

#include "command.hpp"
#include "heislab/ball.hpp"
#include "heislab/error.hpp"
#include "heislab/poincare.hpp"
#include "heislab/rng.hpp"
#include "heislab/spectral.hpp"

namespace heis::cli {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

double gaussian(const CounterRng& rng, std::uint64_t k) {
  return std::sqrt(-2.0 * std::log(rng.uniform_open0(2 * k))) * std::cos(2 * std::numbers::pi * rng.uniform(2 * k + 1));
}

// Lattice test functions. "random" is Gaussian on B_support, the others are
// coordinate or radial profiles cut off outside B_support.
LatticeFunction lattice_function(const BallTable& t, const std::string& kind, int dim, std::int64_t support, double target_p,
                                 std::uint64_t seed) {
  require(dim >= 1 && dim <= 64, "dim must be in [1, 64]");
  require(support >= 0 && support <= t.radius(), "support radius out of range");
  LatticeFunction f(t, dim, TargetSpace::ell_p(target_p));
  const std::size_t m = t.count(support);
  const CounterRng rng{seed};
  for (std::size_t i = 0; i < m; ++i) {
    const auto& g = t.element(i);
    auto v = f.at(i);
    for (int c = 0; c < dim; ++c) {
      double val = 0;
      if (kind == "random") val = gaussian(rng, i * static_cast<std::uint64_t>(dim) + c);
      else if (kind == "x") val = static_cast<double>(g.x);
      else if (kind == "y") val = static_cast<double>(g.y);
      else if (kind == "z") val = static_cast<double>(g.z);
      else if (kind == "radial") val = static_cast<double>(support - t.distance(i));
      else throw InvalidArgument("unknown function '" + kind + "' (random, x, y, z, radial)");
      v[c] = val;
    }
  }
  return f;
}

Json report_json(const PoincareReport& r) {
  return {{"n", r.n},     {"p", r.p},     {"q", r.q},
          {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio},
          {"radius_multiplier", r.radius_multiplier}, {"k_explicit", r.k_explicit}, {"tail", r.tail}};
}

class BallCommand : public Command {
  std::int64_t radius = 2;
  bool count_only = false;
  std::int64_t fit_from = 8;

 public:
  std::string name() const override { return "ball"; }
  std::string help() const override { return "Word-metric ball B_R by breadth-first search"; }
  std::vector<std::string> formats() const override { return {"text", "json"}; }
  void define(Params& p) override {
    p.add("radius", radius, "ball radius R")->required();
    p.flag("count-only", count_only, "only count |B_n| (no element table; json output)");
    p.add("fit-from", fit_from, "least-squares growth fit over n in [fit-from, R]");
  }
  void run(Context& ctx) override {
    require(radius >= 0 && radius <= 4096, "radius must be in [0, 4096]");
    require(fit_from >= 1, "fit-from must be >= 1");
    require(!(count_only && ctx.format == "text"), "count-only needs --format json");
    std::vector<std::uint64_t> counts;
    if (count_only) {
      counts = ball_growth(radius);
    } else {
      const BallTable t = build_ball(radius);
      for (std::int64_t n = 0; n <= radius; ++n) counts.push_back(t.count(n));
      if (ctx.format == "text") {
        std::ostringstream os;
        write_ball(os, t);
        ctx.body = os.str();
      }
      ctx.result["memory_bytes"] = t.memory_bytes();
    }
    ctx.result["radius"] = radius;
    ctx.result["count"] = counts.back();
    ctx.result["cumulative_counts"] = counts;
    if (radius >= fit_from + 1) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
      for (std::int64_t n = fit_from; n <= radius; ++n) {
        const double x = std::log(static_cast<double>(n)), y = std::log(static_cast<double>(counts[n]));
        sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
      }
      ctx.result["growth_exponent"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      ctx.result["fit_range"] = {fit_from, radius};
      ctx.constant("growth_exponent_expected", 4.0, "fixed", "|B_m| comparable to m^4");
    }
  }
};

class LocalCommand : public Command {
  std::int64_t n = 1, multiplier = 21, support = 0;
  double p = 2, q = 0, target_p = 2;
  int dim = 1;
  std::string function = "random";

 public:
  std::string name() const override { return "poincare-local"; }
  std::string help() const override { return "Local vertical-versus-horizontal inequality on B_n"; }
  void define(Params& ps) override {
    ps.add("n", n, "ball radius n")->required();
    ps.add("p", p, "inner exponent p");
    ps.add("q", q, "outer exponent q (0: max(target-p, 2))");
    ps.add("target-p", target_p, "target space l_p");
    ps.add("multiplier", multiplier, "horizontal side over B_{multiplier n}");
    ps.add("function", function, "random, x, y, z or radial");
    ps.add("dim", dim, "target dimension");
    ps.add("support", support, "support radius of the test function (0: 5n)");
  }
  void run(Context& ctx) override {
    require(n >= 1 && n <= 64, "n must be in [1, 64]");
    require(multiplier >= 1, "multiplier must be >= 1");
    const double qq = q > 0 ? q : std::max(target_p, 2.0);
    require(p >= 1 && qq >= p, "need 1 <= p <= q");
    const std::int64_t need = std::max(5 * n, multiplier * n + 1);
    const BallTable t = build_ball(need);
    const auto f = lattice_function(t, function, dim, support > 0 ? support : 5 * n, target_p, ctx.seed);
    ctx.result = report_json(local_inequality_report(f, n, p, qq, multiplier));
    ctx.result["table_radius"] = need;
    ctx.constant("multiplier", static_cast<double>(multiplier), multiplier == 21 ? "fixed" : "user");
  }
};

class GlobalCommand : public Command {
  std::int64_t n = 3, k_max = 0;
  double p = 2, q = 2, target_p = 2;
  int dim = 1, trials = 1;
  std::string function = "random";
  bool spectral = false;

 public:
  std::string name() const override { return "poincare-global"; }
  std::string help() const override { return "Whole-group inequality for functions supported in B_n"; }
  void define(Params& ps) override {
    ps.add("n", n, "support radius n")->required();
    ps.add("p", p, "inner exponent p");
    ps.add("q", q, "outer exponent q");
    ps.add("target-p", target_p, "target space l_p");
    ps.add("k-max", k_max, "explicit k range (0: 4 n^2)");
    ps.add("function", function, "random, x, y, z or radial");
    ps.add("dim", dim, "target dimension");
    ps.add("trials", trials, "random trials (seeds seed, seed+1, ...)");
    ps.flag("spectral", spectral, "compare with the spectral bound (p = q = 2, scalar)");
  }
  void run(Context& ctx) override {
    require(n >= 1 && n <= 40, "n must be in [1, 40]");
    require(p >= 1 && q >= 2 && q >= p, "need 1 <= p <= q and q >= 2");
    require(trials >= 1 && trials <= 100000, "trials must be in [1, 100000]");
    require(!spectral || (p == 2 && q == 2 && dim == 1 && target_p == 2), "spectral comparison needs p = q = 2 and a scalar function");
    const BallTable t = build_ball(n + 1);
    const std::int64_t K = k_max > 0 ? k_max : 4 * n * n;
    Json rows = Json::array();
    double worst = 0;
    for (int s = 0; s < trials; ++s) {
      const auto f = lattice_function(t, function, dim, n, target_p, ctx.seed + static_cast<std::uint64_t>(s));
      const auto r = global_inequality_report(f, p, q, K);
      rows.push_back(report_json(r));
      if (std::isfinite(r.ratio)) worst = std::max(worst, r.ratio);
    }
    ctx.result["trials"] = rows;
    ctx.result["max_ratio"] = worst;
    if (spectral) {
      const auto sr = optimal_constant_spectral(t, n);
      ctx.result["spectral_bound"] = sr.ratio_bound;
      ctx.result["within_bound"] = worst <= sr.ratio_bound + 1e-8;
      ctx.constant("spectral_bound", sr.ratio_bound, "measured", "largest generalized eigenvalue, square root");
    }
  }
};

class SpectralCommand : public Command {
  std::int64_t n = 2, multiplier = 21, k_max = 0;
  std::string form = "global";

 public:
  std::string name() const override { return "spectral"; }
  std::string help() const override { return "Optimal constant for p = q = 2 by a generalized eigenproblem"; }
  void define(Params& ps) override {
    ps.add("n", n, "support radius n")->required();
    ps.add("form", form, "global or local")->check(CLI::IsMember({"global", "local"}));
    ps.add("multiplier", multiplier, "local form: horizontal side over B_{multiplier n}");
    ps.add("k-max", k_max, "vertical range (0: all k for global, n^2 for local)");
  }
  void run(Context& ctx) override {
    require(n >= 1 && n <= 40, "n must be in [1, 40]");
    require(multiplier >= 1, "multiplier must be >= 1");
    require(k_max >= 0, "k-max must be >= 0");
    SpectralOptions opt;
    opt.form = form == "local" ? SpectralForm::Local : SpectralForm::Global;
    opt.multiplier = multiplier;
    opt.k_max = k_max;
    std::int64_t need = n + 1;
    if (opt.form == SpectralForm::Local) {
      const std::int64_t K = k_max > 0 ? k_max : n * n;
      const auto root = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(K))));
      need = std::max(multiplier * n + 1, n + 4 * root);
    }
    const BallTable t = build_ball(need);
    const auto r = optimal_constant_spectral(t, n, opt);
    ctx.result = {{"n", n},
                  {"form", form},
                  {"eigenvalue", r.eigenvalue},
                  {"ratio_bound", r.ratio_bound},
                  {"unknowns", r.unknowns},
                  {"iterations", r.iterations},
                  {"residual", r.residual},
                  {"dense", r.dense}};
    ctx.constant("K", r.eigenvalue, "measured", "constant of the squared inequality on this support");
  }
};

class KleinerCommand : public Command {
  std::int64_t n = 2;
  double p = 2;
  int dim = 2, trials = 10;

 public:
  std::string name() const override { return "kleiner"; }
  std::string help() const override { return "Pairwise sum on B_n against the path-counting bound, random functions"; }
  void define(Params& ps) override {
    ps.add("n", n, "ball radius n")->required();
    ps.add("p", p, "exponent p");
    ps.add("dim", dim, "target dimension");
    ps.add("trials", trials, "random functions");
  }
  void run(Context& ctx) override {
    require(n >= 1 && n <= 12, "n must be in [1, 12]");
    require(p >= 1, "p must be >= 1");
    require(trials >= 1 && trials <= 10000, "trials must be in [1, 10000]");
    const BallTable t = build_ball(3 * n + 1);
    Json rows = Json::array();
    bool all = true;
    for (int s = 0; s < trials; ++s) {
      const auto f = lattice_function(t, "random", dim, 3 * n + 1, 2.0, ctx.seed + static_cast<std::uint64_t>(s));
      const auto r = kleiner_local_check(f, n, p);
      const bool ok = r.lhs <= r.rhs_with_constant;
      all = all && ok;
      rows.push_back({{"lhs", r.lhs}, {"rhs_with_constant", r.rhs_with_constant}, {"constant", r.constant}, {"holds", ok}});
    }
    ctx.result = {{"n", n}, {"p", p}, {"trials", rows}, {"all_hold", all}};
    ctx.constant("path_constant", rows[0]["constant"].get<double>(), "fixed", "(2n)^{p-1} |B_2n| 2n");
  }
};

class Ell1Command : public Command {
  std::int64_t n = 2, multiplier = 21;
  std::string function = "x";

 public:
  std::string name() const override { return "ell1-conjecture"; }
  std::string help() const override { return "l_1 form with weights k^{-3/2} for a map defined on the whole group"; }
  void define(Params& ps) override {
    ps.add("n", n, "ball radius n")->required();
    ps.add("multiplier", multiplier, "horizontal side over B_{multiplier n}");
    ps.add("function", function, "x, z, xy or xyz");
  }
  void run(Context& ctx) override {
    require(n >= 2 && n <= 64, "n must be in [2, 64]");
    require(multiplier >= 1, "multiplier must be >= 1");
    Evaluator f;
    int dim = 1;
    if (function == "x") f = [](const GroupElement& g, std::span<double> o) { o[0] = static_cast<double>(g.x); };
    else if (function == "z") f = [](const GroupElement& g, std::span<double> o) { o[0] = static_cast<double>(g.z); };
    else if (function == "xy") {
      dim = 2;
      f = [](const GroupElement& g, std::span<double> o) {
        o[0] = static_cast<double>(g.x);
        o[1] = static_cast<double>(g.y);
      };
    } else if (function == "xyz") {
      dim = 3;
      f = [](const GroupElement& g, std::span<double> o) {
        o[0] = static_cast<double>(g.x);
        o[1] = static_cast<double>(g.y);
        o[2] = static_cast<double>(g.z);
      };
    } else {
      throw InvalidArgument("unknown function '" + function + "' (x, z, xy, xyz)");
    }
    const auto r = ell1_conjecture_report(f, dim, n, multiplier);
    ctx.result = {{"n", r.n}, {"multiplier", r.multiplier}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"normalized_ratio", r.normalized_ratio},
                  {"defined", r.defined}};
  }
};

}  // namespace

std::vector<std::unique_ptr<Command>> group_commands() {
  std::vector<std::unique_ptr<Command>> v;
  v.push_back(std::make_unique<BallCommand>());
  v.push_back(std::make_unique<LocalCommand>());
  v.push_back(std::make_unique<GlobalCommand>());
  v.push_back(std::make_unique<SpectralCommand>());
  v.push_back(std::make_unique<KleinerCommand>());
  v.push_back(std::make_unique<Ell1Command>());
  return v;
}

}  // namespace heis::cli
