#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "command.hpp"
#include "heislab/continuous.hpp"
#include "heislab/error.hpp"
#include "heislab/kernels.hpp"
#include "heislab/perimeter.hpp"

namespace heis::cli {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

class KernelCommand : public Command {
  std::string t_list = "0.1,1,10";
  double tol = 1e-6, h = 1e-3, L = 50;
  bool semigroup = false;

 public:
  std::string name() const override { return "kernel-check"; }
  std::string help() const override { return "Mass, half moment and L1 norms of the Poisson kernel and its derivatives"; }
  void define(Params& ps) override {
    ps.add("t", t_list, "comma-separated kernel scales");
    ps.add("tol", tol, "relative tolerance");
    ps.flag("semigroup", semigroup, "also check P_2t = P_t*P_t and Q_2t = P_t*Q_t on a grid");
    ps.add("spacing", h, "semigroup grid spacing");
    ps.add("window", L, "semigroup window half-width");
  }
  void run(Context& ctx) override {
    const auto ts = parse_list(t_list, "t");
    require(!ts.empty(), "need at least one t");
    for (double t : ts) require(t > 0 && std::isfinite(t), "t must be positive");
    require(tol > 0 && tol < 1, "tol must be in (0, 1)");
    Json rows = Json::array();
    bool all = true;
    for (double t : ts) {
      Json checks = Json::array();
      for (const auto& c : kernel_identity_suite(t, tol)) {
        const bool ok = c.rel_error <= tol;
        all = all && ok;
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"exact", c.exact},
                          {"abs_error", c.abs_error},
                          {"rel_error", c.rel_error},
                          {"quadrature_error", c.quadrature_error},
                          {"pass", ok}});
      }
      Json row{{"t", t}, {"identities", checks}};
      if (semigroup) {
        const auto s = semigroup_check(t, h, L);
        const bool ok = s.pp_l1 < 1e-5 && s.pq_l1 < 1e-5;
        all = all && ok;
        row["semigroup"] = {{"pp_l1", s.pp_l1}, {"pq_l1", s.pq_l1}, {"pass", ok}};
      }
      rows.push_back(row);
    }
    ctx.result = {{"tol", tol}, {"rows", rows}, {"all_pass", all}};
    ctx.constant("mass_P", 1.0, "fixed");
    ctx.constant("norm_Q_times_t", 2 / std::numbers::pi, "fixed", "||Q_t||_1 = 2/(pi t)");
    ctx.constant("norm_R_times_t", 2 / std::numbers::pi, "fixed", "||R_t||_1 = 2/(pi t)");
  }
};

struct BumpOptions {
  std::string family = "product";
  double R = 1.5, Rz = 1.5;
  std::size_t cells = 64;
  std::string box;

  void define(Params& ps) {
    ps.add("family", family, "product, koranyi, euclidean or gaussian");
    ps.add("R", R, "horizontal radius");
    ps.add("Rz", Rz, "vertical radius");
    ps.add("cells", cells, "cells per axis");
    ps.add("box", box, "half-widths Lx,Ly,Lz (default: 1.1 x support)");
  }
  Bump bump() const { return {bump_family_from(family), R, Rz, 1.0}; }
  GridSpec grid(const Bump& b) const {
    require(cells >= 8 && cells <= 512, "cells must be in [8, 512]");
    require(b.R > 0 && b.Rz > 0, "R and Rz must be positive");
    std::vector<double> L = parse_list(box, "box");
    if (L.empty()) {
      double zs = b.Rz;
      if (b.family == BumpFamily::Koranyi) zs = b.Rz / 4;
      if (b.family == BumpFamily::Gaussian) L = {9 * b.R, 9 * b.R, 9 * b.Rz};
      else L = {1.1 * b.R, 1.1 * b.R, 1.1 * zs};
    }
    require(L.size() == 3, "box needs three half-widths");
    GridSpec s{cells, cells, cells, L[0], L[1], L[2]};
    s.validate();
    return s;
  }
};

GridFunction sample(const GridSpec& s, const Bump& b) {
  return GridFunction::sample(s, 1, [&](double x, double y, double z, std::span<double> o) { o[0] = b(x, y, z); });
}

Json continuous_json(const ContinuousReport& r) {
  return {{"p", r.base.p},
          {"q", r.base.q},
          {"lhs", r.base.lhs},
          {"rhs", r.base.rhs},
          {"ratio", r.base.ratio},
          {"ratio_error", r.ratio_error},
          {"vertical",
           {{"bulk", r.vertical.bulk},
            {"small_tail", r.vertical.small_tail},
            {"large_tail", r.vertical.large_tail},
            {"large_tail_exact", r.vertical.large_tail_exact},
            {"error_bar", r.vertical.has_error_bar ? Json(r.vertical.error_bar) : Json(nullptr)}}},
          {"horizontal_error_bar", r.horizontal.has_error_bar ? Json(r.horizontal.error_bar) : Json(nullptr)},
          {"outside_theorem", r.outside_theorem},
          {"degenerate", r.degenerate}};
}

class ContinuousCommand : public Command {
  BumpOptions bo;
  double p = 2, q = 2, dilate = 0;

 public:
  std::string name() const override { return "continuous-check"; }
  std::string help() const override { return "Continuous vertical-versus-horizontal inequality for a bump on a grid"; }
  void define(Params& ps) override {
    bo.define(ps);
    ps.add("p", p, "exponent p");
    ps.add("q", q, "exponent q");
    ps.add("dilate", dilate, "also evaluate f after dilation by this factor (0: off)");
  }
  void run(Context& ctx) override {
    require(p >= 1 && q >= 2 && q >= p, "need 1 <= p <= q and q >= 2");
    require(dilate == 0 || dilate > 0, "dilate must be positive");
    const Bump b = bo.bump();
    const GridSpec s = bo.grid(b);
    const auto r = continuous_inequality_report(sample(s, b), p, q);
    ctx.result = {{"family", bo.family}, {"cells", bo.cells}, {"box", {s.Lx, s.Ly, s.Lz}}, {"report", continuous_json(r)}};
    if (dilate > 0) {
      const auto r1 = continuous_inequality_report(sample(s, b.dilated(dilate)), p, q);
      const double expected = std::pow(dilate, 1 - 4 / p);
      ctx.result["dilated"] = {{"lambda", dilate},
                               {"report", continuous_json(r1)},
                               {"expected_factor", expected},
                               {"lhs_factor", r1.base.lhs / r.base.lhs},
                               {"rhs_factor", r1.base.rhs / r.base.rhs}};
      ctx.constant("dilation_exponent", 1 - 4 / p, "fixed", "both sides scale by lambda^(1 - 4/p)");
    }
  }
};

class GFunctionCommand : public Command {
  BumpOptions bo;
  double q = 2, p_norm = 2;
  int per_decade = 12;

 public:
  std::string name() const override { return "gfunction"; }
  std::string help() const override { return "Vertical Littlewood-Paley g-function of a bump"; }
  void define(Params& ps) override {
    bo.define(ps);
    ps.add("q", q, "exponent q >= 2");
    ps.add("p-norm", p_norm, "norm for ||g||_p / ||f||_p");
    ps.add("per-decade", per_decade, "t grid points per decade");
  }
  void run(Context& ctx) override {
    require(q >= 2, "q must be >= 2");
    require(p_norm >= 1, "p-norm must be >= 1");
    require(per_decade >= 2 && per_decade <= 200, "per-decade must be in [2, 200]");
    const Bump b = bo.bump();
    const GridSpec s = bo.grid(b);
    const auto ts = log_grid(s.hz(), 2 * s.Lz - s.hz(), per_decade);
    const auto r = g_function(sample(s, b), q, ts, p_norm);
    ctx.result = {{"family", bo.family},     {"cells", bo.cells},           {"box", {s.Lx, s.Ly, s.Lz}},
                  {"q", q},                   {"norm_ratio", r.norm_ratio}, {"tail_fraction", r.tail_fraction},
                  {"g_max", r.g.max_abs()}, {"t_points", ts.size()}};
  }
};

GradientNorm norm_from(const std::string& s) {
  if (s == "l1") return GradientNorm::L1;
  if (s == "l2") return GradientNorm::L2;
  throw InvalidArgument("norm must be l1 or l2");
}

class PerimeterCommand : public Command {
  std::string region = "koranyi_ball", t_list, norm = "l2", method = "surface";
  std::uint64_t mc_samples = 0;

 public:
  std::string name() const override { return "perimeter"; }
  std::string help() const override { return "Vertical perimeter v_t and horizontal perimeter of a library region"; }
  std::vector<std::string> formats() const override { return {"json", "csv"}; }
  void define(Params& ps) override {
    ps.add("region", region, "cube, euclidean_ball, koranyi_ball, cylinder or paraboloid_cap");
    ps.add("t", t_list, "comma-separated t values (default: 2^-10 .. 2)");
    ps.add("norm", norm, "l1 or l2 gradient norm");
    ps.add("method", method, "surface or mollified")->check(CLI::IsMember({"surface", "mollified"}));
    ps.add("mc-samples", mc_samples, "Monte Carlo check of each v_t with this many samples (0: off)");
  }
  void run(Context& ctx) override {
    const RegionSpec A = region_by_name(region);
    const GradientNorm gn = norm_from(norm);
    std::vector<double> ts = parse_list(t_list, "t");
    if (ts.empty())
      for (int k = -10; k <= 1; ++k) ts.push_back(std::ldexp(1.0, k));
    for (double t : ts) require(t > 0 && std::isfinite(t), "t must be positive");
    require(mc_samples <= 1'000'000'000, "mc-samples too large");

    const double mu = region_measure(A);
    const double per = horizontal_perimeter(A, gn, method == "surface" ? PerimeterMethod::Surface : PerimeterMethod::Mollified);
    Json rows = Json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "t,v_t" << (mc_samples ? ",mc,mc_err" : "") << '\n';
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double v = vertical_perimeter(A, ts[i]);
      Json row{{"t", ts[i]}, {"v_t", v}};
      csv << ts[i] << ',' << v;
      if (mc_samples) {
        const auto m = vertical_perimeter_mc(A, ts[i], mc_samples, ctx.seed + i);
        row["mc"] = m.value;
        row["mc_std_error"] = m.std_error;
        csv << ',' << m.value << ',' << m.std_error;
      }
      csv << '\n';
      rows.push_back(row);
    }
    ctx.body = csv.str();
    ctx.result = {{"region", A.name}, {"measure", mu}, {"horizontal_perimeter", per}, {"norm", norm}, {"method", method}, {"v_t", rows}};
  }
};

class ConjectureCommand : public Command {
  std::string region = "all", eps_list;
  std::uint64_t mc_samples = 0;

 public:
  std::string name() const override { return "conjecture"; }
  std::string help() const override { return "Coarse vertical perimeter against horizontal perimeter, ratio tables"; }
  std::vector<std::string> formats() const override { return {"json", "csv"}; }
  void define(Params& ps) override {
    ps.add("region", region, "library region name or all");
    ps.add("eps", eps_list, "comma-separated eps values in (0, 1/2) (default: 2^-2 .. 2^-10)");
    ps.add("mc-samples", mc_samples, "Monte Carlo V at the smallest eps with N and 4N samples (0: off)");
  }
  void run(Context& ctx) override {
    std::vector<double> eps = parse_list(eps_list, "eps");
    if (eps.empty())
      for (int k = 2; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
    for (double e : eps) require(e > 0 && e < 0.5, "eps must be in (0, 1/2)");
    require(mc_samples <= 250'000'000, "mc-samples too large");
    std::vector<RegionSpec> regions;
    if (region == "all") regions = region_library();
    else regions.push_back(region_by_name(region));

    std::vector<PerimeterReport> reps;
    Json out = Json::array();
    for (const auto& A : regions) {
      const auto r = conjecture_report(A, eps);
      Json rows = Json::array();
      for (const auto& row : r.rows)
        rows.push_back({{"eps", row.eps},
                        {"log_inv_eps", row.log_inv_eps},
                        {"V", row.V},
                        {"W", row.W},
                        {"cs_bound", row.cs_bound},
                        {"cs_holds", row.cs_holds},
                        {"rho_l1", row.rho_l1},
                        {"rho_l2", row.rho_l2}});
      Json j{{"region", r.region},
             {"measure", r.measure},
             {"t_saturation", r.t_saturation},
             {"per_l1", r.per_l1},
             {"per_l2", r.per_l2},
             {"sq_integral", r.sq_integral},
             {"sigma2_l1", r.sigma2_l1},
             {"sigma2_l2", r.sigma2_l2},
             {"p2_variant", r.p2_variant},
             {"p4_variant", r.p4_variant},
             {"sup_proxy", r.sup_proxy},
             {"sup_proxy_t", r.sup_proxy_t},
             {"rows", rows}};
      if (mc_samples) {
        const double e = *std::min_element(eps.begin(), eps.end());
        const auto a = coarse_total_vertical_perimeter_mc(A, e, mc_samples, ctx.seed);
        const auto b = coarse_total_vertical_perimeter_mc(A, e, 4 * mc_samples, ctx.seed + 1);
        j["monte_carlo"] = {{"eps", e},
                            {"N", a.value},
                            {"N_std_error", a.std_error},
                            {"4N", b.value},
                            {"4N_std_error", b.std_error},
                            {"relative_difference", std::abs(a.value - b.value) / b.value}};
      }
      out.push_back(j);
      reps.push_back(r);
    }
    std::ostringstream csv;
    write_report_csv(csv, reps);
    ctx.body = csv.str();
    ctx.result = {{"regions", out}};
  }
};

}  // namespace

std::vector<std::unique_ptr<Command>> analysis_commands() {
  std::vector<std::unique_ptr<Command>> v;
  v.push_back(std::make_unique<KernelCommand>());
  v.push_back(std::make_unique<ContinuousCommand>());
  v.push_back(std::make_unique<GFunctionCommand>());
  v.push_back(std::make_unique<PerimeterCommand>());
  v.push_back(std::make_unique<ConjectureCommand>());
  return v;
}

}  // namespace heis::cli
