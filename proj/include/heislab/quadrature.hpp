#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration for scalar and small
// vector-valued integrands. Vector integrands share nodes across components,
// so inequalities between components hold at the discrete level.

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "heislab/error.hpp"

namespace heis::quad {

template <std::size_t N>
using Values = std::array<double, N>;

template <std::size_t N>
struct ResultN {
  Values<N> value{};
  Values<N> error{};
  int intervals = 0;
  bool converged = false;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  bool throw_on_failure = true;
};

namespace detail {

template <std::size_t N>
struct Panel {
  double a, b;
  Values<N> value, error;
  double score;  // largest component error, used for bisection priority
  bool operator<(const Panel& o) const { return score < o.score || (score == o.score && a > o.a); }
};

template <std::size_t N, class F>
Panel<N> gk15(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Values<N> k{}, g{};
  const Values<N> f0 = f(c);
  for (std::size_t j = 0; j < N; ++j) {
    k[j] = wk[0] * f0[j];
    g[j] = wg[0] * f0[j];
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Values<N> fl = f(c - h * x[i]);
    const Values<N> fr = f(c + h * x[i]);
    for (std::size_t j = 0; j < N; ++j) {
      k[j] += wk[i] * (fl[j] + fr[j]);
      if (i % 2 == 0) g[j] += wg[i / 2] * (fl[j] + fr[j]);
    }
  }
  Panel<N> p{a, b, {}, {}, 0.0};
  for (std::size_t j = 0; j < N; ++j) {
    p.value[j] = h * k[j];
    p.error[j] = std::abs(h * (k[j] - g[j]));
    p.score = std::max(p.score, p.error[j]);
  }
  return p;
}

}  // namespace detail

/// Integrates a vector-valued f over [a, b]. Converged when every component
/// satisfies error <= max(abs_tol, rel_tol * |value|).
template <std::size_t N, class F>
ResultN<N> integrate_n(F&& f, double a, double b, const Options& opt = {}) {
  ResultN<N> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel<N>> heap;
  heap.push(detail::gk15<N>(f, a, b));
  auto totals = [&](Values<N>& v, Values<N>& e) {
    v.fill(0.0);
    e.fill(0.0);
    auto copy = heap;
    std::vector<detail::Panel<N>> all;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
    for (const auto& p : all)
      for (std::size_t j = 0; j < N; ++j) {
        v[j] += p.value[j];
        e[j] += p.error[j];
      }
  };
  Values<N> v{}, e{};
  Values<N> run_v = heap.top().value, run_e = heap.top().error;
  for (;;) {
    bool ok = true;
    for (std::size_t j = 0; j < N; ++j)
      if (run_e[j] > std::max(opt.abs_tol, opt.rel_tol * std::abs(run_v[j]))) ok = false;
    if (ok || static_cast<int>(heap.size()) >= opt.max_intervals) {
      totals(v, e);
      ok = true;
      for (std::size_t j = 0; j < N; ++j)
        if (e[j] > std::max(opt.abs_tol, opt.rel_tol * std::abs(v[j]))) ok = false;
      if (ok || static_cast<int>(heap.size()) >= opt.max_intervals) break;
      run_v = v;
      run_e = e;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      totals(v, e);
      break;
    }
    const auto l = detail::gk15<N>(f, worst.a, mid);
    const auto r = detail::gk15<N>(f, mid, worst.b);
    for (std::size_t j = 0; j < N; ++j) {
      run_v[j] += l.value[j] + r.value[j] - worst.value[j];
      run_e[j] += l.error[j] + r.error[j] - worst.error[j];
    }
    heap.push(l);
    heap.push(r);
  }
  out.value = v;
  out.error = e;
  out.intervals = static_cast<int>(heap.size());
  out.converged = true;
  for (std::size_t j = 0; j < N; ++j)
    if (e[j] > std::max(opt.abs_tol, opt.rel_tol * std::abs(v[j]))) out.converged = false;
  if (!out.converged && opt.throw_on_failure) {
    double worst = 0.0;
    for (std::size_t j = 0; j < N; ++j) worst = std::max(worst, e[j] / std::max(std::abs(v[j]), 1e-300));
    throw QuadratureError("adaptive quadrature did not reach tolerance on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                          worst);
  }
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  auto g = [&](double x) { return Values<1>{f(x)}; };
  const auto r = integrate_n<1>(g, a, b, opt);
  return {r.value[0], r.error[0], r.intervals, r.converged};
}

/// Composite Gauss-Legendre rule with `panels` equal panels of order 20.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double step = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * step, h = 0.5 * step;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        s += w[i] * f(c);
      } else {
        s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
      }
    }
    total += h * s;
  }
  return total;
}

}  // namespace heis::quad
