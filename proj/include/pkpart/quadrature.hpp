#pragma once

// Adaptive Gauss-Kronrod integration with global subdivision, plus the
// variable changes used throughout the library (semi-infinite ranges, log
// scale with automatic tail truncation, power substitutions for endpoint
// singularities).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "pkpart/errors.hpp"

namespace pkpart::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
  // When false a non-converged integral is returned with its error estimate
  // instead of raising NumericalError.
  bool throw_on_failure = true;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

struct Rule {
  std::array<double, 11> x;   // Kronrod abscissae, x[0] = 0, ascending
  std::array<double, 11> wk;  // Kronrod weights
  std::array<double, 11> wg;  // Gauss weights on the same nodes (0 where absent)
};

const Rule& gk21();

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment apply_rule(F& f, double a, double b) {
  const Rule& r = gk21();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * r.wk[0];
  double resg = fc * r.wg[0];
  double resabs = std::abs(resk);
  std::array<double, 11> f1{}, f2{};
  for (int j = 1; j < 11; ++j) {
    const double dx = h * r.x[j];
    f1[j] = f(c - dx);
    f2[j] = f(c + dx);
    resk += r.wk[j] * (f1[j] + f2[j]);
    resg += r.wg[j] * (f1[j] + f2[j]);
    resabs += r.wk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
  }
  const double mean = 0.5 * resk;
  double resasc = r.wk[0] * std::abs(fc - mean);
  for (int j = 1; j < 11; ++j)
    resasc += r.wk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  resk *= h;
  resg *= h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
  return {a, b, resk, err};
}

[[noreturn]] void fail(const char* what, double a, double b, const Result& r);

}  // namespace detail

// Integral of f over the finite interval [a, b]. Nodes are interior, so
// integrable endpoint singularities are tolerated, but substitutions converge
// much faster.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  Result out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::apply_rule(f, a, b);
  out.evaluations = 21;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int intervals = 1;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (intervals >= opt.max_intervals) {
      out.converged = false;
      break;
    }
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;  // interval can no longer be split
      break;
    }
    heap.pop();
    auto left = detail::apply_rule(f, worst.a, mid);
    auto right = detail::apply_rule(f, mid, worst.b);
    out.evaluations += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed accumulated update error.
  total = 0.0;
  total_err = 0.0;
  for (; !heap.empty(); heap.pop()) {
    total += heap.top().value;
    total_err += heap.top().error;
  }
  out.value = sign * total;
  out.error = total_err;
  if (!std::isfinite(out.value)) out.converged = false;
  if (out.converged)
    out.converged = total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  if (!out.converged && opt.throw_on_failure) detail::fail("integrate", a, b, out);
  return out;
}

// Integral over [a, inf) through x = a + t/(1-t).
template <class F>
Result integrate_to_infinity(F&& f, double a, const Options& opt = {}) {
  auto g = [&](double t) {
    const double s = 1.0 - t;
    const double x = a + t / s;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v / (s * s);
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Integral over [0, b] of x^(power) * g(x) with power > -1, using x = b w^s,
// s = 1/(power+1), which turns the algebraic endpoint factor into a constant.
template <class G>
Result integrate_power_left(G&& g, double power, double b, const Options& opt = {}) {
  if (!(power > -1.0)) throw BoundsError("integrate_power_left: power must exceed -1");
  const double s = 1.0 / (power + 1.0);
  // x^power dx = b^(power+1) s w^(s(power+1)-1) dw = b^(power+1) s dw
  const double scale = std::pow(b, power + 1.0) * s;
  auto h = [&](double w) { return g(b * std::pow(w, s)); };
  Result r = integrate(h, 0.0, 1.0, opt);
  r.value *= scale;
  r.error *= std::abs(scale);
  return r;
}

// Integral over (0, inf) of a non-negative (or eventually one-signed) f,
// computed as the integral of e^u f(e^u) over a finite u-window. The window
// edges are pushed outwards until the estimated tail mass, from a local
// exponential fit of the integrand, is below tail_tol relative to the bulk.
template <class F>
Result integrate_log_scale(F&& f, const Options& opt = {}, double center = 0.0,
                           double tail_tol = 1e-13) {
  auto g = [&](double u) {
    const double x = std::exp(u);
    if (x == 0.0 || !std::isfinite(x)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : x * v;
  };
  // Locate the bulk: scan a coarse grid around the centre for the largest
  // value of |g|.
  double umax = center, gmax = std::abs(g(center));
  for (double du = 1.0; du <= 720.0; du *= 1.5) {
    for (double u : {center - du, center + du}) {
      const double v = std::abs(g(u));
      if (v > gmax) {
        gmax = v;
        umax = u;
      }
    }
  }
  if (gmax == 0.0) return {};
  auto tail_estimate = [&](double u, double dir) {
    // Mass beyond u assuming |g| decays like exp(-s |u' - u|).
    const double h = 0.25;
    const double g0 = std::abs(g(u));
    const double g1 = std::abs(g(u + dir * h));
    if (g0 == 0.0) return 0.0;
    if (g1 == 0.0) return g0 * h;
    const double slope = std::log(g0 / g1) / h;
    if (slope <= 0.0) return std::numeric_limits<double>::infinity();
    return g0 / slope;
  };
  const double limit = 745.0;
  double lo = umax - 2.0, hi = umax + 2.0;
  const double bulk = gmax;  // scale proxy; refined below
  double step = 2.0;
  while (tail_estimate(lo, -1.0) > tail_tol * bulk) {
    lo -= step;
    step *= 1.3;
    if (lo < -limit) {
      Result r;
      r.converged = false;
      detail::fail("integrate_log_scale (lower tail)", lo, hi, r);
    }
  }
  step = 2.0;
  while (tail_estimate(hi, +1.0) > tail_tol * bulk) {
    hi += step;
    step *= 1.3;
    if (hi > limit) {
      Result r;
      r.converged = false;
      detail::fail("integrate_log_scale (upper tail)", lo, hi, r);
    }
  }
  Result r = integrate(g, lo, hi, opt);
  r.error += (tail_estimate(lo, -1.0) + tail_estimate(hi, +1.0));
  return r;
}

}  // namespace pkpart::quad
