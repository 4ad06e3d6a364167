#include "pkpart/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkpart/quadrature.hpp"

namespace pkpart::specfun {

namespace {

constexpr double kLogPi = 1.144729885849400174143427351353058712;
constexpr double kLn2 = 0.693147180559945309417232121458176568;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw BoundsError("alpha must lie in (0, 1)");
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

// Lower-tail inverse normal for p <= 1/2: rational start (Acklam) followed by
// two Halley steps against erfc.
double lower_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double bessel_k1_any(double x) {
  // K_1(x) = e^{-x} int_0^inf exp(-x (cosh u - 1)) cosh u du
  auto f = [x](double u) {
    const double s = std::sinh(0.5 * u);
    return std::exp(-2.0 * x * s * s) * std::cosh(u);
  };
  const double upper = std::acosh(1.0 + 745.0 / x);
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  opt.throw_on_failure = false;
  return std::exp(-x) * quad::integrate(f, 0.0, upper, opt).value;
}

struct SeriesOutcome {
  double value;
  double cancellation;
};

SeriesOutcome stable_series(double alpha, double t) {
  const double lt = std::log(t);
  double sum = 0.0, comp = 0.0, max_term = 0.0;
  double prev_mag = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 5000; ++k) {
    const double mag = std::lgamma(alpha * k + 1.0) - std::lgamma(k + 1.0) -
                       (alpha * k + 1.0) * lt - kLogPi;
    const double s = std::sin(kPi * alpha * k) * ((k % 2 == 1) ? 1.0 : -1.0);
    const double term = s * std::exp(mag);
    const double nt = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - nt) + term : (term - nt) + sum;
    sum = nt;
    max_term = std::max(max_term, std::abs(term));
    const double total = std::abs(sum + comp);
    if (mag < prev_mag && total > 0.0 && std::exp(mag) < 1e-18 * total) break;
    prev_mag = mag;
  }
  const double value = sum + comp;
  const double ratio = value > 0.0 ? max_term / value : std::numeric_limits<double>::infinity();
  return {value, ratio};
}

}  // namespace

double log_abs_gamma(double x) {
  if (x <= 0.0 && is_integer(x)) throw BoundsError("Gamma has a pole at non-positive integers");
  if (x > 0.0) return std::lgamma(x);
  // Reflection keeps this re-entrant (no signgam).
  return kLogPi - std::log(std::abs(std::sin(kPi * x))) - std::lgamma(1.0 - x);
}

double gamma_sign(double x) {
  if (x > 0.0) return 1.0;
  if (is_integer(x)) throw BoundsError("Gamma has a pole at non-positive integers");
  return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

double log_rising(double x, int m) {
  if (!(x > 0.0)) throw BoundsError("log_rising: x must be positive");
  if (m < 0) throw BoundsError("log_rising: negative length");
  return std::lgamma(x + m) - std::lgamma(x);
}

double rising_step(double x, int m, double a) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= x + i * a;
  return r;
}

double gaussian_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double gaussian_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / kSqrt2);
}

double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw BoundsError("gaussian_quantile: p must lie in (0, 1)");
  return p <= 0.5 ? lower_quantile(p) : -lower_quantile(1.0 - p);
}

double gaussian_upper_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw BoundsError("gaussian_upper_quantile: q must lie in (0, 1)");
  return q <= 0.5 ? -lower_quantile(q) : lower_quantile(1.0 - q);
}

double mills_ratio(double x) {
  if (std::isnan(x)) return x;
  if (x < 3.0) return std::sqrt(0.5 * kPi) * std::exp(0.5 * x * x) * std::erfc(x / kSqrt2);
  // 1 / (x + 1/(x + 2/(x + 3/(x + ...)))) by modified Lentz.
  constexpr double tiny = 1e-300;
  double f = x, c = x, d = 0.0;
  for (int j = 1; j < 5000; ++j) {
    d = x + j * d;
    if (d == 0.0) d = tiny;
    c = x + j / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

std::string_view to_string(HermiteMethod m) {
  switch (m) {
    case HermiteMethod::closed_form: return "closed_form";
    case HermiteMethod::series: return "series";
    case HermiteMethod::integral: return "integral";
    case HermiteMethod::downward_recursion: return "downward_recursion";
  }
  return "unknown";
}

double log_hermite_integral(double nu, double z) {
  if (!(nu < 0.0)) throw BoundsError("log_hermite_integral: nu must be negative");
  if (!(z >= 0.0)) throw BoundsError("log_hermite_integral: z must be non-negative");
  const double q = -0.5 * nu;
  const double r2z = kSqrt2 * z;
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  opt.throw_on_failure = false;
  // [0, 1]: v = w^{1/q} absorbs v^{q-1}.
  auto head = [&](double w) {
    const double v = std::pow(w, 1.0 / q);
    return std::exp(-v - r2z * std::sqrt(v));
  };
  const double a = quad::integrate(head, 0.0, 1.0, opt).value / q;
  // [1, inf), scaled by the peak of the log-integrand.
  auto logf = [&](double v) { return (q - 1.0) * std::log(v) - v - r2z * std::sqrt(v); };
  double vpeak = 1.0;
  if (q > 1.0) {
    double lo = 1.0, hi = q + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double slope = (q - 1.0) / mid - 1.0 - r2z / (2.0 * std::sqrt(mid));
      (slope > 0.0 ? lo : hi) = mid;
    }
    vpeak = 0.5 * (lo + hi);
  }
  const double peak = logf(vpeak);
  auto tail = [&](double v) { return std::exp(logf(v) - peak); };
  double b = 0.0;
  if (vpeak > 1.0) {
    b = quad::integrate(tail, 1.0, vpeak, opt).value +
        quad::integrate_to_infinity(tail, vpeak, opt).value;
  } else {
    b = quad::integrate_to_infinity(tail, 1.0, opt).value;
  }
  double log_sum;
  if (peak > 0.0) {
    log_sum = peak + std::log(a * std::exp(-peak) + b);
  } else {
    log_sum = std::log(a + std::exp(peak) * b);
  }
  return (q - 1.0) * kLn2 - std::lgamma(2.0 * q) + log_sum;
}

double hermite_h_series(double nu, double z) {
  if (nu == 0.0) return 1.0;
  if (is_integer(nu) && nu > 0.0) throw BoundsError("hermite_h_series: positive integer index");
  if (!(z >= 0.0)) throw BoundsError("hermite_h_series: z must be non-negative");
  // h_{-2q}(z) = 1/(2 Gamma(2q)) sum_j Gamma(q + j/2) 2^{q + j/2} (-z)^j / j!
  const double q = -0.5 * nu;
  const double inv_gamma_2q = gamma_sign(2.0 * q) * std::exp(-log_abs_gamma(2.0 * q));
  double sum = 0.0;
  for (int j = 0; j < 400; ++j) {
    const double arg = q + 0.5 * j;
    const double lmag = log_abs_gamma(arg) + (q + 0.5 * j) * kLn2 +
                        (j > 0 ? j * std::log(z) : 0.0) - std::lgamma(j + 1.0);
    const double sign = gamma_sign(arg) * ((j % 2 == 1) ? -1.0 : 1.0);
    const double term = z == 0.0 && j > 0 ? 0.0 : sign * std::exp(lmag);
    sum += term;
    if (j > 10 && std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return 0.5 * inv_gamma_2q * sum;
}

HermiteLadder::HermiteLadder(double z, int depth) : z_(z), depth_(depth) {
  if (!(z >= 0.0 && z <= kHermiteMaxZ)) throw BoundsError("HermiteLadder: z must lie in [0, 40]");
  if (depth < 0) throw BoundsError("HermiteLadder: negative depth");
  // log I_j with I_j = int_0^inf t^j exp(-t^2/2 - z t) dt, so h_{-m} = I_{m-1} / Gamma(m).
  auto log_moment = [z](int j) {
    const double tpk = j == 0 ? 1.0 : 0.5 * (-z + std::sqrt(z * z + 4.0 * j));
    const double peak = j == 0 ? 0.0 : j * std::log(tpk) - 0.5 * tpk * tpk - z * tpk;
    auto f = [&](double t) {
      return std::exp(j * std::log(t) - 0.5 * t * t - z * t - peak);
    };
    quad::Options opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-13;
    opt.throw_on_failure = false;
    return peak + std::log(quad::integrate_log_scale(f, opt, std::log(tpk)).value);
  };
  const int seed = depth + 1;
  ratio_.assign(seed + 1, 0.0);
  ratio_[seed] = std::exp(std::log(static_cast<double>(seed)) + log_moment(seed - 1) -
                          log_moment(seed));
  for (int m = seed; m >= 1; --m) ratio_[m - 1] = z + m / ratio_[m];
  log_h_.assign(seed + 1, 0.0);
  for (int m = 1; m <= seed; ++m) log_h_[m] = log_h_[m - 1] - std::log(ratio_[m - 1]);
  ratio_.pop_back();  // the seed itself is not exposed
}

double HermiteLadder::value(int m) const { return std::exp(log_value(m)); }

HermiteValue hermite_h(double nu, double z) {
  if (!(nu <= 1.0)) throw BoundsError("hermite_h: nu must not exceed 1");
  if (!(z >= 0.0 && z <= kHermiteMaxZ)) throw BoundsError("hermite_h: z must lie in [0, 40]");
  if (nu == 0.0) return {1.0, HermiteMethod::closed_form};
  if (nu == 1.0) return {z, HermiteMethod::closed_form};
  if (nu == -1.0) return {mills_ratio(z), HermiteMethod::closed_form};
  if (is_integer(nu)) {
    const int m = static_cast<int>(-nu);
    return {HermiteLadder(z, m).value(m), HermiteMethod::downward_recursion};
  }
  if (nu < 0.0) return {std::exp(log_hermite_integral(nu, z)), HermiteMethod::integral};
  // 0 < nu < 1: h_nu = z h_{nu-1} + (1 - nu) h_{nu-2}, both terms positive.
  const double h1 = std::exp(log_hermite_integral(nu - 1.0, z));
  const double h2 = std::exp(log_hermite_integral(nu - 2.0, z));
  return {z * h1 + (1.0 - nu) * h2, HermiteMethod::integral};
}

std::string_view to_string(StableMethod m) {
  switch (m) {
    case StableMethod::closed_form: return "closed_form";
    case StableMethod::series: return "series";
    case StableMethod::integral: return "integral";
  }
  return "unknown";
}

double stable_density_series(double alpha, double t) {
  require_alpha(alpha);
  if (!(t > 0.0)) throw BoundsError("stable_density_series: t must be positive");
  const auto out = stable_series(alpha, t);
  if (!(out.cancellation <= kStableSeriesMaxCancellation))
    throw NumericalError("stable_density_series: cancellation budget exceeded");
  return out.value;
}

double stable_density_integral(double alpha, double t) {
  require_alpha(alpha);
  if (!(t > 0.0)) throw BoundsError("stable_density_integral: t must be positive");
  const double lt = std::log(t);
  const double scale = std::exp(-alpha / (1.0 - alpha) * lt);
  const double inv = 1.0 / (1.0 - alpha);
  auto integrand = [&](double u) {
    const double la = inv * (std::log(std::sin(alpha * u)) - std::log(std::sin(u))) +
                      std::log(std::sin((1.0 - alpha) * u)) - std::log(std::sin(alpha * u));
    const double a = std::exp(la);
    return std::exp(la - scale * a);
  };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  opt.throw_on_failure = false;
  const double integral = quad::integrate(integrand, 0.0, kPi, opt).value;
  if (integral == 0.0) return 0.0;
  return alpha * inv / kPi * std::exp(-lt * inv) * integral;
}

StableValue stable_density(double alpha, double t) {
  require_alpha(alpha);
  if (!(t > 0.0)) throw BoundsError("stable_density: t must be positive");
  if (alpha == 0.5) {
    return {std::exp(-0.25 / t) / (2.0 * kSqrtPi * t * std::sqrt(t)), StableMethod::closed_form};
  }
  // Rough log of the cancellation ratio: twice the exponent in the small-t
  // decay exp(-(1-alpha) alpha^{alpha/(1-alpha)} t^{-alpha/(1-alpha)}).
  const double expo = (1.0 - alpha) * std::pow(alpha, alpha / (1.0 - alpha)) *
                      std::pow(t, -alpha / (1.0 - alpha));
  if (2.0 * expo < 12.0) {
    const auto s = stable_series(alpha, t);
    if (s.cancellation <= 1e3) return {s.value, StableMethod::series};
  }
  return {stable_density_integral(alpha, t), StableMethod::integral};
}

double bessel_k1(double x) {
  if (!(x >= 1e-3 && x <= 50.0)) throw BoundsError("bessel_k1: x must lie in [1e-3, 50]");
  return bessel_k1_any(x);
}

StructuralParams StructuralParams::brownian(double lambda) {
  if (!(lambda > 0.0)) throw BoundsError("lambda must be positive");
  return {0.5, 0.5 / (lambda * lambda)};
}

double structural_density_brownian(double lambda, double p) {
  if (!(lambda > 0.0)) throw BoundsError("lambda must be positive");
  if (!(p > 0.0 && p < 1.0)) throw BoundsError("p must lie in (0, 1)");
  const double q = 1.0 - p;
  return lambda / std::sqrt(2.0 * kPi) / std::sqrt(p) / (q * std::sqrt(q)) *
         std::exp(-0.5 * lambda * lambda * p / q);
}

double structural_density(const StructuralParams& params, double p) {
  require_alpha(params.alpha);
  if (!(params.t > 0.0)) throw BoundsError("t must be positive");
  if (!(p > 0.0 && p < 1.0)) throw BoundsError("p must lie in (0, 1)");
  if (params.alpha == 0.5) return structural_density_brownian(1.0 / std::sqrt(2.0 * params.t), p);
  const double a = params.alpha;
  const double num = stable_density(a, (1.0 - p) * params.t).value;
  if (num == 0.0) return 0.0;
  return a * std::exp(-a * std::log(p * params.t) - std::lgamma(1.0 - a)) * num /
         stable_density(a, params.t).value;
}

double structural_cdf_brownian(double lambda, double y) {
  if (!(lambda > 0.0)) throw BoundsError("lambda must be positive");
  if (!(y >= 0.0 && y < 1.0)) throw BoundsError("y must lie in [0, 1)");
  // 2 Phi(x) - 1 = erf(x / sqrt 2)
  return std::erf(lambda * std::sqrt(y / (1.0 - y)) / kSqrt2);
}

double structural_quantile_brownian(double lambda, double u) {
  if (!(lambda > 0.0)) throw BoundsError("lambda must be positive");
  if (!(u >= 0.0 && u < 1.0)) throw BoundsError("u must lie in [0, 1)");
  if (u == 0.0) return 0.0;
  const double z = gaussian_upper_quantile(0.5 * (1.0 - u));
  return z * z / (lambda * lambda + z * z);
}

double structural_density_invgauss(double b, double p) {
  if (!(b > 0.0)) throw BoundsError("b must be positive");
  if (!(p > 0.0 && p < 1.0)) throw BoundsError("p must lie in (0, 1)");
  const double x = std::sqrt(b / (1.0 - p));
  if (x < 1e-3) throw BoundsError("structural_density_invgauss: K_1 argument below 1e-3");
  const double rb = std::sqrt(b);
  // K_1 is evaluated without the public domain cap so that p -> 1 decays to 0.
  const double k1 = bessel_k1_any(x);
  if (k1 == 0.0) return 0.0;
  return rb * std::exp(rb) / (kPi * std::sqrt(p) * (1.0 - p)) * k1;
}

double structural_moment_quadrature(double alpha, double q, double t) {
  require_alpha(alpha);
  if (!(t > 0.0)) throw BoundsError("t must be positive");
  if (!(q > alpha - 1.0)) throw BoundsError("structural_moment: q must exceed alpha - 1");
  const double ft = stable_density(alpha, t).value;
  auto g = [&](double p) {
    if (p >= 1.0) return 0.0;
    return stable_density(alpha, (1.0 - p) * t).value;
  };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-12;
  const auto r = quad::integrate_power_left(g, q - alpha, 1.0, opt);
  return alpha * std::exp(-alpha * std::log(t) - std::lgamma(1.0 - alpha)) * r.value / ft;
}

double structural_moment_hermite(double q, double lambda) {
  if (!(q > -0.5)) throw BoundsError("structural_moment_hermite: q must exceed -1/2");
  return gaussian_abs_moment(q) * hermite_h(-2.0 * q, lambda).value;
}

double structural_moment(double alpha, double q, double t) {
  require_alpha(alpha);
  if (!(t > 0.0)) throw BoundsError("t must be positive");
  if (q == 0.0) return 1.0;
  if (alpha == 0.5) {
    const double lambda = 1.0 / std::sqrt(2.0 * t);
    if (lambda <= kHermiteMaxZ) return structural_moment_hermite(q, lambda);
  }
  return structural_moment_quadrature(alpha, q, t);
}

double gaussian_abs_moment(double theta) {
  if (!(theta > -0.5)) throw BoundsError("gaussian_abs_moment: theta must exceed -1/2");
  return std::exp(theta * kLn2 + std::lgamma(theta + 0.5) - 0.5 * kLogPi);
}

double c_alpha_theta(double alpha, double theta) {
  require_alpha(alpha);
  if (!(theta > -alpha)) throw BoundsError("c_alpha_theta: theta must exceed -alpha");
  return std::exp(std::lgamma(theta / alpha + 1.0) - std::lgamma(theta + 1.0));
}

}  // namespace pkpart::specfun
