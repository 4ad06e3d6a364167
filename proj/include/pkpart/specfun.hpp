#pragma once

// Special functions for the stable(alpha) Poisson-Kingman model: Gaussian
// tails, the Hermite function h_nu (normalised so that h_0 = 1 and h_{-1} is
// Mill's ratio), stable densities, K_1 and the structural densities of the
// first size-biased frequency together with their moments.

#include <string_view>
#include <vector>

#include "pkpart/errors.hpp"

namespace pkpart::specfun {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341145183;

// log|Gamma(x)| and the sign of Gamma(x); x must not be a non-positive integer.
double log_abs_gamma(double x);
double gamma_sign(double x);
// Rising factorial [x]_m = x (x+1) ... (x+m-1) in log form, x > 0.
double log_rising(double x, int m);
// [x]_{m;a} = x (x+a) ... (x+(m-1)a), direct product.
double rising_step(double x, int m, double a);

double gaussian_pdf(double x);
// Phi(x); accurate to a few ulp in the lower tail via erfc.
double gaussian_cdf(double x);
// Inverse of Phi on (0,1).
double gaussian_quantile(double p);
// Inverse of the upper tail: x with 1 - Phi(x) = q.
double gaussian_upper_quantile(double q);

// h_{-1}(x) = P(B_1 > x) / phi(x), never formed as e^{x^2/2} times a tail.
double mills_ratio(double x);

enum class HermiteMethod { closed_form, series, integral, downward_recursion };
std::string_view to_string(HermiteMethod m);

struct HermiteValue {
  double value;
  HermiteMethod method;
};

inline constexpr double kHermiteMaxZ = 40.0;

// h_nu(z) for nu <= 1 and z in [0, 40].
HermiteValue hermite_h(double nu, double z);
// Integral representation, nu < 0 (any z >= 0). Returns log h_nu(z).
double log_hermite_integral(double nu, double z);
// Power series in z; only used as a cross-check for z <= 1.
double hermite_h_series(double nu, double z);

// Hermite function at the non-positive integers h_0(z), h_{-1}(z), ...,
// h_{-depth-1}(z). Built from the ratios R_m = h_{-m}/h_{-m-1}, which satisfy
// R_{m-1} = z + m / R_m; the recursion is seeded at the deepest index by a
// ratio of two integrals and run towards m = 0, where it is anchored by h_0 = 1.
class HermiteLadder {
 public:
  HermiteLadder(double z, int depth);

  double z() const { return z_; }
  int depth() const { return depth_; }
  // log h_{-m}(z), 0 <= m <= depth + 1.
  double log_value(int m) const { return log_h_.at(m); }
  double value(int m) const;
  // h_{-m}(z) / h_{-m-1}(z), 0 <= m <= depth.
  double ratio(int m) const { return ratio_.at(m); }

 private:
  double z_;
  int depth_;
  std::vector<double> ratio_;
  std::vector<double> log_h_;
};

enum class StableMethod { closed_form, series, integral };
std::string_view to_string(StableMethod m);

struct StableValue {
  double value;
  StableMethod method;
};

// Cancellation ratio (max |term| / |sum|) above which the series refuses.
inline constexpr double kStableSeriesMaxCancellation = 1e12;

// Density of T with E exp(-lambda T) = exp(-lambda^alpha), 0 < alpha < 1.
StableValue stable_density(double alpha, double t);
// Alternating series in t^{-alpha}; raises NumericalError when ill-conditioned.
double stable_density_series(double alpha, double t);
// Zolotarev-Kanter integral over (0, pi); positive integrand, any t > 0.
double stable_density_integral(double alpha, double t);

// Modified Bessel function K_1 for x in [1e-3, 50].
double bessel_k1(double x);

struct StructuralParams {
  double alpha;
  double t;
  // Brownian parameterisation: alpha = 1/2, t = 1 / (2 lambda^2).
  static StructuralParams brownian(double lambda);
};

// Density of the first size-biased frequency in the stable(alpha) model
// conditioned on T = t.
double structural_density(const StructuralParams& params, double p);
// Explicit alpha = 1/2 form in terms of lambda.
double structural_density_brownian(double lambda, double p);
double structural_cdf_brownian(double lambda, double y);
double structural_quantile_brownian(double lambda, double u);
// Unconditioned generalized-gamma (inverse Gaussian, alpha = 1/2) model with
// exponential rate b.
double structural_density_invgauss(double b, double p);

// mu_alpha(q | t) = int_0^1 p^q f(p | t) dp for q > alpha - 1. Uses the
// Hermite closed form when alpha == 1/2, quadrature otherwise.
double structural_moment(double alpha, double q, double t);
double structural_moment_quadrature(double alpha, double q, double t);
// alpha = 1/2: E|B_1|^{2q} h_{-2q}(lambda), q > -1/2.
double structural_moment_hermite(double q, double lambda);

// E|B_1|^{2 theta} = 2^theta Gamma(theta + 1/2) / Gamma(1/2), theta > -1/2.
double gaussian_abs_moment(double theta);
// C_{alpha,theta} = E_alpha T^{-theta} = Gamma(theta/alpha + 1) / Gamma(theta + 1).
double c_alpha_theta(double alpha, double theta);

}  // namespace pkpart::specfun
