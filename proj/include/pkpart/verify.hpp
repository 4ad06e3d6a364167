#pragma once

// Executable identity suite: exact enumeration checks, closed-form and
// quadrature cross-checks, exact rational identities and Monte Carlo
// comparisons, each producing a CheckReport.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkpart/models.hpp"
#include "pkpart/partitions.hpp"
#include "pkpart/random.hpp"

namespace pkpart::verify {

enum class Status { pass, fail, numerical_error };
std::string to_string(Status s);

struct CheckReport {
  std::string name;
  Status status = Status::pass;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  // Residual bound for deterministic checks; minimum p-value for statistical
  // ones (then `statistic` holds the smallest p-value or largest z-score seen).
  double tolerance = 0.0;
  std::optional<double> statistic;
  std::string grid;
  double runtime_seconds = 0.0;
  std::string detail;
};

nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const std::vector<CheckReport>& rs);
std::string csv_header();
std::string to_csv_row(const CheckReport& r);

// 0 all pass, 1 any fail, 2 any numerical error but no fail.
int exit_code(const std::vector<CheckReport>& rs);

// ---- statistics -----------------------------------------------------------

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  int bins = 0;  // after merging
  double p_value = 1.0;
};
// Pearson test of counts against probabilities. Categories with expected count
// below 5 are merged, smallest first.
ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& probs);

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_tail(double x);
struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};
KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys);

// ---- identity checks ------------------------------------------------------

using EppfFn = std::function<double(const Composition&)>;

// Sum of p over all set partitions of [n] equals 1, n = 1..n_max.
CheckReport check_normalization(const PartitionModel& model, int n_max);
CheckReport check_normalization(const std::string& label, const EppfFn& p, int n_max,
                                double tol);
// p(c) = sum_j p(c + e_j) + p(c, 1) for every composition with n <= n_max.
CheckReport check_addition_rules(const PartitionModel& model, int n_max);
CheckReport check_addition_rules(const std::string& label, const EppfFn& p, int n_max,
                                 double tol);
// First addition rules and their expression through moments of the
// structural distribution, p(n) = mu(n - 1).
CheckReport check_consistency_relations(const PartitionModel& model);
// Two-parameter model with theta = 0: p(2) = 1 - alpha, p(1,1) = alpha.
CheckReport check_point_values();

// Moment identity of the conditioned stable model over 1 <= k <= n <= n_max.
CheckReport check_moment_recursion(double alpha, double t, int n_max);
// h_{nu+1} = z h_nu - nu h_{nu-1} on nu in [-6, 0], z in [0, 5].
CheckReport check_recurh();
// h_{-2}, 2 h_{-3}, 6 h_{-4} through Mill's ratio on z in [0, 5].
CheckReport check_psi2_chain();
// 2 int l^{2 theta} h_{-2q}(l) phi(l) dl = 2^{-theta-q} Gamma(2 theta + 1) / Gamma(q + theta + 1).
CheckReport check_strq3(const std::vector<double>& thetas, const std::vector<double>& qs);
// Symmetric gamma series against its closed form; needs q + r + 1/2 < -1.
CheckReport check_idsymm(double q, double r);
// Exact: sum over shapes of #shape prod [1/2]_{n_i - 1} against the binomial form.
CheckReport check_hfiden(int n_max);
// Exact polynomial identities between Hermite coefficients and factorials.
CheckReport check_hermite_stirling(int m_max);

// PD(1/2, theta) as a mixture of the Brownian model over lambda.
CheckReport check_pdint(double theta, int n_max);
// Conditioned EPPF of c rho_alpha at t against the stable model at c^{-1/alpha} t.
CheckReport check_scaling(double alpha, const std::vector<double>& cs,
                          const std::vector<double>& ts, int n_max);
// Generalized gamma (alpha = 1/2) EPPF as a tilted mixture of Brownian models.
CheckReport check_pktilt(double b, double c, int n_max);
// Shape sums of the Brownian EPPF against the closed-form law of K_n.
CheckReport check_sumform(const std::vector<double>& lambdas, int n_max);
// K_3 law of the Brownian model against its Mill's ratio expansions.
CheckReport check_kn_small(const std::vector<double>& lambdas);
// Unconditional K_3 law = (3/8, 3/8, 1/4) exactly.
CheckReport check_kn_unconditional();
// Exact Bayes inversion of the unconditional chain, n <= n_max.
CheckReport check_bayes_inversion(int n_max);
// Two-parameter EPPF / prod [1 - alpha]_{n_i - 1} depends on (n, k) only.
CheckReport check_gibbs(double alpha, double theta, int n_max);
// Brownian Hermite EPPF against the stable(1/2) quadrature path.
CheckReport check_brownian_vs_stable(const std::vector<double>& lambdas, int n_max);
// Conditioned stable EPPF: moment form against convolution form.
CheckReport check_stable_alternative(double alpha, const std::vector<double>& ts, int n_max);
// Generic Levy quadrature against the Ewens and two-parameter closed forms.
CheckReport check_generic_levy(int n_max);

// ---- Monte Carlo ----------------------------------------------------------

using PartitionSampler = std::function<SetPartition(RandomSource&)>;

// Chi-square test of sampled partitions of [n] against the EPPF.
CheckReport mc_compare_eppf(const std::string& label, const PartitionModel& model, int n,
                            const PartitionSampler& sampler, int N, RandomSource& r);
// E[(T + sum J_i)^{-n}] prod kappa_{n_i} against the generic quadrature EPPF for
// the generalized gamma model with c = alpha / Gamma(1 - alpha).
CheckReport mc_cumulant_form(double alpha, double b, const Composition& c, int N,
                             RandomSource& r);
// First coordinate of the residual construction against the structural cdf.
CheckReport mc_residual_ks(double lambda, int N, RandomSource& r);
// p(2) after deleting the first k classes of PD(alpha, theta).
CheckReport mc_deletion(double alpha, double theta, int k, int N, RandomSource& r);
// Acceptance rate of the tilted-stable rejection sampler against exp(-b^alpha).
CheckReport mc_tilted_acceptance(double alpha, double b, int N, RandomSource& r);
// Mean of K_n along simulated chains against the exact mean.
CheckReport mc_kn_chain_mean(double lambda, int n, int N, RandomSource& r);

// ---- suite ----------------------------------------------------------------

enum class Tier { fast, full };

struct SuiteOptions {
  std::uint64_t seed = 0;
  Tier tier = Tier::fast;
  // Keep only checks whose family (name up to '[') equals one of these.
  std::vector<std::string> only;
  // 0: hardware concurrency, capped by PKPART_THREADS when set.
  int threads = 0;
};

// Names of all check families, in report order.
std::vector<std::string> check_families();
std::vector<CheckReport> run_all(const SuiteOptions& options);

}  // namespace pkpart::verify
