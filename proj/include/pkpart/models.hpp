#pragma once

// EPPFs of the Poisson-Kingman families, prediction rules, block-count laws of
// the Brownian (alpha = 1/2) model, power-sum moments and the generic
// one-dimensional Levy-exponent quadrature.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pkpart/partitions.hpp"
#include "pkpart/specfun.hpp"

namespace pkpart {

struct Ewens {
  double theta;
};
struct TwoParam {
  double alpha;
  double theta;
};
struct StableConditioned {
  double alpha;
  double t;
};
struct BrownianConditioned {
  double lambda;
};
struct GeneralizedGamma {
  double alpha;
  double b;
  double c;
};

struct LevyModel;

class PartitionModel {
 public:
  using Params =
      std::variant<Ewens, TwoParam, StableConditioned, BrownianConditioned, GeneralizedGamma>;

  // Validating constructor. TwoParam with alpha == 0 becomes Ewens.
  explicit PartitionModel(Params params);
  static PartitionModel ewens(double theta) { return PartitionModel(Ewens{theta}); }
  static PartitionModel two_param(double alpha, double theta) {
    return PartitionModel(TwoParam{alpha, theta});
  }
  static PartitionModel stable_conditioned(double alpha, double t) {
    return PartitionModel(StableConditioned{alpha, t});
  }
  static PartitionModel brownian(double lambda) {
    return PartitionModel(BrownianConditioned{lambda});
  }
  static PartitionModel generalized_gamma(double alpha, double b, double c) {
    return PartitionModel(GeneralizedGamma{alpha, b, c});
  }

  const Params& params() const { return params_; }
  template <class T>
  const T* get() const {
    return std::get_if<T>(&params_);
  }
  // True when the EPPF comes from a closed form (tolerance class 1e-9).
  bool closed_form() const;
  std::string str() const;
  nlohmann::json to_json() const;

  // Cached evaluation state, shared by copies. Immutable after construction
  // except for the memo, which is guarded by its own mutex.
  struct State;
  const State& state() const { return *state_; }

 private:
  Params params_;
  std::shared_ptr<State> state_;
};

// Depth of the Hermite ladder a BrownianConditioned model builds up front;
// covers every n <= kMaxBrownianN.
inline constexpr int kMaxBrownianN = 200;

struct LevyModel {
  std::string name;
  std::function<double(double)> rho;
  std::function<double(double)> log_rho;
  std::function<double(double)> psi;
  // psi_m(lambda), signed: (-1)^{m-1} psi_m > 0.
  std::function<double(int, double)> psi_m;
  // log |psi_m(lambda)|, for quadrature in log space.
  std::function<double(int, double)> log_abs_psi_m;
  // kappa_m = (-1)^{m-1} psi_m(0): cumulants of T (may be infinite when b = 0).
  std::function<double(int)> kappa;
  // Density of T; empty when not available in closed form.
  std::function<double(double)> density;
};

struct PartitionModel::State {
  std::shared_ptr<const specfun::HermiteLadder> ladder;  // Brownian only
  std::shared_ptr<const LevyModel> levy;                 // generalized gamma only
  mutable std::mutex memo_mutex;
  mutable std::map<std::vector<int>, double> memo;  // decreasing shape -> EPPF
};

double eppf(const PartitionModel& model, const Composition& c);
double log_eppf(const PartitionModel& model, const Composition& c);
// BrownianConditioned{ladder.z()} from a caller-owned ladder of depth >= 2n - k - 2.
double eppf_brownian(const specfun::HermiteLadder& ladder, const Composition& c);
// StableConditioned through the alternative convolution form with g_alpha.
double eppf_stable_alternative(double alpha, double t, const Composition& c);
// Compares eppf over all distinct orderings of c.
bool eppf_symmetric_check(const PartitionModel& model, const Composition& c);

// Entries 0..k-1: join block j; entry k: open a new block.
std::vector<double> prediction_rule(const PartitionModel& model, const Composition& c);

// P(K_n(lambda) = k), k = 1..n, for the Brownian model.
std::vector<double> kn_distribution_brownian(int n, double lambda);
std::vector<double> kn_distribution_brownian(int n, const specfun::HermiteLadder& ladder);
// P(K_n = k) for the unconditioned Brownian model, exact.
std::vector<BigRational> kn_distribution_unconditional(int n);
std::vector<double> to_doubles(const std::vector<BigRational>& v);

struct Transition {
  double stay;
  double up;
};
struct ExactTransition {
  BigRational stay;
  BigRational up;
};
Transition kn_transition(double lambda, int n, int k);
Transition kn_transition(const specfun::HermiteLadder& ladder, int n, int k);
ExactTransition kn_transition_unconditional(int n, int k);
// (P(K_n = k | K_{n+1} = k), P(K_n = k - 1 | K_{n+1} = k)), 1 <= k <= n + 1.
ExactTransition kn_cotransition(int n, int k);

// E[S_m^k], S_m = sum_i P_i^m; m k <= 24.
double power_sum_moment(const PartitionModel& model, int m, int k);
// P(Pi_n >= pi) for a partition pi with block sizes c.
double prob_coarser(const PartitionModel& model, const Composition& c);

// Closed-form Levy bundles, validated against quadrature at construction.
// b = 0 (pure stable) is accepted here although the partition model needs b > 0.
LevyModel levy_model_generalized_gamma(double alpha, double b, double c);
LevyModel levy_model_ewens_rate(double theta, double b);
LevyModel levy_model_for(const PartitionModel& model);
double eppf_generic_quadrature(const LevyModel& lm, const Composition& c);

// {model, n, entries: [{shape, count, p}]} over all decreasing shapes of n.
nlohmann::json eppf_table(const PartitionModel& model, int n);

}  // namespace pkpart
