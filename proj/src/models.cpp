#include "pkpart/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pkpart/quadrature.hpp"

namespace pkpart {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458176568;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// p(n_1..n_k) for PD(alpha, theta) (alpha = 0: Ewens) as a product of n - 1
// ratios, each numerator factor paired with one denominator factor.
double pd_eppf(double alpha, double theta, const Composition& c) {
  std::vector<double> num;
  num.reserve(c.n());
  for (int i = 1; i < c.k(); ++i) num.push_back(theta + i * alpha);
  for (int ni : c.parts())
    for (int j = 1; j < ni; ++j) num.push_back(j - alpha);
  double p = 1.0;
  for (int m = 1; m < c.n(); ++m) p *= num[m - 1] / (theta + m);
  return p;
}

double pd_log_eppf(double alpha, double theta, const Composition& c) {
  double s = 0.0;
  for (int i = 1; i < c.k(); ++i) s += std::log(theta + i * alpha);
  for (int ni : c.parts())
    if (ni > 1) s += std::lgamma(ni - alpha) - std::lgamma(1.0 - alpha);
  for (int m = 1; m < c.n(); ++m) s -= std::log(theta + m);
  return s;
}

double log_half_rising_product(const Composition& c) {
  double s = 0.0;
  for (int ni : c.parts())
    if (ni > 1) s += specfun::log_rising(0.5, ni - 1);
  return s;
}

std::shared_ptr<const specfun::HermiteLadder> ladder_for(double lambda, int n) {
  return std::make_shared<specfun::HermiteLadder>(lambda, std::max(2 * n, 2));
}

const specfun::HermiteLadder& brownian_ladder(const PartitionModel& model, int n,
                                              std::shared_ptr<const specfun::HermiteLadder>& hold) {
  const auto& ladder = *model.state().ladder;
  if (ladder.depth() >= 2 * n) return ladder;
  hold = ladder_for(ladder.z(), n);
  return *hold;
}

double brownian_log_eppf(const specfun::HermiteLadder& ladder, const Composition& c) {
  const int n = c.n(), k = c.k();
  return (n - k) * kLn2 + (k - 1) * std::log(ladder.z()) + ladder.log_value(2 * n - k - 1) +
         log_half_rising_product(c);
}

double stable_log_eppf(double alpha, double t, const Composition& c, double log_mu) {
  const int n = c.n(), k = c.k();
  double s = std::lgamma(1.0 - alpha) - std::lgamma(n - k * alpha) +
             (k - 1) * (std::log(alpha) - alpha * std::log(t)) + log_mu;
  for (int ni : c.parts())
    if (ni > 1) s += std::lgamma(ni - alpha) - std::lgamma(1.0 - alpha);
  return s;
}

std::vector<int> shape_key(const Composition& c) { return c.sorted_decreasing().parts(); }

template <class F>
double memoized(const PartitionModel& model, std::vector<int> key, F&& compute) {
  const auto& st = model.state();
  {
    std::lock_guard<std::mutex> lock(st.memo_mutex);
    auto it = st.memo.find(key);
    if (it != st.memo.end()) return it->second;
  }
  const double v = compute();
  std::lock_guard<std::mutex> lock(st.memo_mutex);
  st.memo.emplace(std::move(key), v);
  return v;
}

double stable_log_mu(const PartitionModel& model, double alpha, double t, int n, int k) {
  // mu depends on (n, k) only; the key cannot clash with a shape because the
  // memo of a StableConditioned model holds nothing else.
  return memoized(model, {n, k}, [&] {
    const double q = (n - 1) - k * alpha + alpha;
    if (q == 0.0) return 0.0;
    return std::log(specfun::structural_moment_quadrature(alpha, q, t));
  });
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace

PartitionModel::PartitionModel(Params params) : params_(std::move(params)) {
  if (auto* tp = std::get_if<TwoParam>(&params_); tp && tp->alpha == 0.0)
    params_ = Ewens{tp->theta};
  state_ = std::make_shared<State>();
  std::visit(
      overloaded{
          [&](const Ewens& m) {
            if (!finite_positive(m.theta)) throw DomainError("Ewens: theta must be positive");
          },
          [&](const TwoParam& m) {
            if (!(m.alpha > 0.0 && m.alpha < 1.0))
              throw DomainError("TwoParam: alpha must lie in [0, 1)");
            if (!(std::isfinite(m.theta) && m.theta > -m.alpha))
              throw DomainError("TwoParam: theta must exceed -alpha");
          },
          [&](const StableConditioned& m) {
            if (!(m.alpha > 0.0 && m.alpha < 1.0))
              throw DomainError("StableConditioned: alpha must lie in (0, 1)");
            if (!finite_positive(m.t)) throw DomainError("StableConditioned: t must be positive");
          },
          [&](const BrownianConditioned& m) {
            if (!finite_positive(m.lambda))
              throw DomainError("BrownianConditioned: lambda must be positive");
            if (m.lambda > specfun::kHermiteMaxZ)
              throw BoundsError("BrownianConditioned: lambda must not exceed 40");
            state_->ladder = ladder_for(m.lambda, kMaxBrownianN);
          },
          [&](const GeneralizedGamma& m) {
            if (!(m.alpha > 0.0 && m.alpha < 1.0))
              throw DomainError("GeneralizedGamma: alpha must lie in (0, 1)");
            if (!finite_positive(m.b) || !finite_positive(m.c))
              throw DomainError("GeneralizedGamma: b and c must be positive");
            state_->levy = std::make_shared<LevyModel>(
                levy_model_generalized_gamma(m.alpha, m.b, m.c));
          },
      },
      params_);
}

bool PartitionModel::closed_form() const {
  return std::holds_alternative<Ewens>(params_) || std::holds_alternative<TwoParam>(params_) ||
         std::holds_alternative<BrownianConditioned>(params_);
}

std::string PartitionModel::str() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Ewens& m) { os << "Ewens{theta=" << m.theta << "}"; },
                 [&](const TwoParam& m) {
                   os << "TwoParam{alpha=" << m.alpha << ", theta=" << m.theta << "}";
                 },
                 [&](const StableConditioned& m) {
                   os << "StableConditioned{alpha=" << m.alpha << ", t=" << m.t << "}";
                 },
                 [&](const BrownianConditioned& m) {
                   os << "BrownianConditioned{lambda=" << m.lambda << "}";
                 },
                 [&](const GeneralizedGamma& m) {
                   os << "GeneralizedGamma{alpha=" << m.alpha << ", b=" << m.b << ", c=" << m.c
                      << "}";
                 },
             },
             params_);
  return os.str();
}

nlohmann::json PartitionModel::to_json() const {
  return std::visit(
      overloaded{
          [](const Ewens& m) -> nlohmann::json { return {{"family", "ewens"}, {"theta", m.theta}}; },
          [](const TwoParam& m) -> nlohmann::json {
            return {{"family", "two_param"}, {"alpha", m.alpha}, {"theta", m.theta}};
          },
          [](const StableConditioned& m) -> nlohmann::json {
            return {{"family", "stable_conditioned"}, {"alpha", m.alpha}, {"t", m.t}};
          },
          [](const BrownianConditioned& m) -> nlohmann::json {
            return {{"family", "brownian_conditioned"}, {"lambda", m.lambda}};
          },
          [](const GeneralizedGamma& m) -> nlohmann::json {
            return {{"family", "generalized_gamma"}, {"alpha", m.alpha}, {"b", m.b}, {"c", m.c}};
          },
      },
      params_);
}

double log_eppf(const PartitionModel& model, const Composition& c) {
  if (c.empty()) throw DomainError("eppf: empty composition");
  if (c.n() == 1) return 0.0;
  return std::visit(
      overloaded{
          [&](const Ewens& m) { return pd_log_eppf(0.0, m.theta, c); },
          [&](const TwoParam& m) { return pd_log_eppf(m.alpha, m.theta, c); },
          [&](const StableConditioned& m) {
            return stable_log_eppf(m.alpha, m.t, c,
                                   stable_log_mu(model, m.alpha, m.t, c.n(), c.k()));
          },
          [&](const BrownianConditioned&) {
            std::shared_ptr<const specfun::HermiteLadder> hold;
            return brownian_log_eppf(brownian_ladder(model, c.n(), hold), c);
          },
          [&](const GeneralizedGamma&) {
            return std::log(memoized(model, shape_key(c), [&] {
              return eppf_generic_quadrature(*model.state().levy, c);
            }));
          },
      },
      model.params());
}

double eppf(const PartitionModel& model, const Composition& c) {
  if (c.empty()) throw DomainError("eppf: empty composition");
  if (c.n() == 1) return 1.0;
  if (auto* m = model.get<Ewens>()) return pd_eppf(0.0, m->theta, c);
  if (auto* m = model.get<TwoParam>()) return pd_eppf(m->alpha, m->theta, c);
  if (model.get<GeneralizedGamma>())
    return memoized(model, shape_key(c),
                    [&] { return eppf_generic_quadrature(*model.state().levy, c); });
  return std::exp(log_eppf(model, c));
}

double eppf_brownian(const specfun::HermiteLadder& ladder, const Composition& c) {
  if (c.empty()) throw DomainError("eppf: empty composition");
  if (ladder.depth() + 1 < 2 * c.n() - c.k() - 1) throw BoundsError("eppf_brownian: ladder too short");
  if (c.n() == 1) return 1.0;
  return std::exp(brownian_log_eppf(ladder, c));
}

double eppf_stable_alternative(double alpha, double t, const Composition& c) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(t > 0.0)) throw DomainError("t must be positive");
  if (c.empty()) throw DomainError("eppf: empty composition");
  const int n = c.n(), k = c.k();
  const double q = n - k * alpha;
  // g(q | t) = (Gamma(q) f(t))^{-1} int_0^t f(t - v) v^{q-1} dv
  auto f = [&](double v) { return v >= t ? 0.0 : specfun::stable_density(alpha, t - v).value; };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-12;
  const double integral = quad::integrate_power_left(f, q - 1.0, t, opt).value;
  double log_p = k * std::log(alpha) - n * std::log(t) + std::log(integral) - std::lgamma(q) -
                 std::log(specfun::stable_density(alpha, t).value);
  for (int ni : c.parts())
    if (ni > 1) log_p += std::lgamma(ni - alpha) - std::lgamma(1.0 - alpha);
  return std::exp(log_p);
}

bool eppf_symmetric_check(const PartitionModel& model, const Composition& c) {
  const double tol = model.closed_form() ? 1e-12 : 1e-8;
  const double ref = eppf(model, c);
  auto parts = c.parts();
  std::sort(parts.begin(), parts.end());
  do {
    const double v = eppf(model, Composition(parts));
    if (std::abs(v - ref) > tol * std::abs(ref)) return false;
  } while (std::next_permutation(parts.begin(), parts.end()));
  return true;
}

std::vector<double> prediction_rule(const PartitionModel& model, const Composition& c) {
  if (c.empty()) return {1.0};
  const int n = c.n(), k = c.k();
  std::vector<double> out(k + 1);
  auto pd_rule = [&](double alpha, double theta) {
    for (int j = 0; j < k; ++j) out[j] = (c[j] - alpha) / (n + theta);
    out[k] = (k * alpha + theta) / (n + theta);
  };
  if (auto* m = model.get<Ewens>()) {
    pd_rule(0.0, m->theta);
    return out;
  }
  if (auto* m = model.get<TwoParam>()) {
    pd_rule(m->alpha, m->theta);
    return out;
  }
  if (model.get<BrownianConditioned>()) {
    std::shared_ptr<const specfun::HermiteLadder> hold;
    const auto& ladder = brownian_ladder(model, n + 1, hold);
    const int mm = 2 * n - k - 1;
    const double r0 = ladder.ratio(mm), r1 = ladder.ratio(mm + 1);
    for (int j = 0; j < k; ++j) out[j] = (2.0 * c[j] - 1.0) / (r0 * r1);
    out[k] = ladder.z() / r0;
    return out;
  }
  const double base = eppf(model, c);
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += out[j] = eppf(model, c.with_incremented(j)) / base;
  sum += out[k] = eppf(model, c.with_new_singleton()) / base;
  if (!(std::abs(sum - 1.0) <= 1e-6))
    throw ConsistencyError("prediction_rule: probabilities sum to " + std::to_string(sum));
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> kn_distribution_brownian(int n, const specfun::HermiteLadder& ladder) {
  if (n < 1) throw BoundsError("kn_distribution_brownian: n must be positive");
  if (ladder.depth() + 1 < 2 * n - 2) throw BoundsError("kn_distribution_brownian: ladder too short");
  const double lambda = ladder.z();
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  std::vector<double> out(n);
  for (int k = 1; k <= n; ++k) {
    const double lp = std::lgamma(2.0 * n - k) + (k - 1) * std::log(lambda) +
                      ladder.log_value(2 * n - k - 1) - std::lgamma(n - k + 1.0) -
                      std::lgamma(static_cast<double>(k)) - (n - k) * kLn2;
    out[k - 1] = std::exp(lp);
  }
  return out;
}

std::vector<double> kn_distribution_brownian(int n, double lambda) {
  if (n < 1 || n > kMaxBrownianN) throw BoundsError("kn_distribution_brownian: 1 <= n <= 200");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return kn_distribution_brownian(n, *ladder_for(lambda, n));
}

std::vector<BigRational> kn_distribution_unconditional(int n) {
  if (n < 1 || n > 64) throw BoundsError("kn_distribution_unconditional: 1 <= n <= 64");
  std::vector<BigRational> out;
  for (int k = 1; k <= n; ++k) {
    BigInt pow2 = BigInt(1) << (2 * n - k - 1);
    out.emplace_back(binomial(2 * n - k - 1, n - 1), pow2);
  }
  return out;
}

std::vector<double> to_doubles(const std::vector<BigRational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& r : v) out.push_back(static_cast<double>(r));
  return out;
}

Transition kn_transition(const specfun::HermiteLadder& ladder, int n, int k) {
  if (n < 1 || k < 1 || k > n) throw BoundsError("kn_transition: need 1 <= k <= n");
  const int m = 2 * n - k - 1;
  if (m + 1 > ladder.depth()) throw BoundsError("kn_transition: ladder too short");
  const double r0 = ladder.ratio(m), r1 = ladder.ratio(m + 1);
  return {(m + 1) / (r0 * r1), ladder.z() / r0};
}

Transition kn_transition(double lambda, int n, int k) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return kn_transition(*ladder_for(lambda, n), n, k);
}

ExactTransition kn_transition_unconditional(int n, int k) {
  if (n < 1 || k < 1 || k > n) throw BoundsError("kn_transition: need 1 <= k <= n");
  return {BigRational(2 * n - k, 2 * n), BigRational(k, 2 * n)};
}

ExactTransition kn_cotransition(int n, int k) {
  if (n < 1 || k < 1 || k > n + 1) throw BoundsError("kn_cotransition: need 1 <= k <= n + 1");
  return {BigRational(2 * (n - k + 1), 2 * n - k + 1), BigRational(k - 1, 2 * n - k + 1)};
}

double power_sum_moment(const PartitionModel& model, int m, int k) {
  if (m < 1 || k < 1 || m * k > 24) throw BoundsError("power_sum_moment: need m k <= 24");
  if (m == 1) return 1.0;
  double total = 0.0;
  for_each_composition(k, [&](const Composition& ks) {
    BigInt denom = factorial(ks.k());
    for (int ki : ks.parts()) denom *= factorial(ki);
    const double weight = static_cast<double>(BigRational(factorial(k), denom));
    std::vector<int> scaled;
    for (int ki : ks.parts()) scaled.push_back(m * ki);
    total += weight * eppf(model, Composition(scaled));
  });
  return total;
}

double prob_coarser(const PartitionModel& model, const Composition& c) {
  if (c.k() > kMaxEnumerationSize) throw BoundsError("prob_coarser: at most 12 blocks");
  double total = 0.0;
  for_each_set_partition(c.k(), [&](const SetPartition& p) {
    std::vector<int> merged(p.num_blocks(), 0);
    for (int i = 0; i < c.k(); ++i) merged[p.block_of(i)] += c[i];
    total += eppf(model, Composition(merged));
  });
  return total;
}

namespace {

void validate_levy(const LevyModel& lm) {
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-12;
  for (double lambda : {0.5, 1.0, 2.0}) {
    auto psi_integrand = [&](double x) {
      return std::exp(std::log(-std::expm1(-lambda * x)) + lm.log_rho(x));
    };
    const double psi_q = quad::integrate_log_scale(psi_integrand, opt).value;
    const double psi_c = lm.psi(lambda);
    if (std::abs(psi_q - psi_c) > 1e-9 * std::abs(psi_c))
      throw ConsistencyError(lm.name + ": psi disagrees with its Levy density");
    for (int m = 1; m <= 3; ++m) {
      auto integrand = [&](double x) {
        return std::exp(m * std::log(x) - lambda * x + lm.log_rho(x));
      };
      const double sign = (m % 2 == 1) ? 1.0 : -1.0;
      const double q = sign * quad::integrate_log_scale(integrand, opt).value;
      const double cf = lm.psi_m(m, lambda);
      if (std::abs(q - cf) > 1e-9 * std::abs(cf))
        throw ConsistencyError(lm.name + ": psi_m disagrees with its Levy density");
    }
  }
}

}  // namespace

LevyModel levy_model_generalized_gamma(double alpha, double b, double c) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(b >= 0.0 && std::isfinite(b))) throw DomainError("b must be non-negative");
  if (!finite_positive(c)) throw DomainError("c must be positive");
  const double scale = c * std::tgamma(1.0 - alpha) / alpha;  // psi = scale ((l+b)^a - b^a)
  LevyModel lm;
  std::ostringstream os;
  os.precision(17);
  os << "generalized_gamma{alpha=" << alpha << ", b=" << b << ", c=" << c << "}";
  lm.name = os.str();
  lm.log_rho = [=](double x) { return std::log(c) - (alpha + 1.0) * std::log(x) - b * x; };
  lm.rho = [=](double x) { return std::exp(std::log(c) - (alpha + 1.0) * std::log(x) - b * x); };
  lm.psi = [=](double lambda) {
    if (b == 0.0) return scale * std::pow(lambda, alpha);
    return scale * std::pow(b, alpha) * std::expm1(alpha * std::log1p(lambda / b));
  };
  lm.log_abs_psi_m = [=](int m, double lambda) {
    return std::log(c) + std::lgamma(m - alpha) + (alpha - m) * std::log(lambda + b);
  };
  lm.psi_m = [=](int m, double lambda) {
    return ((m % 2 == 1) ? 1.0 : -1.0) *
           std::exp(std::log(c) + std::lgamma(m - alpha) + (alpha - m) * std::log(lambda + b));
  };
  lm.kappa = [=](int m) {
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return c * std::exp(std::lgamma(m - alpha) + (alpha - m) * std::log(b));
  };
  // T = s T_alpha under the base measure, then tilted by exp(psi_0(b) - b t).
  const double s = std::pow(scale, 1.0 / alpha);
  const double log_norm = scale * std::pow(b, alpha);
  lm.density = [=](double t) {
    if (!(t > 0.0)) return 0.0;
    return specfun::stable_density(alpha, t / s).value / s * std::exp(log_norm - b * t);
  };
  validate_levy(lm);
  return lm;
}

LevyModel levy_model_ewens_rate(double theta, double b) {
  if (!finite_positive(theta) || !finite_positive(b))
    throw DomainError("Ewens rate form: theta and b must be positive");
  LevyModel lm;
  std::ostringstream os;
  os.precision(17);
  os << "ewens_rate{theta=" << theta << ", b=" << b << "}";
  lm.name = os.str();
  lm.log_rho = [=](double x) { return std::log(theta) - b * x - std::log(x); };
  lm.rho = [=](double x) { return theta * std::exp(-b * x) / x; };
  lm.psi = [=](double lambda) { return theta * std::log1p(lambda / b); };
  lm.log_abs_psi_m = [=](int m, double lambda) {
    return std::log(theta) + std::lgamma(static_cast<double>(m)) - m * std::log(lambda + b);
  };
  lm.psi_m = [=](int m, double lambda) {
    return ((m % 2 == 1) ? 1.0 : -1.0) * std::exp(std::log(theta) +
                                                  std::lgamma(static_cast<double>(m)) -
                                                  m * std::log(lambda + b));
  };
  lm.kappa = [=](int m) {
    return theta * std::exp(std::lgamma(static_cast<double>(m)) - m * std::log(b));
  };
  lm.density = [=](double t) {
    if (!(t > 0.0)) return 0.0;
    return std::exp(theta * std::log(b) + (theta - 1.0) * std::log(t) - b * t -
                    std::lgamma(theta));
  };
  validate_levy(lm);
  return lm;
}

LevyModel levy_model_for(const PartitionModel& model) {
  if (model.get<GeneralizedGamma>()) return *model.state().levy;
  if (auto* m = model.get<Ewens>()) return levy_model_ewens_rate(m->theta, 1.0);
  throw ConfigurationError("levy_model_for: only generalized gamma and Ewens models have a "
                           "closed-form Levy bundle");
}

double eppf_generic_quadrature(const LevyModel& lm, const Composition& c) {
  if (c.empty()) throw DomainError("eppf: empty composition");
  const int n = c.n();
  if (n > kMaxEnumerationSize) throw BoundsError("eppf_generic_quadrature: n <= 12");
  // (-1)^{n-k} prod psi_{n_i} > 0, so the integrand is handled in log form.
  auto log_integrand = [&](double x) {
    double s = (n - 1) * std::log(x) - lm.psi(x);
    for (int ni : c.parts()) s += lm.log_abs_psi_m(ni, x);
    return s;
  };
  double peak = -std::numeric_limits<double>::infinity(), upeak = 0.0;
  for (double u = -40.0; u <= 40.0; u += 0.25) {
    const double v = u + log_integrand(std::exp(u));
    if (v > peak) {
      peak = v;
      upeak = u;
    }
  }
  if (!std::isfinite(peak)) throw NumericalError("eppf_generic_quadrature: integrand vanishes");
  auto f = [&](double x) { return std::exp(log_integrand(x) - peak); };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-12;
  opt.throw_on_failure = false;
  const auto r = quad::integrate_log_scale(f, opt, upeak, 1e-14);
  if (!(r.error <= 1e-9 * std::abs(r.value)))
    throw NumericalError("eppf_generic_quadrature: accuracy target not reached");
  return std::exp(peak - std::lgamma(static_cast<double>(n))) * r.value;
}

nlohmann::json eppf_table(const PartitionModel& model, int n) {
  if (n < 1 || n > 30) throw BoundsError("eppf_table: 1 <= n <= 30");
  nlohmann::json entries = nlohmann::json::array();
  for_each_shape(n, [&](const Composition& s) {
    entries.push_back({{"shape", s.parts()},
                       {"count", count_shape_arrangements(s).str()},
                       {"p", eppf(model, s)}});
  });
  return {{"model", model.to_json()}, {"n", n}, {"entries", entries}};
}

}  // namespace pkpart
