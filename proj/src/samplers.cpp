#include "pkpart/samplers.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace pkpart {

namespace {

constexpr double kPi = specfun::kPi;

// Index drawn from unnormalised non-negative weights.
std::size_t draw_index(const std::vector<double>& w, double total, RandomSource& r) {
  const double u = r.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  // Rounding left u beyond the running sum; take the last positive weight.
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0.0) return i;
  return w.size() - 1;
}

// Restaurant growth for PD(alpha, theta); returns restricted growth labels.
template <class Stop>
std::vector<int> grow_pd(double alpha, double theta, RandomSource& r, Stop&& stop) {
  std::vector<int> labels{0};
  std::vector<int> sizes{1};
  while (!stop(labels)) {
    const int n = static_cast<int>(labels.size());
    const int k = static_cast<int>(sizes.size());
    const double u = r.uniform() * (n + theta);
    double acc = 0.0;
    int pick = k;
    for (int j = 0; j < k; ++j) {
      acc += sizes[j] - alpha;
      if (u < acc) {
        pick = j;
        break;
      }
    }
    if (pick == k) sizes.push_back(0);
    ++sizes[pick];
    labels.push_back(pick);
  }
  return labels;
}

}  // namespace

MassVector sample_gem(double alpha, double theta, int k, RandomSource& r) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("sample_gem: alpha must lie in [0, 1)");
  if (!(theta > -alpha)) throw DomainError("sample_gem: theta must exceed -alpha");
  if (k < 1) throw BoundsError("sample_gem: k must be positive");
  std::vector<double> masses;
  masses.reserve(k);
  double rest = 1.0;
  for (int j = 1; j <= k; ++j) {
    const double w = r.beta(1.0 - alpha, theta + j * alpha);
    const double m = rest * w;
    if (!(m > 0.0)) break;
    masses.push_back(m);
    rest *= 1.0 - w;
  }
  return MassVector(std::move(masses), MassVector::Kind::truncated);
}

SetPartition sample_crp(const PartitionModel& model, int n, RandomSource& r) {
  if (n < 1) throw BoundsError("sample_crp: n must be positive");
  if (auto* m = model.get<Ewens>())
    return SetPartition(grow_pd(0.0, m->theta, r, [n](const auto& l) { return (int)l.size() >= n; }));
  if (auto* m = model.get<TwoParam>())
    return SetPartition(
        grow_pd(m->alpha, m->theta, r, [n](const auto& l) { return (int)l.size() >= n; }));

  std::vector<int> labels{0};
  std::vector<int> sizes{1};
  std::shared_ptr<const specfun::HermiteLadder> ladder;
  if (auto* m = model.get<BrownianConditioned>()) {
    ladder = model.state().ladder;
    if (ladder->depth() < 2 * n) ladder = std::make_shared<specfun::HermiteLadder>(m->lambda, 2 * n);
  }
  std::vector<double> w;
  while (static_cast<int>(labels.size()) < n) {
    const int cur = static_cast<int>(labels.size());
    const int k = static_cast<int>(sizes.size());
    if (ladder) {
      // Join block j with weight 2 n_j - 1, open one with weight lambda R_{m+1},
      // m = 2n - k - 1 (both divided by R_m R_{m+1}).
      const int mm = 2 * cur - k - 1;
      w.assign(k + 1, 0.0);
      for (int j = 0; j < k; ++j) w[j] = 2.0 * sizes[j] - 1.0;
      w[k] = ladder->z() * ladder->ratio(mm + 1);
    } else {
      w = prediction_rule(model, Composition(sizes));
    }
    double total = 0.0;
    for (double v : w) total += v;
    const int pick = static_cast<int>(draw_index(w, total, r));
    if (pick == k) sizes.push_back(0);
    ++sizes[pick];
    labels.push_back(pick);
  }
  return SetPartition(std::move(labels));
}

std::vector<int> sample_kn_chain(double lambda, int n, RandomSource& r) {
  if (!(lambda > 0.0)) throw DomainError("sample_kn_chain: lambda must be positive");
  if (n < 1 || n > 100000) throw BoundsError("sample_kn_chain: 1 <= n <= 1e5");
  return sample_kn_chain(specfun::HermiteLadder(lambda, std::max(2 * n, 2)), n, r);
}

std::vector<int> sample_kn_chain(const specfun::HermiteLadder& ladder, int n, RandomSource& r) {
  if (n < 1 || n > 100000) throw BoundsError("sample_kn_chain: 1 <= n <= 1e5");
  if (ladder.depth() < 2 * n - 1) throw BoundsError("sample_kn_chain: ladder too short");
  std::vector<int> path{1};
  path.reserve(n);
  for (int m = 1; m < n; ++m) {
    const int k = path.back();
    const auto tr = kn_transition(ladder, m, k);
    path.push_back(r.uniform() * (tr.stay + tr.up) < tr.up ? k + 1 : k);
  }
  return path;
}

MassVector sample_residual_construction(double lambda, int k, RandomSource& r) {
  if (!(lambda > 0.0)) throw DomainError("sample_residual_construction: lambda must be positive");
  if (k < 1) throw BoundsError("sample_residual_construction: k must be positive");
  const double l2 = lambda * lambda;
  std::vector<double> masses;
  masses.reserve(k);
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    double z2;
    do {
      const double z = r.normal();
      z2 = z * z;
    } while (z2 == 0.0);
    // Difference of the two fractions written without cancellation.
    const double m = l2 * z2 / ((l2 + s) * (l2 + s + z2));
    s += z2;
    if (!(m > 0.0)) break;
    masses.push_back(std::min(m, 1.0));
  }
  return MassVector(std::move(masses), MassVector::Kind::truncated);
}

double sample_stable(double alpha, RandomSource& r) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sample_stable: alpha must lie in (0, 1)");
  const double u = kPi * r.uniform();
  const double e = r.exponential();
  const double la = (std::log(std::sin(alpha * u)) - std::log(std::sin(u))) / (1.0 - alpha) +
                    std::log(std::sin((1.0 - alpha) * u)) - std::log(std::sin(alpha * u));
  return std::exp((1.0 - alpha) / alpha * (la - std::log(e)));
}

double sample_tilted_stable(double alpha, double b, RandomSource& r, std::uint64_t* proposals) {
  if (!(b >= 0.0)) throw DomainError("sample_tilted_stable: b must be non-negative");
  for (;;) {
    const double t = sample_stable(alpha, r);
    if (proposals) ++*proposals;
    if (r.uniform() < std::exp(-b * t)) return t;
  }
}

double jump_truncation(const JumpProcessSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigurationError("jumps: alpha in (0, 1)");
  if (!(spec.b > 0.0) || !(spec.c > 0.0)) throw ConfigurationError("jumps: b, c must be positive");
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw ConfigurationError("jumps: delta in (0, 1)");
  const double a1 = 1.0 - spec.alpha;
  // Mean mass below eps relative to kappa_1 is the regularised P(1 - alpha, b eps).
  double eps = spec.epsilon;
  if (eps == 0.0) {
    eps = boost::math::gamma_p_inv(a1, spec.delta) / spec.b;
  } else if (!(eps > 0.0) || boost::math::gamma_p(a1, spec.b * eps) > spec.delta) {
    throw ConfigurationError("jumps: epsilon leaves more than delta of the mean mass");
  }
  // Expected number of dominating points above eps: c eps^-alpha / alpha.
  const double expected = spec.c * std::pow(eps, -spec.alpha) / spec.alpha;
  if (!(eps > 0.0) || !(expected < 5e7))
    throw ConfigurationError("jumps: truncation needs too many jumps for the requested delta");
  return eps;
}

JumpRealization simulate_jumps(const JumpProcessSpec& spec, RandomSource& r) {
  const double eps = jump_truncation(spec);
  const double a = spec.alpha, b = spec.b, c = spec.c;
  JumpRealization out;
  // Points of a unit-rate process mapped through the inverse tail of c x^{-a-1}.
  double gamma = 0.0;
  double sum = 0.0;
  for (;;) {
    gamma += r.exponential();
    const double x = std::pow(a * gamma / c, -1.0 / a);
    if (x < eps) break;
    if (r.uniform() < std::exp(-b * x)) {
      out.jumps.push_back(x);
      sum += x;
    }
  }
  out.remainder = c * std::pow(b, a - 1.0) * std::tgamma(1.0 - a) *
                  boost::math::gamma_p(1.0 - a, b * eps);
  out.total = sum + out.remainder;
  return out;
}

SetPartition sample_jump_partition(const JumpProcessSpec& spec, int n, RandomSource& r) {
  if (n < 1 || n > 1000) throw BoundsError("sample_jump_partition: 1 <= n <= 1000");
  const auto jr = simulate_jumps(spec, r);
  std::vector<double> cum(jr.jumps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < jr.jumps.size(); ++i) cum[i] = acc += jr.jumps[i];
  std::vector<long> raw(n);
  long dust = -1;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform() * jr.total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    raw[i] = it == cum.end() ? dust-- : static_cast<long>(it - cum.begin());
  }
  std::vector<int> labels(n);
  std::vector<std::pair<long, int>> seen;
  for (int i = 0; i < n; ++i) {
    auto f = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == raw[i]; });
    if (f == seen.end()) {
      seen.emplace_back(raw[i], static_cast<int>(seen.size()));
      labels[i] = seen.back().second;
    } else {
      labels[i] = f->second;
    }
  }
  return SetPartition(std::move(labels));
}

SetPartition sample_pk_deletion(double alpha, double theta, int k, int n, RandomSource& r) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("sample_pk_deletion: alpha in [0, 1)");
  if (!(theta > -alpha)) throw DomainError("sample_pk_deletion: theta must exceed -alpha");
  if (k < 0 || n < 1) throw BoundsError("sample_pk_deletion: k >= 0 and n >= 1");
  const long cap = 50L * n + k;
  for (int attempt = 0; attempt < 100; ++attempt) {
    int survivors = 0;
    bool exhausted = false;
    auto labels = grow_pd(alpha, theta, r, [&](const std::vector<int>& l) {
      if (l.back() >= k) ++survivors;
      if (survivors >= n) return true;
      if (static_cast<long>(l.size()) >= cap) return exhausted = true;
      return false;
    });
    if (exhausted) continue;
    std::vector<int> kept;
    std::vector<int> relabel;
    for (int b : labels) {
      if (b < k) continue;
      if (static_cast<int>(relabel.size()) <= b - k) relabel.resize(b - k + 1, -1);
      int& slot = relabel[b - k];
      if (slot < 0) slot = 1 + *std::max_element(relabel.begin(), relabel.end());
      kept.push_back(slot);
    }
    // Slots were assigned in order of first appearance: restricted growth.
    return SetPartition(std::move(kept));
  }
  throw NumericalError("sample_pk_deletion: too few survivors after 100 attempts");
}

}  // namespace pkpart
