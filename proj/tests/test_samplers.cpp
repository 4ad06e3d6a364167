#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pkpart/samplers.hpp"

using namespace pkpart;

namespace {

// |empirical - p| within z standard errors of a Bernoulli(p) mean.
bool within(double hits, int N, double p, double z = 4.0) {
  return std::abs(hits / N - p) <= z * std::sqrt(p * (1 - p) / N);
}

// Sample mean within z standard errors (estimated from the sample).
struct Moments {
  double sum = 0, sum2 = 0;
  int n = 0;
  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const { return std::sqrt((sum2 / n - mean() * mean()) / n); }
  bool near(double target, double z = 4.0) const { return std::abs(mean() - target) <= z * se(); }
};

}  // namespace

TEST_CASE("GEM stick breaking") {
  RandomSource r(1);
  for (int rep = 0; rep < 100; ++rep) {
    auto m = sample_gem(0.5, 0.5, 20, r).masses();
    double s = 0;
    for (double v : m) {
      const double next = s + v;
      CHECK(next > s);
      s = next;
    }
    CHECK(s <= 1.0 + 1e-12);
  }
  const int N = 100000;
  Moments a, b, rest;
  for (int i = 0; i < N; ++i) {
    a.add(sample_gem(0.0, 1.0, 1, r).masses()[0]);
    b.add(sample_gem(0.5, 0.0, 1, r).masses()[0]);
    rest.add(1.0 - sample_gem(0.5, 1.0, 3, r).sum());
  }
  CHECK(a.near(0.5));
  CHECK(b.near(0.5));
  // E prod_{j<=3} (1 - W_j) = prod (theta + j alpha) / (1 - alpha + theta + j alpha).
  double expect = 1.0;
  for (int j = 1; j <= 3; ++j) expect *= (1.0 + 0.5 * j) / (0.5 + 1.0 + 0.5 * j);
  CHECK(rest.near(expect));
  CHECK_THROWS_AS(sample_gem(0.5, -0.5, 3, r), DomainError);
}

TEST_CASE("restaurant process") {
  RandomSource r(2);
  CHECK(sample_crp(PartitionModel::two_param(0.5, 0.5), 1, r) == SetPartition::singleton());
  const int N = 100000;
  auto pd = PartitionModel::two_param(0.5, 0.0);
  int one_block = 0;
  for (int i = 0; i < N; ++i) one_block += sample_crp(pd, 2, r).num_blocks() == 1;
  CHECK(within(one_block, N, 0.5));

  auto bm = PartitionModel::brownian(1.0);
  int three = 0;
  for (int i = 0; i < N; ++i) three += sample_crp(bm, 3, r).num_blocks() == 3;
  CHECK(within(three, N, specfun::hermite_h(-2, 1.0).value));

  // Generic models go through the prediction rule.
  auto gg = PartitionModel::generalized_gamma(0.5, 1.0, 1.0);
  const int M = 20000;
  int merged = 0;
  for (int i = 0; i < M; ++i) merged += sample_crp(gg, 2, r).num_blocks() == 1;
  CHECK(within(merged, M, eppf(gg, {2})));
  CHECK(sample_crp(gg, 12, r).n() == 12);
}

TEST_CASE("block-count chain") {
  RandomSource r(3);
  auto path = sample_kn_chain(1.0, 300, r);
  CHECK(path.size() == 300);
  CHECK(path[0] == 1);
  for (std::size_t i = 1; i < path.size(); ++i) {
    CHECK(path[i] >= path[i - 1]);
    CHECK(path[i] - path[i - 1] <= 1);
  }
  auto law = kn_distribution_brownian(30, 2.0);
  double mean = 0, var = 0;
  for (int k = 1; k <= 30; ++k) mean += k * law[k - 1];
  for (int k = 1; k <= 30; ++k) var += (k - mean) * (k - mean) * law[k - 1];
  const int N = 20000;
  double s = 0;
  for (int i = 0; i < N; ++i) s += sample_kn_chain(2.0, 30, r).back();
  CHECK(std::abs(s / N - mean) <= 4 * std::sqrt(var / N));
}

TEST_CASE("residual construction") {
  RandomSource r(4);
  for (int rep = 0; rep < 50; ++rep) {
    auto m = sample_residual_construction(1.0, 200, r);
    CHECK(m.sum() <= 1.0 + 1e-12);
    CHECK(m.sum() > 0.9);
  }
  // P_1 = B^2 / (lambda^2 + B^2): concentrates at 0 for large lambda and at 1
  // for small lambda.
  auto median_first = [&](double lambda) {
    std::vector<double> first;
    for (int i = 0; i < 2001; ++i)
      first.push_back(sample_residual_construction(lambda, 1, r).masses()[0]);
    std::nth_element(first.begin(), first.begin() + 1000, first.end());
    return first[1000];
  };
  CHECK(median_first(100.0) < 0.01);
  CHECK(median_first(0.01) > 0.99);
  // First coordinate against the structural cdf at a few points.
  const int N = 100000;
  std::vector<int> below(3, 0);
  const double ys[] = {0.1, 0.4, 0.8};
  for (int i = 0; i < N; ++i) {
    const double p = sample_residual_construction(1.0, 1, r).masses()[0];
    for (int j = 0; j < 3; ++j) below[j] += p <= ys[j];
  }
  for (int j = 0; j < 3; ++j) CHECK(within(below[j], N, specfun::structural_cdf_brownian(1.0, ys[j])));
}

TEST_CASE("stable variates") {
  RandomSource r(5);
  const int N = 100000;
  for (double a : {0.3, 0.5, 0.8}) {
    Moments lt;
    for (int i = 0; i < N; ++i) lt.add(std::exp(-sample_stable(a, r)));
    CHECK(lt.near(std::exp(-1.0)));
  }
  Moments inv_sqrt;
  for (int i = 0; i < N; ++i) inv_sqrt.add(1.0 / std::sqrt(sample_stable(0.5, r)));
  CHECK(inv_sqrt.near(specfun::c_alpha_theta(0.5, 0.5)));
  // alpha = 1/2 has the closed form P(T <= t) = 2 (1 - Phi(1 / sqrt(2 t))).
  int hits = 0;
  for (int i = 0; i < N; ++i) hits += sample_stable(0.5, r) <= 1.0;
  CHECK(within(hits, N, 2 * (1 - specfun::gaussian_cdf(1 / std::sqrt(2.0)))));
}

TEST_CASE("tilted stable") {
  RandomSource r(6);
  const int N = 100000;
  std::uint64_t proposals = 0;
  Moments lt;
  for (int i = 0; i < N; ++i) lt.add(std::exp(-sample_tilted_stable(0.5, 1.0, r, &proposals)));
  const double p = std::exp(-1.0);
  const double rate = double(N) / proposals;
  CHECK(std::abs(rate - p) <= 4 * std::sqrt(p * (1 - p) / proposals));
  CHECK(lt.near(std::exp(-(std::sqrt(2.0) - 1.0))));
}

TEST_CASE("jump partitions") {
  RandomSource r(7);
  const double c = 0.5 / std::tgamma(0.5);
  JumpProcessSpec spec{0.5, 1.0, c};
  CHECK(sample_jump_partition(spec, 1, r) == SetPartition::singleton());
  const double eps = jump_truncation(spec);
  CHECK(eps > 0.0);
  auto jr = simulate_jumps(spec, r);
  CHECK(std::is_sorted(jr.jumps.rbegin(), jr.jumps.rend()));
  CHECK(jr.jumps.back() >= eps);
  // Remainder is delta of the mean total kappa_1 = c Gamma(1-a) b^(a-1).
  CHECK(std::abs(jr.remainder - 1e-4 * c * std::tgamma(0.5)) < 1e-12);

  const int N = 10000;
  auto gg = PartitionModel::generalized_gamma(0.5, 1.0, c);
  int merged = 0;
  for (int i = 0; i < N; ++i) merged += sample_jump_partition(spec, 2, r).num_blocks() == 1;
  const double p2 = eppf(gg, {2});
  CHECK(std::abs(double(merged) / N - p2) <= 4 * std::sqrt(p2 * (1 - p2) / N) + 1e-4);

  CHECK_THROWS_AS(jump_truncation({0.5, 1.0, c, 0.0, 2.0}), ConfigurationError);
  CHECK_THROWS_AS(jump_truncation({0.5, 1.0, c, 0.5, 1e-4}), ConfigurationError);
  CHECK_THROWS_AS(jump_truncation({0.5, 1.0, c, 0.0, 1e-12}), ConfigurationError);
}

TEST_CASE("class deletion") {
  RandomSource r(8);
  const int N = 100000;
  int merged0 = 0, merged1 = 0;
  for (int i = 0; i < N; ++i) {
    merged0 += sample_pk_deletion(0.5, 0.5, 0, 2, r).num_blocks() == 1;
    merged1 += sample_pk_deletion(0.5, 0.5, 1, 2, r).num_blocks() == 1;
  }
  CHECK(within(merged0, N, 0.5 / 1.5));
  CHECK(within(merged1, N, 0.25));
  auto p = sample_pk_deletion(0.5, 0.0, 2, 10, r);
  CHECK(p.n() == 10);
}

TEST_CASE("determinism") {
  auto draw = [](std::uint64_t seed) {
    RandomSource r(seed);
    std::vector<double> out;
    out.push_back(sample_stable(0.4, r));
    out.push_back(sample_gem(0.3, 1.0, 4, r).masses()[3]);
    out.push_back(sample_crp(PartitionModel::brownian(1.0), 10, r).num_blocks());
    return out;
  };
  CHECK(draw(42) == draw(42));
  CHECK(draw(42) != draw(43));
}
