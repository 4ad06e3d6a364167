#include <cmath>
#include <map>

#include "doctest.h"
#include "pkpart/models.hpp"
#include "pkpart/quadrature.hpp"

using namespace pkpart;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double enumerated_sum(const PartitionModel& m, int n) {
  double s = 0.0;
  for_each_set_partition(n, [&](const SetPartition& p) { s += eppf(m, composition_of(p)); });
  return s;
}

// Ewens sampling formula straight from gamma functions.
double esf(double theta, const Composition& c) {
  double lp = c.k() * std::log(theta) + std::lgamma(theta) - std::lgamma(theta + c.n());
  for (int ni : c.parts()) lp += std::lgamma(static_cast<double>(ni));
  return std::exp(lp);
}

// Two-parameter EPPF with rising factorials written out.
double pd_oracle(double a, double th, const Composition& c) {
  double num = 1.0;
  for (int i = 1; i < c.k(); ++i) num *= th + i * a;
  for (int ni : c.parts())
    for (int j = 1; j < ni; ++j) num *= j - a;
  double den = 1.0;
  for (int m = 1; m < c.n(); ++m) den *= th + m;
  return num / den;
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS(PartitionModel::ewens(0.0), DomainError);
  CHECK_THROWS_AS(PartitionModel::two_param(0.5, -0.5), DomainError);
  CHECK_THROWS_AS(PartitionModel::two_param(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(PartitionModel::stable_conditioned(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(PartitionModel::brownian(-1.0), DomainError);
  CHECK_THROWS_AS(PartitionModel::generalized_gamma(0.5, 0.0, 1.0), DomainError);
  CHECK(PartitionModel::two_param(0.0, 2.0).get<Ewens>() != nullptr);
  CHECK_NOTHROW(PartitionModel::two_param(0.5, -0.49));
}

TEST_CASE("point values") {
  CHECK(rel(eppf(PartitionModel::ewens(1.0), {3}), 1.0 / 3.0) < 1e-15);
  for (int i = 1; i <= 9; ++i) {
    const double a = i / 10.0;
    auto m = PartitionModel::two_param(a, 0.0);
    CHECK(eppf(m, {2}) == 1.0 - a);
    CHECK(eppf(m, {1, 1}) == a);
  }
  for (double lambda : {0.5, 1.0, 2.0}) {
    auto m = PartitionModel::brownian(lambda);
    CHECK(eppf(m, {1}) == 1.0);
    CHECK(rel(eppf(m, {2}), 1.0 - lambda * specfun::mills_ratio(lambda)) < 1e-13);
    // Three-element values in terms of Hermite functions.
    const double h2 = specfun::hermite_h(-2, lambda).value;
    const double h3 = specfun::hermite_h(-3, lambda).value;
    const double h4 = specfun::hermite_h(-4, lambda).value;
    CHECK(rel(eppf(m, {3}), 3 * h4) < 1e-12);
    CHECK(rel(eppf(m, {2, 1}), lambda * h3) < 1e-12);
    CHECK(rel(eppf(m, {1, 1, 1}), lambda * lambda * h2) < 1e-12);
  }
  for (const auto& m : {PartitionModel::stable_conditioned(0.7, 1.0),
                        PartitionModel::generalized_gamma(0.5, 1.0, 1.0)})
    CHECK(eppf(m, {1}) == 1.0);
}

TEST_CASE("closed forms against independent formulas") {
  for (double th : {0.3, 1.0, 4.0})
    for_each_composition(6, [&](const Composition& c) {
      CHECK(rel(eppf(PartitionModel::ewens(th), c), esf(th, c)) < 1e-13);
    });
  for (auto [a, th] : {std::pair{0.5, 0.5}, {0.3, 1.2}, {0.8, -0.7}})
    for_each_composition(6, [&](const Composition& c) {
      CHECK(rel(eppf(PartitionModel::two_param(a, th), c), pd_oracle(a, th, c)) < 1e-13);
      CHECK(rel(std::exp(log_eppf(PartitionModel::two_param(a, th), c)), pd_oracle(a, th, c)) <
            1e-12);
    });
}

TEST_CASE("normalization over all set partitions") {
  for (const auto& m : {PartitionModel::ewens(1.0), PartitionModel::two_param(0.5, 0.5),
                        PartitionModel::two_param(0.3, 1.2), PartitionModel::brownian(1.0)})
    for (int n = 1; n <= 8; ++n)
      CHECK_MESSAGE(std::abs(enumerated_sum(m, n) - 1.0) <= 1e-9, m.str() << " n=" << n);
  for (const auto& m : {PartitionModel::stable_conditioned(0.7, 1.0),
                        PartitionModel::generalized_gamma(0.5, 1.0, 1.0)})
    for (int n = 1; n <= 6; ++n)
      CHECK_MESSAGE(std::abs(enumerated_sum(m, n) - 1.0) <= 1e-6, m.str() << " n=" << n);
}

TEST_CASE("addition rules") {
  auto check = [](const PartitionModel& m, int nmax, double tol) {
    for (int n = 1; n <= nmax; ++n)
      for_each_composition(n, [&](const Composition& c) {
        double rhs = eppf(m, c.with_new_singleton());
        for (int j = 0; j < c.k(); ++j) rhs += eppf(m, c.with_incremented(j));
        CHECK_MESSAGE(std::abs(eppf(m, c) - rhs) <= tol, m.str() << " " << c.str());
      });
  };
  check(PartitionModel::ewens(1.0), 7, 1e-12);
  check(PartitionModel::two_param(0.5, 0.5), 7, 1e-12);
  check(PartitionModel::brownian(1.0), 7, 1e-12);
  check(PartitionModel::brownian(0.3), 6, 1e-12);
  check(PartitionModel::stable_conditioned(0.7, 1.0), 5, 1e-6);
}

TEST_CASE("Gibbs factorization of the two-parameter EPPF") {
  for (auto [a, th] : {std::pair{0.5, 0.5}, {0.3, 1.2}}) {
    auto m = PartitionModel::two_param(a, th);
    for (int n = 1; n <= 8; ++n) {
      std::map<int, double> by_k;
      for_each_shape(n, [&](const Composition& s) {
        double w = 1.0;
        for (int ni : s.parts())
          for (int j = 1; j < ni; ++j) w *= j - a;
        const double v = eppf(m, s) / w;
        auto [it, fresh] = by_k.emplace(s.k(), v);
        if (!fresh) CHECK(rel(v, it->second) < 1e-12);
      });
    }
  }
}

TEST_CASE("symmetry") {
  CHECK(eppf_symmetric_check(PartitionModel::two_param(0.5, 0.5), {3, 1}));
  CHECK(eppf_symmetric_check(PartitionModel::ewens(2.0), {2, 2, 1}));
  CHECK(eppf_symmetric_check(PartitionModel::generalized_gamma(0.5, 1.0, 1.0), {2, 1}));
  CHECK(eppf_symmetric_check(PartitionModel::brownian(1.3), {4, 1, 2}));
}

TEST_CASE("Brownian Hermite EPPF equals the stable quadrature path") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    auto b = PartitionModel::brownian(lambda);
    auto s = PartitionModel::stable_conditioned(0.5, 0.5 / (lambda * lambda));
    for (int n = 1; n <= 6; ++n)
      for_each_composition(n, [&](const Composition& c) {
        CHECK(rel(eppf(s, c), eppf(b, c)) <= 1e-6);
      });
  }
}

TEST_CASE("stable EPPF: moment form against convolution form") {
  for (double a : {0.3, 0.5, 0.7})
    for (double t : {0.5, 1.0, 2.0}) {
      auto m = PartitionModel::stable_conditioned(a, t);
      for (int n = 1; n <= 4; ++n)
        for_each_shape(n, [&](const Composition& c) {
          CHECK(rel(eppf_stable_alternative(a, t, c), eppf(m, c)) <= 1e-6);
        });
    }
}

TEST_CASE("Levy bundles") {
  auto gg = levy_model_generalized_gamma(0.5, 1.0, 1.0);
  CHECK(gg.psi(0.0) == 0.0);
  const double c0 = 0.5 / std::tgamma(0.5);
  auto st = levy_model_generalized_gamma(0.5, 0.0, c0);
  for (double l : {0.1, 1.0, 7.0}) CHECK(rel(st.psi(l), std::pow(l, 0.5)) < 1e-14);
  auto ew = levy_model_ewens_rate(1.0, 1.0);
  for (double l : {0.0, 0.5, 3.0}) CHECK(rel(ew.psi_m(1, l), 1.0 / (1.0 + l)) < 1e-14);
  for (int m = 1; m <= 5; ++m) CHECK((m % 2 == 1 ? 1 : -1) * gg.psi_m(m, 0.7) > 0);
  CHECK(rel(gg.kappa(2), std::tgamma(1.5)) < 1e-14);
  // Density of T: mass 1 and Laplace transform exp(-psi).
  quad::Options o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-11;
  for (const auto* lm : {&gg, &ew}) {
    CHECK(std::abs(quad::integrate_log_scale(lm->density, o).value - 1.0) < 1e-8);
    auto lt = [&](double t) { return std::exp(-0.8 * t) * lm->density(t); };
    CHECK(rel(quad::integrate_log_scale(lt, o).value, std::exp(-lm->psi(0.8))) < 1e-8);
  }
  CHECK_THROWS_AS(levy_model_for(PartitionModel::two_param(0.5, 0.5)), ConfigurationError);
}

TEST_CASE("generic quadrature EPPF reproduces closed forms") {
  for (double th : {0.5, 2.0}) {
    auto lm = levy_model_ewens_rate(th, 1.0);
    for (int n = 1; n <= 6; ++n)
      for_each_shape(n, [&](const Composition& c) {
        CHECK(rel(eppf_generic_quadrature(lm, c), esf(th, c)) <= 1e-6);
      });
  }
  for (double a : {0.3, 0.5, 0.7}) {
    auto lm = levy_model_generalized_gamma(a, 0.0, a / std::tgamma(1.0 - a));
    for (int n = 1; n <= 6; ++n)
      for_each_shape(n, [&](const Composition& c) {
        CHECK(rel(eppf_generic_quadrature(lm, c), pd_oracle(a, 0.0, c)) <= 1e-6);
      });
  }
  CHECK(rel(eppf_generic_quadrature(levy_model_ewens_rate(1.0, 1.0), {2}), 0.5) < 1e-9);
  CHECK(rel(eppf_generic_quadrature(levy_model_generalized_gamma(0.5, 0.0, 0.5 / std::tgamma(0.5)),
                                    {1, 1}),
            0.5) < 1e-9);
}

TEST_CASE("prediction rules") {
  CHECK(prediction_rule(PartitionModel::two_param(0.5, 0.5), Composition::none()) ==
        std::vector<double>{1.0});
  auto r = prediction_rule(PartitionModel::two_param(0.5, 0.0), {2, 1});
  REQUIRE(r.size() == 3);
  CHECK(rel(r[0], 0.5) < 1e-15);
  CHECK(rel(r[1], 1.0 / 6.0) < 1e-15);
  CHECK(rel(r[2], 1.0 / 3.0) < 1e-15);
  for (const auto& m : {PartitionModel::brownian(1.0), PartitionModel::brownian(3.5),
                        PartitionModel::two_param(0.3, 1.2), PartitionModel::ewens(2.0),
                        PartitionModel::generalized_gamma(0.5, 1.0, 1.0)})
    for (const Composition& c : {Composition{1}, Composition{2, 1}, Composition{1, 3, 1}}) {
      auto p = prediction_rule(m, c);
      double s = 0.0;
      for (double v : p) s += v;
      CHECK(std::abs(s - 1.0) < 1e-12);
      const double base = eppf(m, c);
      for (int j = 0; j < c.k(); ++j)
        CHECK(rel(p[j], eppf(m, c.with_incremented(j)) / base) < 1e-8);
      CHECK(rel(p[c.k()], eppf(m, c.with_new_singleton()) / base) < 1e-8);
    }
  auto b = PartitionModel::brownian(1.0);
  CHECK(rel(prediction_rule(b, {1})[1], 1.0 - eppf(b, {2}) / eppf(b, {1})) < 1e-13);
}

TEST_CASE("Brownian block-count law") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    auto d = kn_distribution_brownian(3, lambda);
    const double h2 = specfun::hermite_h(-2, lambda).value;
    const double h3 = specfun::hermite_h(-3, lambda).value;
    const double h4 = specfun::hermite_h(-4, lambda).value;
    CHECK(std::abs(d[0] - 3 * h4) <= 1e-10);
    CHECK(std::abs(d[1] - 3 * lambda * h3) <= 1e-10);
    CHECK(std::abs(d[2] - lambda * lambda * h2) <= 1e-10);
    CHECK(std::abs(d[0] + d[1] + d[2] - 1.0) <= 1e-12);
  }
  CHECK(kn_distribution_brownian(1, 1.0) == std::vector<double>{1.0});
  for (int n : {10, 50, 200}) {
    auto d = kn_distribution_brownian(n, 1.0);
    double s = 0.0;
    for (double v : d) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
  // Agreement with the shape enumeration.
  for (double lambda : {0.5, 1.0, 2.0}) {
    auto m = PartitionModel::brownian(lambda);
    for (int n = 1; n <= 8; ++n) {
      std::vector<double> by_k(n, 0.0);
      for_each_shape(n, [&](const Composition& s) {
        by_k[s.k() - 1] += static_cast<double>(count_shape_arrangements(s)) * eppf(m, s);
      });
      auto d = kn_distribution_brownian(n, lambda);
      for (int k = 0; k < n; ++k) CHECK(rel(d[k], by_k[k]) <= 1e-8);
    }
  }
}

TEST_CASE("mixing the Brownian law over lambda gives the unconditional law") {
  // 2 phi(lambda) d lambda mixes the conditioned model into the theta = 0 one.
  const int n = 6;
  auto exact = to_doubles(kn_distribution_unconditional(n));
  quad::Options o;
  o.abs_tol = 1e-12;
  o.rel_tol = 1e-10;
  for (int k = 1; k <= n; ++k) {
    auto f = [&](double l) {
      return l <= 0.0 ? 0.0 : 2.0 * specfun::gaussian_pdf(l) * kn_distribution_brownian(n, l)[k - 1];
    };
    CHECK(std::abs(quad::integrate(f, 0.0, 12.0, o).value - exact[k - 1]) < 1e-9);
  }
}

TEST_CASE("unconditional law and transitions") {
  auto d3 = kn_distribution_unconditional(3);
  CHECK(d3 == std::vector<BigRational>{BigRational(3, 8), BigRational(3, 8), BigRational(1, 4)});
  auto d2 = kn_distribution_unconditional(2);
  CHECK(d2 == std::vector<BigRational>{BigRational(1, 2), BigRational(1, 2)});
  for (int n = 1; n <= 64; ++n) {
    BigRational s = 0;
    for (const auto& v : kn_distribution_unconditional(n)) s += v;
    CHECK(s == 1);
  }
  auto t = kn_transition_unconditional(2, 1);
  CHECK(t.stay == BigRational(3, 4));
  CHECK(t.up == BigRational(1, 4));
  CHECK(kn_cotransition(1, 1).stay == 1);
  CHECK(kn_cotransition(1, 1).up == 0);
  CHECK(kn_cotransition(2, 2).stay == BigRational(2, 3));
  CHECK(kn_cotransition(2, 2).up == BigRational(1, 3));
  for (double lambda : {0.2, 1.0, 5.0}) {
    specfun::HermiteLadder ladder(lambda, 60);
    CHECK(rel(kn_transition(lambda, 1, 1).up, kn_transition(ladder, 1, 1).up) < 1e-13);
    for (int n = 1; n <= 30; ++n)
      for (int k = 1; k <= n; ++k) {
        auto tr = kn_transition(ladder, n, k);
        CHECK(std::abs(tr.stay + tr.up - 1.0) <= 1e-10);
      }
  }
  // Chain propagation reproduces the law from the closed form.
  const double lambda = 1.0;
  specfun::HermiteLadder ladder(lambda, 80);
  std::vector<double> law{1.0};
  for (int n = 1; n < 40; ++n) {
    std::vector<double> next(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
      auto tr = kn_transition(ladder, n, k);
      next[k - 1] += law[k - 1] * tr.stay;
      next[k] += law[k - 1] * tr.up;
    }
    law = next;
  }
  auto direct = kn_distribution_brownian(40, lambda);
  for (int k = 0; k < 40; ++k) CHECK(std::abs(law[k] - direct[k]) < 1e-12);
}

TEST_CASE("Bayes inversion of the unconditional chain") {
  for (int n = 1; n <= 20; ++n) {
    auto pn = kn_distribution_unconditional(n);
    auto pn1 = kn_distribution_unconditional(n + 1);
    for (int k = 1; k <= n + 1; ++k) {
      BigRational same = 0, down = 0;
      if (k <= n) same = pn[k - 1] * kn_transition_unconditional(n, k).stay / pn1[k - 1];
      if (k >= 2) down = pn[k - 2] * kn_transition_unconditional(n, k - 1).up / pn1[k - 1];
      CHECK(same == kn_cotransition(n, k).stay);
      CHECK(down == kn_cotransition(n, k).up);
    }
  }
}

TEST_CASE("power sums and coarsening") {
  auto pd = PartitionModel::two_param(0.5, 0.0);
  CHECK(power_sum_moment(pd, 1, 4) == 1.0);
  CHECK(rel(power_sum_moment(pd, 2, 1), 0.5) < 1e-15);
  auto b = PartitionModel::brownian(1.0);
  CHECK(rel(power_sum_moment(b, 2, 2), eppf(b, {4}) + eppf(b, {2, 2})) < 1e-14);
  // k = 3: p(3m) + 3 p(2m, m) + p(m, m, m).
  CHECK(rel(power_sum_moment(pd, 2, 3), eppf(pd, {6}) + 3 * eppf(pd, {4, 2}) + eppf(pd, {2, 2, 2})) <
        1e-14);
  CHECK_THROWS_AS(power_sum_moment(pd, 5, 5), BoundsError);

  CHECK(prob_coarser(pd, {4}) == eppf(pd, {4}));
  for (const auto& m : {pd, b, PartitionModel::ewens(1.5)}) {
    CHECK(std::abs(prob_coarser(m, {1, 1}) - 1.0) < 1e-14);
    CHECK(std::abs(prob_coarser(m, {1, 1, 1}) - 1.0) < 1e-14);
  }
  // P(Pi >= pi) is E prod S_{n_i}; for pi = {{1,2},{3,4}} this is E S_2^2.
  CHECK(rel(prob_coarser(b, {2, 2}), power_sum_moment(b, 2, 2)) < 1e-14);
}

TEST_CASE("EPPF table JSON") {
  auto j = eppf_table(PartitionModel::ewens(1.0), 3);
  CHECK(j["n"] == 3);
  CHECK(j["entries"].size() == 3);
  CHECK(j["entries"][0]["shape"] == nlohmann::json::array({3}));
  CHECK(j["entries"][1]["count"] == "3");
  CHECK(rel(j["entries"][0]["p"].get<double>(), 1.0 / 3.0) < 1e-15);
  CHECK(j["model"]["family"] == "ewens");
}
