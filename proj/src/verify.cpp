#include "pkpart/verify.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "pkpart/quadrature.hpp"
#include "pkpart/samplers.hpp"
#include "pkpart/specfun.hpp"

namespace pkpart::verify {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = specfun::kPi;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string list(const std::vector<double>& xs) {
  std::string s = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + short_fmt(xs[i]);
  return s + "}";
}

enum class Mode { abs, rel, scaled };

// Residual bookkeeping for one check. The first failure is kept as detail.
class Residuals {
 public:
  void compare(double got, double want, double tol, Mode mode, const std::string& where) {
    const double a = std::abs(got - want);
    const double r = want != 0.0 ? a / std::abs(want) : (a == 0.0 ? 0.0 : INFINITY);
    const double s = a / std::max(1.0, std::abs(want));
    max_abs_ = std::max(max_abs_, a);
    if (std::isnan(a)) max_abs_ = NAN;
    max_rel_ = std::max(max_rel_, mode == Mode::scaled ? s : r);
    const double metric = mode == Mode::abs ? a : mode == Mode::rel ? r : s;
    if (!(metric <= tol)) fail(where + ": got " + fmt(got) + ", want " + fmt(want));
  }
  void exact(bool equal, const std::string& where) {
    if (!equal) {
      max_abs_ = std::max(max_abs_, 1.0);
      fail(where + ": exact values differ");
    }
  }
  // Statistical test passes when p > threshold.
  void p_value(double p, double threshold, const std::string& where) {
    stat_ = stat_ ? std::min(*stat_, p) : p;
    if (!(p > threshold)) fail(where + ": p-value " + fmt(p));
  }
  // |z| within bound.
  void z_score(double z, double bound, const std::string& where) {
    stat_ = stat_ ? std::max(*stat_, std::abs(z)) : std::abs(z);
    if (!(std::abs(z) <= bound)) fail(where + ": z = " + fmt(z));
  }
  void fail(const std::string& why) {
    if (ok_) detail_ = why;
    ok_ = false;
  }
  void note(const std::string& s) { note_ += (note_.empty() ? "" : "; ") + s; }

  bool ok() const { return ok_; }
  double max_abs() const { return max_abs_; }
  double max_rel() const { return max_rel_; }
  const std::optional<double>& stat() const { return stat_; }
  std::string detail() const {
    if (detail_.empty()) return note_;
    return note_.empty() ? detail_ : detail_ + "; " + note_;
  }

 private:
  bool ok_ = true;
  double max_abs_ = 0.0, max_rel_ = 0.0;
  std::optional<double> stat_;
  std::string detail_, note_;
};

template <class Body>
CheckReport guarded(std::string name, double tol, std::string grid, Body&& body) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.name = std::move(name);
  rep.tolerance = tol;
  rep.grid = std::move(grid);
  Residuals res;
  try {
    body(res);
    rep.status = res.ok() ? Status::pass : Status::fail;
    rep.detail = res.detail();
  } catch (const NumericalError& e) {
    rep.status = Status::numerical_error;
    rep.detail = e.what();
  } catch (const std::exception& e) {
    rep.status = Status::fail;
    rep.detail = std::string("exception: ") + e.what();
  }
  rep.max_abs_residual = res.max_abs();
  rep.max_rel_residual = res.max_rel();
  rep.statistic = res.stat();
  rep.runtime_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

double tolerance_for(const PartitionModel& m) { return m.closed_form() ? 1e-9 : 1e-6; }

// Shape-cached EPPF so that enumeration over set partitions stays cheap.
EppfFn cached(EppfFn p) {
  auto memo = std::make_shared<std::map<Composition, double>>();
  return [p = std::move(p), memo](const Composition& c) {
    const auto key = c.sorted_decreasing();
    auto it = memo->find(key);
    if (it != memo->end()) return it->second;
    return (*memo)[key] = p(c);
  };
}

EppfFn model_eppf(const PartitionModel& m) {
  return [m](const Composition& c) { return eppf(m, c); };
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

// Ladders cached by node, shared by all integrals of one check.
class LadderCache {
 public:
  explicit LadderCache(int depth) : depth_(depth) {}
  const specfun::HermiteLadder& at(double z) {
    auto it = cache_.find(z);
    if (it == cache_.end())
      it = cache_.emplace(z, std::make_unique<specfun::HermiteLadder>(z, depth_)).first;
    return *it->second;
  }

 private:
  int depth_;
  std::map<double, std::unique_ptr<specfun::HermiteLadder>> cache_;
};

quad::Options tight() {
  quad::Options o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-11;
  return o;
}

struct Bernoulli {
  double hits = 0;
  double trials = 0;
  double z(double p) const { return (hits / trials - p) / std::sqrt(p * (1 - p) / trials); }
};

struct Moments {
  double sum = 0, sum2 = 0;
  double n = 0;
  void add(double x) {
    sum += x;
    sum2 += x * x;
    n += 1;
  }
  double mean() const { return sum / n; }
  double se() const { return std::sqrt(std::max(0.0, sum2 / n - mean() * mean()) / n); }
};

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::numerical_error: return "numerical-error";
  }
  return "fail";
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["status"] = to_string(r.status);
  j["max_abs_residual"] = r.max_abs_residual;
  j["max_rel_residual"] = r.max_rel_residual;
  j["tolerance"] = r.tolerance;
  j["statistic"] = r.statistic ? nlohmann::json(*r.statistic) : nlohmann::json(nullptr);
  j["grid"] = r.grid;
  j["runtime_seconds"] = r.runtime_seconds;
  j["detail"] = r.detail;
  return j;
}

nlohmann::json to_json(const std::vector<CheckReport>& rs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

std::string csv_header() {
  return "name,status,max_abs_residual,max_rel_residual,tolerance,statistic,grid,runtime_seconds,"
         "detail";
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}
}  // namespace

std::string to_csv_row(const CheckReport& r) {
  return csv_field(r.name) + "," + to_string(r.status) + "," + fmt(r.max_abs_residual) + "," +
         fmt(r.max_rel_residual) + "," + fmt(r.tolerance) + "," +
         (r.statistic ? fmt(*r.statistic) : "") + "," + csv_field(r.grid) + "," +
         fmt(r.runtime_seconds) + "," + csv_field(r.detail);
}

int exit_code(const std::vector<CheckReport>& rs) {
  bool numerical = false;
  for (const auto& r : rs) {
    if (r.status == Status::fail) return 1;
    if (r.status == Status::numerical_error) numerical = true;
  }
  return numerical ? 2 : 0;
}

// ---- statistics -------------------------------------------------------------

ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& probs) {
  if (observed.size() != probs.size() || observed.empty())
    throw DomainError("chi_square: observed and probs must have equal, positive length");
  double total = 0.0;
  for (double o : observed) total += o;
  std::vector<std::size_t> order(probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return probs[a] < probs[b]; });
  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double o = 0.0, e = 0.0;
  for (auto i : order) {
    o += observed[i];
    e += probs[i] * total;
    if (e >= 5.0) {
      bins.emplace_back(o, e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (bins.empty()) {
      bins.emplace_back(o, e);
    } else {
      bins.back().first += o;
      bins.back().second += e;
    }
  }
  ChiSquare out;
  out.bins = static_cast<int>(bins.size());
  out.dof = out.bins - 1;
  for (const auto& [ob, ex] : bins) {
    if (ex > 0.0) {
      out.statistic += (ob - ex) * (ob - ex) / ex;
    } else if (ob > 0.0) {
      out.statistic = INFINITY;
    }
  }
  if (out.dof < 1) return out;
  out.p_value = std::isfinite(out.statistic)
                    ? boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic)
                    : 0.0;
  return out;
}

double kolmogorov_tail(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // P(K <= x) = sqrt(2 pi)/x sum exp(-(2j-1)^2 pi^2 / (8 x^2)).
    double s = 0.0;
    for (int j = 1; j < 50; ++j) {
      const double t = std::exp(-(2 * j - 1) * (2 * j - 1) * kPi * kPi / (8 * x * x));
      s += t;
      if (t < 1e-17 * s) break;
    }
    return std::clamp(1.0 - std::sqrt(2 * kPi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j < 100; ++j) {
    const double t = std::exp(-2.0 * j * j * x * x);
    s += (j % 2 ? 1.0 : -1.0) * t;
    if (t < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {
double ks_p(double d, double ne) {
  const double sq = std::sqrt(ne);
  return kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d);
}
}  // namespace

KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, ks_p(d, n)};
}

KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size()), m = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  return {d, ks_p(d, n * m / (n + m))};
}

// ---- identity checks --------------------------------------------------------

CheckReport check_normalization(const std::string& label, const EppfFn& p, int n_max,
                                double tol) {
  return guarded("normalization[" + label + "]", tol, "n=1.." + std::to_string(n_max),
                 [&](Residuals& res) {
                   auto pc = cached(p);
                   for (int n = 1; n <= n_max; ++n) {
                     double s = 0.0;
                     for_each_set_partition(n, [&](const SetPartition& sp) {
                       s += pc(composition_of(sp));
                     });
                     res.compare(s, 1.0, tol, Mode::abs, "n=" + std::to_string(n));
                   }
                 });
}

CheckReport check_normalization(const PartitionModel& model, int n_max) {
  return check_normalization(model.str(), model_eppf(model), n_max, tolerance_for(model));
}

CheckReport check_addition_rules(const std::string& label, const EppfFn& p, int n_max,
                                 double tol) {
  return guarded("addition_rules[" + label + "]", tol,
                 "compositions n=1.." + std::to_string(n_max), [&](Residuals& res) {
                   auto pc = cached(p);
                   for (int n = 1; n <= n_max; ++n) {
                     for_each_composition(n, [&](const Composition& c) {
                       double s = pc(c.with_new_singleton());
                       for (int j = 0; j < c.k(); ++j) s += pc(c.with_incremented(j));
                       res.compare(s, pc(c), tol, Mode::rel, c.str());
                     });
                   }
                 });
}

CheckReport check_addition_rules(const PartitionModel& model, int n_max) {
  return check_addition_rules(model.str(), model_eppf(model), n_max, tolerance_for(model));
}

CheckReport check_consistency_relations(const PartitionModel& model) {
  const double tol = model.closed_form() ? 1e-12 : 1e-9;
  return guarded(
      "consistency[" + model.str() + "]", tol, "cons1-cons5, p(n) for n<=4", [&](Residuals& res) {
        // Moments of the structural distribution, computed independently of
        // the EPPF where a separate route exists.
        std::function<double(double)> mu;
        if (auto* m = model.get<Ewens>()) {
          mu = [th = m->theta](double q) {
            return std::exp(std::lgamma(q + 1) + std::lgamma(1 + th) - std::lgamma(q + 1 + th));
          };
        } else if (auto* m = model.get<TwoParam>()) {
          mu = [a = m->alpha, th = m->theta](double q) {
            return std::exp(std::lgamma(q + 1 - a) + std::lgamma(1 + th) - std::lgamma(1 - a) -
                            std::lgamma(q + 1 + th));
          };
        } else if (auto* m = model.get<StableConditioned>()) {
          mu = [a = m->alpha, t = m->t](double q) { return specfun::structural_moment(a, q, t); };
        } else if (auto* m = model.get<BrownianConditioned>()) {
          mu = [l = m->lambda](double q) { return specfun::structural_moment_hermite(q, l); };
        } else {
          // No separate moment route: p(n) = mu(n - 1) is the definition here.
          const auto lm = levy_model_for(model);
          mu = [lm](double q) {
            return eppf_generic_quadrature(lm, {static_cast<int>(std::lround(q)) + 1});
          };
          res.note("structural moments taken from single-block EPPF values");
        }
        auto p = [&](std::initializer_list<int> c) { return eppf(model, Composition(c)); };
        res.compare(p({1}), 1.0, tol, Mode::abs, "p(1) = 1");
        res.compare(p({2}) + p({1, 1}), 1.0, tol, Mode::abs, "cons1");
        res.compare(p({3}) + p({2, 1}), p({2}), tol, Mode::abs, "cons2 first");
        res.compare(2 * p({2, 1}) + p({1, 1, 1}), p({1, 1}), tol, Mode::abs, "cons2 second");
        res.compare(p({1, 2}), p({2, 1}), tol, Mode::abs, "p(2,1) = p(1,2)");
        for (int n = 1; n <= 4; ++n)
          res.compare(p({n}), mu(n - 1), tol, Mode::abs, "cons3 n=" + std::to_string(n));
        const double m1 = mu(1), m2 = mu(2);
        res.compare(p({1, 1}), 1 - m1, tol, Mode::abs, "cons5 p(1,1)");
        res.compare(p({2, 1}), m1 - m2, tol, Mode::abs, "cons5 p(2,1)");
        res.compare(p({1, 1, 1}), 1 - 3 * m1 + 2 * m2, tol, Mode::abs, "cons5 p(1,1,1)");
      });
}

CheckReport check_point_values() {
  const double tol = std::numeric_limits<double>::epsilon();
  return guarded("point_values", tol, "alpha=0.1..0.9, theta=0", [&](Residuals& res) {
    for (int i = 1; i <= 9; ++i) {
      const double a = i / 10.0;
      auto m = PartitionModel::two_param(a, 0.0);
      res.compare(eppf(m, {2}), 1.0 - a, tol, Mode::abs, "p(2) alpha=" + short_fmt(a));
      res.compare(eppf(m, {1, 1}), a, tol, Mode::abs, "p(1,1) alpha=" + short_fmt(a));
    }
  });
}

CheckReport check_moment_recursion(double alpha, double t, int n_max) {
  const double tol = alpha == 0.5 ? 1e-8 : 1e-6;
  return guarded("momalph[alpha=" + short_fmt(alpha) + ",t=" + short_fmt(t) + "]", tol,
                 "1<=k<=n<=" + std::to_string(n_max), [&](Residuals& res) {
                   auto mu = [&](double q) { return specfun::structural_moment(alpha, q, t); };
                   for (int n = 1; n <= n_max; ++n)
                     for (int k = 1; k <= n; ++k) {
                       const double lhs = mu(n - 1 - k * alpha + alpha);
                       const double coef =
                           std::exp(std::lgamma(n - k * alpha) -
                                    std::lgamma(n + 1 - k * alpha - alpha)) *
                           alpha * std::pow(t, -alpha);
                       const double rhs =
                           mu(n - k * alpha + alpha) + coef * mu(n - k * alpha);
                       res.compare(lhs, rhs, tol, Mode::abs,
                                   "n=" + std::to_string(n) + ",k=" + std::to_string(k));
                     }
                 });
}

CheckReport check_recurh() {
  const double tol = 1e-10;
  return guarded("recurh", tol, "nu=-6..0 step 0.25, z=0..5 step 0.5", [&](Residuals& res) {
    for (int i = 0; i <= 24; ++i) {
      const double nu = -6.0 + 0.25 * i;
      for (int j = 0; j <= 10; ++j) {
        const double z = 0.5 * j;
        const double up = specfun::hermite_h(nu + 1, z).value;
        const double mid = specfun::hermite_h(nu, z).value;
        const double down = specfun::hermite_h(nu - 1, z).value;
        res.compare(z * mid - nu * down, up, tol, Mode::scaled,
                    "nu=" + short_fmt(nu) + ",z=" + short_fmt(z));
      }
    }
  });
}

CheckReport check_psi2_chain() {
  const double tol = 1e-10;
  return guarded("psi2", tol, "z=0..5 step 0.25", [&](Residuals& res) {
    for (int j = 0; j <= 20; ++j) {
      const double x = 0.25 * j;
      const double m = specfun::mills_ratio(x);
      const std::string at = "z=" + short_fmt(x);
      res.compare(specfun::hermite_h(-2, x).value, 1 - x * m, tol, Mode::scaled, "h-2 " + at);
      res.compare(2 * specfun::hermite_h(-3, x).value, -x + (1 + x * x) * m, tol, Mode::scaled,
                  "2h-3 " + at);
      res.compare(6 * specfun::hermite_h(-4, x).value, 2 + x * x - (3 * x + x * x * x) * m, tol,
                  Mode::scaled, "6h-4 " + at);
    }
  });
}

CheckReport check_strq3(const std::vector<double>& thetas, const std::vector<double>& qs) {
  const double tol = 1e-8;
  return guarded("strq3", tol, "theta=" + list(thetas) + " x q=" + list(qs), [&](Residuals& res) {
    for (double th : thetas)
      for (double q : qs) {
        auto f = [&](double l) {
          if (l <= 0.0) return 0.0;
          return 2.0 * std::pow(l, 2 * th) * specfun::hermite_h(-2 * q, l).value *
                 specfun::gaussian_pdf(l);
        };
        // phi(14) ~ 1e-43 bounds everything beyond.
        const double lhs = quad::integrate(f, 0.0, 14.0, tight()).value;
        const double rhs =
            std::exp(-(th + q) * std::log(2.0) + std::lgamma(2 * th + 1) - std::lgamma(q + th + 1));
        res.compare(lhs, rhs, tol, Mode::rel, "theta=" + short_fmt(th) + ",q=" + short_fmt(q));
      }
  });
}

CheckReport check_idsymm(double q, double r) {
  const double tol = 1e-8;
  constexpr int kTerms = 1000000;
  return guarded(
      "idsymm[q=" + short_fmt(q) + ",r=" + short_fmt(r) + "]", tol,
      std::to_string(kTerms) + " terms, mean of last two partial sums", [&](Residuals& res) {
        auto nonpos_int = [](double x) { return x <= 0.0 && x == std::round(x); };
        if (!(q + r + 0.5 < -1.0) || nonpos_int(2 * q) || nonpos_int(2 * r))
          throw DomainError("idsymm: (q, r) outside the absolutely convergent region");
        // Neumaier summation of sign * exp(log term).
        double sum = 0.0, comp = 0.0, prev = 0.0;
        for (int j = 0; j <= kTerms; ++j) {
          const double a = q + 0.5 * j, b = r + 0.5 * j;
          const double lt = specfun::log_abs_gamma(a) + specfun::log_abs_gamma(b) +
                            j * std::log(2.0) - std::lgamma(j + 1.0);
          const double sign = specfun::gamma_sign(a) * specfun::gamma_sign(b) * (j % 2 ? -1 : 1);
          const double term = sign * std::exp(lt);
          const double s = sum + term;
          comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
          sum = s;
          if (j == kTerms - 1) prev = sum + comp;
        }
        const double series = 0.5 * (prev + sum + comp);
        // The sum is Gamma(q) Gamma(q+1/2) Gamma(r) Gamma(r+1/2) / (sqrt(pi) Gamma(q+r+1/2)),
        // i.e. 4^{-(q+r)} times the often quoted 4 sqrt(pi) Gamma(2q) Gamma(2r) / Gamma(q+r+1/2).
        const double quoted = 4 * std::sqrt(kPi) * std::tgamma(2 * q) * std::tgamma(2 * r) /
                              std::tgamma(q + r + 0.5);
        const double closed = std::tgamma(q) * std::tgamma(q + 0.5) * std::tgamma(r) *
                              std::tgamma(r + 0.5) / (std::sqrt(kPi) * std::tgamma(q + r + 0.5));
        res.compare(series, closed, tol, Mode::rel, "series vs closed form");
        res.note("series/quoted form = " + fmt(series / quoted) + ", 4^-(q+r) = " +
                 fmt(std::pow(4.0, -(q + r))));
      });
}

CheckReport check_hfiden(int n_max) {
  return guarded("hfiden", 0.0, "1<=k<=n<=" + std::to_string(n_max), [&](Residuals& res) {
    // Both sides times 2^{2n-2k}: sum #shape prod (2 n_i - 3)!! 2^{n-k} and
    // C(2n-k-1, n-1) (n-1)! / (k-1)!.
    auto odd_double_factorial = [](int m) {  // (2m - 1)!!
      BigInt f = 1;
      for (int i = 1; i <= m; ++i) f *= 2 * i - 1;
      return f;
    };
    for (int n = 1; n <= n_max; ++n) {
      std::vector<BigInt> lhs(n + 1, 0);
      for_each_shape(n, [&](const Composition& s) {
        BigInt term = count_shape_arrangements(s);
        for (int ni : s.parts()) term *= odd_double_factorial(ni - 1);
        lhs[s.k()] += term << (n - s.k());
      });
      for (int k = 1; k <= n; ++k) {
        const BigInt rhs = binomial(2 * n - k - 1, n - 1) * factorial(n - 1) / factorial(k - 1);
        res.exact(lhs[k] == rhs, "n=" + std::to_string(n) + ",k=" + std::to_string(k));
      }
    }
  });
}

namespace {

using Poly = std::vector<BigRational>;  // ascending powers of theta

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, BigRational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

void poly_add_scaled(Poly& acc, const Poly& p, const BigRational& s) {
  if (acc.size() < p.size()) acc.resize(p.size(), BigRational(0));
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += s * p[i];
}

Poly trimmed(Poly p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

// prod_{i<m} (theta + c + step * i)
Poly factorial_poly(const BigRational& c, int m, int step) {
  Poly p{BigRational(1)};
  for (int i = 0; i < m; ++i) p = poly_mul(p, Poly{c + step * i, BigRational(1)});
  return p;
}

// Coefficient h_{n,k} of x^{n-2k} in the Hermite polynomial h_n.
BigRational hermite_coefficient(int n, int k) {
  BigInt v = binomial(n, 2 * k) * factorial(2 * k) / (factorial(k) << k);
  return BigRational(k % 2 ? -v : v);
}

}  // namespace

CheckReport check_hermite_stirling(int m_max) {
  return guarded("hermite_stirling", 0.0, "m=0.." + std::to_string(m_max), [&](Residuals& res) {
    const BigRational half(1, 2);
    for (int m = 0; m <= m_max; ++m) {
      Poly even, odd;
      for (int k = 0; k <= m; ++k) {
        const BigRational scale = BigRational(1) / BigRational(BigInt(1) << k);
        poly_add_scaled(even, factorial_poly(half, m - k, 1), hermite_coefficient(2 * m, k) * scale);
        poly_add_scaled(odd, factorial_poly(1, m - k, 1), hermite_coefficient(2 * m + 1, k) * scale);
      }
      res.exact(trimmed(even) == trimmed(factorial_poly(0, m, -1)),
                "even m=" + std::to_string(m));
      res.exact(trimmed(odd) == trimmed(factorial_poly(-half, m, -1)),
                "odd m=" + std::to_string(m));
    }
  });
}

CheckReport check_pdint(double theta, int n_max) {
  const double tol = 1e-6;
  return guarded(
      "pdint[theta=" + short_fmt(theta) + "]", tol, "shapes n<=" + std::to_string(n_max),
      [&](Residuals& res) {
        LadderCache ladders(2 * n_max);
        const double norm = specfun::gaussian_abs_moment(theta);
        const auto target = PartitionModel::two_param(0.5, theta);
        for (int n = 1; n <= n_max; ++n)
          for_each_shape(n, [&](const Composition& c) {
            auto f = [&](double l) {
              if (l <= 0.0) return 0.0;
              return eppf_brownian(ladders.at(l), c) * 2 * std::pow(l, 2 * theta) *
                     specfun::gaussian_pdf(l) / norm;
            };
            const double mix = quad::integrate(f, 0.0, 14.0, tight()).value;
            res.compare(mix, eppf(target, c), tol, Mode::rel, c.str());
          });
      });
}

CheckReport check_scaling(double alpha, const std::vector<double>& cs,
                          const std::vector<double>& ts, int n_max) {
  const double tol = 1e-6;
  return guarded(
      "scaling[alpha=" + short_fmt(alpha) + "]", tol,
      "c=" + list(cs) + " x t=" + list(ts) + ", shapes n<=" + std::to_string(n_max),
      [&](Residuals& res) {
        for (double c : cs)
          for (double t : ts) {
            // Density of the total under c rho_alpha, up to the factor c^{-1/alpha}
            // that cancels in the ratio below.
            const double s = std::pow(c, -1.0 / alpha);
            auto f = [&](double x) {
              return x <= 0.0 ? 0.0 : specfun::stable_density(alpha, x * s).value;
            };
            const auto stable = PartitionModel::stable_conditioned(alpha, s * t);
            for (int n = 1; n <= n_max; ++n)
              for_each_shape(n, [&](const Composition& comp) {
                const int k = comp.k();
                const double q = n - k * alpha;
                // Palm form: Dirichlet integral of the k jump densities, convolved
                // with the density of the rest.
                auto g = [&](double u) { return f(t - u); };
                const double conv = quad::integrate_power_left(g, q - 1.0, t, tight()).value;
                double lp = k * std::log(c * alpha) - n * std::log(t) - std::lgamma(q);
                for (int ni : comp.parts())
                  if (ni > 1) lp += specfun::log_rising(1.0 - alpha, ni - 1);
                const double direct = std::exp(lp) * conv / f(t);
                res.compare(direct, eppf(stable, comp), tol, Mode::rel,
                            "c=" + short_fmt(c) + ",t=" + short_fmt(t) + "," + comp.str());
              });
          }
      });
}

CheckReport check_pktilt(double b, double c, int n_max) {
  const double tol = 1e-6;
  return guarded(
      "pktilt[b=" + short_fmt(b) + ",c=" + short_fmt(c) + "]", tol,
      "alpha=0.5, shapes n<=" + std::to_string(n_max), [&](Residuals& res) {
        // T has density f_{1/2}(t/s)/s exp(K sqrt(b) - b t), K = 2 c sqrt(pi), s = K^2;
        // given T = t the partition is Brownian with lambda = sqrt(s / (2t)).
        const double K = 2.0 * c * std::sqrt(kPi);
        const double s = K * K;
        const auto gg = PartitionModel::generalized_gamma(0.5, b, c);
        LadderCache ladders(2 * n_max);
        for (int n = 1; n <= n_max; ++n)
          for_each_shape(n, [&](const Composition& comp) {
            auto f = [&](double l) {
              if (l <= 0.0) return 0.0;
              const double w = 2 * specfun::gaussian_pdf(l) *
                               std::exp(K * std::sqrt(b) - b * s / (2 * l * l));
              return w == 0.0 ? 0.0 : w * eppf_brownian(ladders.at(l), comp);
            };
            const double mix = quad::integrate(f, 0.0, 14.0, tight()).value;
            res.compare(mix, eppf(gg, comp), tol, Mode::rel, comp.str());
          });
      });
}

CheckReport check_sumform(const std::vector<double>& lambdas, int n_max) {
  const double tol = 1e-10;
  return guarded("sumform", tol, "lambda=" + list(lambdas) + ", n<=" + std::to_string(n_max),
                 [&](Residuals& res) {
                   for (double l : lambdas) {
                     auto m = PartitionModel::brownian(l);
                     for (int n = 1; n <= n_max; ++n) {
                       std::vector<double> by_k(n, 0.0);
                       for_each_shape(n, [&](const Composition& s) {
                         by_k[s.k() - 1] +=
                             static_cast<double>(count_shape_arrangements(s)) * eppf(m, s);
                       });
                       const auto law = kn_distribution_brownian(n, l);
                       for (int k = 1; k <= n; ++k)
                         res.compare(by_k[k - 1], law[k - 1], tol, Mode::rel,
                                     "lambda=" + short_fmt(l) + ",n=" + std::to_string(n) +
                                         ",k=" + std::to_string(k));
                     }
                   }
                 });
}

CheckReport check_kn_small(const std::vector<double>& lambdas) {
  const double tol = 1e-10;
  return guarded("kn_values", tol, "n=3, lambda=" + list(lambdas), [&](Residuals& res) {
    for (double l : lambdas) {
      const auto d = kn_distribution_brownian(3, l);
      const double m = specfun::mills_ratio(l);
      const std::string at = "lambda=" + short_fmt(l);
      res.compare(d[0], 1 + 0.5 * l * l - (1.5 * l + 0.5 * l * l * l) * m, tol, Mode::abs,
                  "K=1 " + at);
      res.compare(d[1], 3 * (-0.5 * l * l + (0.5 * l + 0.5 * l * l * l) * m), tol, Mode::abs,
                  "K=2 " + at);
      res.compare(d[2], l * l - l * l * l * m, tol, Mode::abs, "K=3 " + at);
      res.compare(d[0] + d[1] + d[2], 1.0, 1e-12, Mode::abs, "sum " + at);
    }
  });
}

CheckReport check_kn_unconditional() {
  return guarded("kn_unconditional", 0.0, "n=3", [&](Residuals& res) {
    const auto d = kn_distribution_unconditional(3);
    res.exact(d == std::vector<BigRational>{BigRational(3, 8), BigRational(3, 8),
                                            BigRational(1, 4)},
              "(3/8, 3/8, 1/4)");
  });
}

CheckReport check_bayes_inversion(int n_max) {
  return guarded("bayes", 0.0, "n=1.." + std::to_string(n_max), [&](Residuals& res) {
    auto pn = kn_distribution_unconditional(1);
    for (int n = 1; n <= n_max; ++n) {
      const auto pn1 = kn_distribution_unconditional(n + 1);
      for (int k = 1; k <= n + 1; ++k) {
        BigRational same = 0, down = 0;
        if (k <= n) same = pn[k - 1] * kn_transition_unconditional(n, k).stay / pn1[k - 1];
        if (k >= 2) down = pn[k - 2] * kn_transition_unconditional(n, k - 1).up / pn1[k - 1];
        const auto co = kn_cotransition(n, k);
        const std::string at = "n=" + std::to_string(n) + ",k=" + std::to_string(k);
        res.exact(same == co.stay, "stay " + at);
        res.exact(down == co.up, "down " + at);
      }
      pn = pn1;
    }
  });
}

CheckReport check_gibbs(double alpha, double theta, int n_max) {
  const double tol = 1e-12;
  auto model = PartitionModel::two_param(alpha, theta);
  return guarded("gibbs[" + model.str() + "]", tol, "shapes n<=" + std::to_string(n_max),
                 [&](Residuals& res) {
                   for (int n = 1; n <= n_max; ++n) {
                     std::map<int, double> first;
                     for_each_shape(n, [&](const Composition& s) {
                       double w = 0.0;
                       for (int ni : s.parts())
                         if (ni > 1) w += specfun::log_rising(1.0 - alpha, ni - 1);
                       const double v = eppf(model, s) / std::exp(w);
                       auto [it, fresh] = first.emplace(s.k(), v);
                       if (!fresh) res.compare(v, it->second, tol, Mode::rel, s.str());
                     });
                   }
                 });
}

CheckReport check_brownian_vs_stable(const std::vector<double>& lambdas, int n_max) {
  const double tol = 1e-6;
  return guarded("brownian_vs_stable", tol,
                 "lambda=" + list(lambdas) + ", compositions n<=" + std::to_string(n_max),
                 [&](Residuals& res) {
                   for (double l : lambdas) {
                     auto br = PartitionModel::brownian(l);
                     auto st = PartitionModel::stable_conditioned(0.5, 0.5 / (l * l));
                     for (int n = 1; n <= n_max; ++n)
                       for_each_composition(n, [&](const Composition& c) {
                         res.compare(eppf(st, c), eppf(br, c), tol, Mode::rel,
                                     "lambda=" + short_fmt(l) + "," + c.str());
                       });
                   }
                 });
}

CheckReport check_stable_alternative(double alpha, const std::vector<double>& ts, int n_max) {
  const double tol = 1e-6;
  return guarded("stable_alternative[alpha=" + short_fmt(alpha) + "]", tol,
                 "t=" + list(ts) + ", compositions n<=" + std::to_string(n_max),
                 [&](Residuals& res) {
                   for (double t : ts) {
                     auto st = PartitionModel::stable_conditioned(alpha, t);
                     for (int n = 1; n <= n_max; ++n)
                       for_each_composition(n, [&](const Composition& c) {
                         res.compare(eppf_stable_alternative(alpha, t, c), eppf(st, c), tol,
                                     Mode::rel, "t=" + short_fmt(t) + "," + c.str());
                       });
                   }
                 });
}

CheckReport check_generic_levy(int n_max) {
  const double tol = 1e-6;
  return guarded("generic_levy", tol,
                 "ewens rate theta={0.5,2} b=1; stable b=0 alpha={0.3,0.5,0.7}; shapes n<=" +
                     std::to_string(n_max),
                 [&](Residuals& res) {
                   auto sweep = [&](const LevyModel& lm, const PartitionModel& m) {
                     for (int n = 1; n <= n_max; ++n)
                       for_each_shape(n, [&](const Composition& c) {
                         res.compare(eppf_generic_quadrature(lm, c), eppf(m, c), tol, Mode::rel,
                                     lm.name + " " + c.str());
                       });
                   };
                   for (double th : {0.5, 2.0})
                     sweep(levy_model_ewens_rate(th, 1.0), PartitionModel::ewens(th));
                   for (double a : {0.3, 0.5, 0.7})
                     sweep(levy_model_generalized_gamma(a, 0.0, 1.0),
                           PartitionModel::two_param(a, 0.0));
                 });
}

// ---- Monte Carlo ------------------------------------------------------------

CheckReport mc_compare_eppf(const std::string& label, const PartitionModel& model, int n,
                            const PartitionSampler& sampler, int N, RandomSource& r) {
  const double threshold = 1e-3;
  return guarded("mc_eppf[" + label + "]", threshold,
                 "n=" + std::to_string(n) + ", N=" + std::to_string(N) + ", chi-square",
                 [&](Residuals& res) {
                   if (n < 1 || n > 5) throw BoundsError("mc_compare_eppf: 1 <= n <= 5");
                   const auto parts = enumerate_set_partitions(n);
                   std::map<SetPartition, std::size_t> index;
                   std::vector<double> probs;
                   for (const auto& p : parts) {
                     index.emplace(p, probs.size());
                     probs.push_back(eppf(model, composition_of(p)));
                   }
                   std::vector<double> counts(parts.size(), 0.0);
                   for (int i = 0; i < N; ++i) counts[index.at(sampler(r))] += 1;
                   for (std::size_t i = 0; i < parts.size(); ++i)
                     res.compare(counts[i] / N, probs[i], 1.0, Mode::abs, "frequency");
                   const auto cs = chi_square(counts, probs);
                   res.p_value(cs.p_value, threshold, "chi-square");
                   res.note("chi2=" + short_fmt(cs.statistic) + " dof=" + std::to_string(cs.dof));
                 });
}

CheckReport mc_cumulant_form(double alpha, double b, const Composition& c, int N,
                             RandomSource& r) {
  const double bound = 4.0;
  return guarded(
      "mc_cumulant[alpha=" + short_fmt(alpha) + ",b=" + short_fmt(b) + "," + c.str() + "]", bound,
      "N=" + std::to_string(N) + ", z-score", [&](Residuals& res) {
        // With c = alpha / Gamma(1 - alpha) the total is exactly tilted stable(alpha, b).
        const double cc = alpha / std::tgamma(1.0 - alpha);
        const auto lm = levy_model_generalized_gamma(alpha, b, cc);
        double log_kappa = 0.0;
        for (int ni : c.parts()) log_kappa += std::log(lm.kappa(ni));
        Moments mom;
        for (int i = 0; i < N; ++i) {
          double x = sample_tilted_stable(alpha, b, r);
          for (int ni : c.parts()) x += r.gamma(ni - alpha) / b;
          mom.add(std::exp(log_kappa - c.n() * std::log(x)));
        }
        const double want = eppf_generic_quadrature(lm, c);
        res.compare(mom.mean(), want, 1.0, Mode::abs, "estimate");
        res.z_score(mom.se() > 0 ? (mom.mean() - want) / mom.se() : 0.0, bound, "estimate");
        res.note("estimate=" + fmt(mom.mean()) + " se=" + fmt(mom.se()) + " quadrature=" + fmt(want));
      });
}

CheckReport mc_residual_ks(double lambda, int N, RandomSource& r) {
  const double threshold = 1e-3;
  return guarded("mc_residual[lambda=" + short_fmt(lambda) + "]", threshold,
                 "N=" + std::to_string(N) + ", one-sample KS", [&](Residuals& res) {
                   std::vector<double> xs(N);
                   for (auto& x : xs) x = sample_residual_construction(lambda, 1, r).masses()[0];
                   const auto ks = ks_one_sample(std::move(xs), [&](double y) {
                     return specfun::structural_cdf_brownian(lambda, y);
                   });
                   res.p_value(ks.p_value, threshold, "KS");
                   res.note("D=" + short_fmt(ks.d));
                 });
}

CheckReport mc_deletion(double alpha, double theta, int k, int N, RandomSource& r) {
  const double bound = 4.0;
  return guarded("mc_deletion[alpha=" + short_fmt(alpha) + ",theta=" + short_fmt(theta) +
                     ",k=" + std::to_string(k) + "]",
                 bound, "N=" + std::to_string(N) + ", p(2), z-score", [&](Residuals& res) {
                   Bernoulli hits;
                   for (int i = 0; i < N; ++i) {
                     hits.hits += sample_pk_deletion(alpha, theta, k, 2, r).num_blocks() == 1;
                     hits.trials += 1;
                   }
                   const double p = (1 - alpha) / (1 + theta + k * alpha);
                   res.compare(hits.hits / N, p, 1.0, Mode::abs, "p(2)");
                   res.z_score(hits.z(p), bound, "p(2)");
                 });
}

CheckReport mc_tilted_acceptance(double alpha, double b, int N, RandomSource& r) {
  const double bound = 4.0;
  return guarded("mc_tilted[alpha=" + short_fmt(alpha) + ",b=" + short_fmt(b) + "]", bound,
                 "N=" + std::to_string(N) + " accepted, z-score", [&](Residuals& res) {
                   std::uint64_t proposals = 0;
                   for (int i = 0; i < N; ++i) sample_tilted_stable(alpha, b, r, &proposals);
                   const double p = std::exp(-std::pow(b, alpha));
                   Bernoulli acc{static_cast<double>(N), static_cast<double>(proposals)};
                   res.compare(N / static_cast<double>(proposals), p, 1.0, Mode::abs, "rate");
                   res.z_score(acc.z(p), bound, "acceptance rate");
                 });
}

CheckReport mc_kn_chain_mean(double lambda, int n, int N, RandomSource& r) {
  const double bound = 3.0;
  return guarded("mc_kn_chain[lambda=" + short_fmt(lambda) + ",n=" + std::to_string(n) + "]",
                 bound, "N=" + std::to_string(N) + ", z-score", [&](Residuals& res) {
                   const specfun::HermiteLadder ladder(lambda, 2 * n);
                   const auto law = kn_distribution_brownian(n, ladder);
                   double exact = 0.0;
                   for (int k = 1; k <= n; ++k) exact += k * law[k - 1];
                   Moments mom;
                   for (int i = 0; i < N; ++i) mom.add(sample_kn_chain(ladder, n, r).back());
                   res.compare(mom.mean(), exact, INFINITY, Mode::abs, "mean");
                   res.z_score((mom.mean() - exact) / mom.se(), bound, "mean");
                   // Asymptotic diversity check, deliberately loose.
                   const double ratio = exact / std::sqrt(2.0 * n) / lambda;
                   if (!(std::abs(ratio - 1.0) <= 0.15))
                     res.fail("E[K_n] / (lambda sqrt(2n)) = " + fmt(ratio));
                   res.note("exact mean=" + fmt(exact) + " sample mean=" + fmt(mom.mean()));
                 });
}

// ---- suite ------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Task {
  std::string family;
  std::function<CheckReport(RandomSource&)> run;
};

std::vector<Task> registry(Tier tier) {
  const bool full = tier == Tier::full;
  std::vector<Task> t;
  auto add = [&](std::string family, std::function<CheckReport(RandomSource&)> f) {
    t.push_back({std::move(family), std::move(f)});
  };
  auto no_rng = [](auto f) { return [f](RandomSource&) { return f(); }; };

  // (model, n_max for normalization, n_max for addition rules)
  struct Case {
    PartitionModel model;
    int norm, addr;
  };
  std::vector<Case> cases{{PartitionModel::ewens(1.0), 8, 7},
                          {PartitionModel::two_param(0.5, 0.5), 8, 7},
                          {PartitionModel::two_param(0.3, 1.2), 8, 7},
                          {PartitionModel::brownian(1.0), 8, 7},
                          {PartitionModel::stable_conditioned(0.7, 1.0), 6, 6}};
  if (full) {
    cases.push_back({PartitionModel::brownian(0.5), 8, 7});
    cases.push_back({PartitionModel::brownian(2.0), 8, 7});
    cases.push_back({PartitionModel::generalized_gamma(0.5, 1.0, 1.0), 6, 5});
  }
  for (const auto& c : cases)
    add("normalization", no_rng([c] { return check_normalization(c.model, c.norm); }));
  for (const auto& c : cases)
    add("addition_rules", no_rng([c] { return check_addition_rules(c.model, c.addr); }));
  for (const auto& c : cases)
    add("consistency", no_rng([c] { return check_consistency_relations(c.model); }));
  add("point_values", no_rng([] { return check_point_values(); }));

  add("momalph", no_rng([] { return check_moment_recursion(0.5, 0.5, 6); }));
  add("momalph", no_rng([] { return check_moment_recursion(0.5, 2.0, 6); }));
  add("momalph", no_rng([] { return check_moment_recursion(0.3, 1.0, 6); }));
  if (full) add("momalph", no_rng([] { return check_moment_recursion(0.7, 0.5, 6); }));
  add("recurh", no_rng([] { return check_recurh(); }));
  add("psi2", no_rng([] { return check_psi2_chain(); }));
  add("strq3", no_rng([] { return check_strq3({0.0, 0.5, 1.0}, {0.5, 0.75, 1.5}); }));
  if (full) add("strq3", no_rng([] { return check_strq3({0.25, 2.0}, {0.0, 0.25, 2.5}); }));
  add("idsymm", no_rng([] { return check_idsymm(-0.9, -0.7); }));
  add("idsymm", no_rng([] { return check_idsymm(-1.2, -0.6); }));
  add("hfiden", no_rng([] { return check_hfiden(9); }));
  add("hermite_stirling", no_rng([] { return check_hermite_stirling(6); }));
  for (double th : {0.0, 0.5, 1.0}) add("pdint", no_rng([th] { return check_pdint(th, 5); }));
  add("scaling", no_rng([] { return check_scaling(0.5, {0.5, 2.0}, {0.5, 1.0, 2.0}, 4); }));
  add("pktilt", no_rng([] { return check_pktilt(1.0, 1.0, 5); }));
  if (full) add("pktilt", no_rng([] { return check_pktilt(0.5, 0.3, 5); }));
  add("sumform", no_rng([] { return check_sumform({0.5, 1.0, 2.0}, 8); }));
  add("kn_values", no_rng([] { return check_kn_small({0.5, 1.0, 2.0}); }));
  add("kn_unconditional", no_rng([] { return check_kn_unconditional(); }));
  add("bayes", no_rng([] { return check_bayes_inversion(20); }));
  add("gibbs", no_rng([] { return check_gibbs(0.3, 1.2, 8); }));
  add("gibbs", no_rng([] { return check_gibbs(0.5, 0.5, 8); }));
  add("brownian_vs_stable", no_rng([] { return check_brownian_vs_stable({0.5, 1.0, 2.0}, 6); }));
  add("stable_alternative",
      no_rng([] { return check_stable_alternative(0.5, {2.0, 0.5, 0.125}, 6); }));
  if (full)
    add("stable_alternative", no_rng([] { return check_stable_alternative(0.7, {1.0}, 5); }));
  add("generic_levy", no_rng([] { return check_generic_levy(6); }));

  const int N = 100000;
  std::vector<std::pair<std::string, PartitionModel>> crp{
      {"crp ewens", PartitionModel::ewens(1.0)},
      {"crp pd", PartitionModel::two_param(0.5, 0.5)},
      {"crp pd theta=0", PartitionModel::two_param(0.5, 0.0)},
      {"crp brownian", PartitionModel::brownian(1.0)},
      {"crp generalized_gamma", PartitionModel::generalized_gamma(0.5, 1.0, 1.0)}};
  for (const auto& [label, m] : crp)
    add("mc_eppf", [label = label, m = m, N](RandomSource& r) {
      return mc_compare_eppf(label + " " + m.str(), m, 3,
                             [&m](RandomSource& rr) { return sample_crp(m, 3, rr); }, N, r);
    });
  {
    const double c = 0.5 / std::sqrt(kPi);
    const int Nj = full ? 100000 : 20000;
    add("mc_eppf", [c, Nj](RandomSource& r) {
      const JumpProcessSpec spec{0.5, 1.0, c, 0.0, 1e-3};
      const auto m = PartitionModel::generalized_gamma(0.5, 1.0, c);
      return mc_compare_eppf("jumps " + m.str(), m, 3,
                             [&](RandomSource& rr) { return sample_jump_partition(spec, 3, rr); },
                             Nj, r);
    });
  }
  add("mc_residual", [N](RandomSource& r) { return mc_residual_ks(1.0, N, r); });
  add("mc_deletion", [N](RandomSource& r) { return mc_deletion(0.5, 0.5, 1, N, r); });
  add("mc_deletion", [N](RandomSource& r) { return mc_deletion(0.5, 0.5, 0, N, r); });
  add("mc_tilted", [N](RandomSource& r) { return mc_tilted_acceptance(0.5, 1.0, N, r); });
  add("mc_kn_chain", [full](RandomSource& r) {
    return mc_kn_chain_mean(1.0, 200, full ? 100000 : 20000, r);
  });
  for (auto ab : {std::pair{0.5, 1.0}, std::pair{0.3, 2.0}})
    for (const auto& c : {Composition{2, 1}, Composition{3}, Composition{1}})
      add("mc_cumulant", [ab, c, N](RandomSource& r) {
        return mc_cumulant_form(ab.first, ab.second, c, N, r);
      });
  return t;
}

int thread_budget(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PKPART_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

}  // namespace

std::vector<std::string> check_families() {
  std::vector<std::string> out;
  for (const auto& t : registry(Tier::full))
    if (std::find(out.begin(), out.end(), t.family) == out.end()) out.push_back(t.family);
  return out;
}

std::vector<CheckReport> run_all(const SuiteOptions& options) {
  auto tasks = registry(options.tier);
  // Sub-seeds depend on the family and the ordinal within it only.
  std::map<std::string, int> ordinal;
  std::vector<std::uint64_t> keys;
  for (const auto& t : tasks) keys.push_back(fnv1a(t.family + "#" + std::to_string(ordinal[t.family]++)));
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (options.only.empty() ||
        std::find(options.only.begin(), options.only.end(), tasks[i].family) != options.only.end())
      selected.push_back(i);

  std::vector<CheckReport> reports(selected.size());
  const RandomSource root(options.seed);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next++) < selected.size();) {
      RandomSource r = root.split(keys[selected[j]]);
      reports[j] = tasks[selected[j]].run(r);
    }
  };
  const int nthreads =
      std::min<int>(thread_budget(options.threads), static_cast<int>(selected.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return reports;
}

}  // namespace pkpart::verify
