// pkpart: command-line front end for EPPF evaluation, block-count laws,
// samplers and the verification suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pkpart/models.hpp"
#include "pkpart/samplers.hpp"
#include "pkpart/verify.hpp"

using namespace pkpart;
using nlohmann::json;

namespace {

constexpr int kUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string model;
  std::optional<double> alpha, theta, lambda, t, b, c;
  std::string shape;
  int n = 0;
  int count = 1;
  int m = 0, k = 0;
  std::optional<double> q;
  std::uint64_t seed = 0;
  bool gem = false, kn_chain = false, residual = false, unconditional = false;
  std::string tier = "fast";
  std::vector<std::string> only;
  std::string format = "json";
  std::string output;
};

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing --") + flag);
  return *v;
}

PartitionModel make_model(const Config& cfg) {
  const auto& m = cfg.model;
  if (m.empty()) throw UsageError("missing --model");
  if (m == "pd") return PartitionModel::two_param(need(cfg.alpha, "alpha"), need(cfg.theta, "theta"));
  if (m == "ewens") return PartitionModel::ewens(need(cfg.theta, "theta"));
  if (m == "brownian") return PartitionModel::brownian(need(cfg.lambda, "lambda"));
  if (m == "stable")
    return PartitionModel::stable_conditioned(need(cfg.alpha, "alpha"), need(cfg.t, "t"));
  if (m == "gg")
    return PartitionModel::generalized_gamma(need(cfg.alpha, "alpha"), need(cfg.b, "b"),
                                             need(cfg.c, "c"));
  throw UsageError("unknown model '" + m + "'");
}

Composition parse_shape(const std::string& s) {
  std::vector<int> parts;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("bad --shape '" + s + "'");
    }
    if (used != tok.size() || v < 1) throw UsageError("bad --shape '" + s + "'");
    parts.push_back(v);
  }
  if (parts.empty()) throw UsageError("empty --shape");
  return Composition(parts);
}

std::string num(double x) { return json(x).dump(); }

std::string csv_quote(const std::string& s) {
  return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// ---- subcommands: each returns (exit code, text) ---------------------------

struct Out {
  int code = 0;
  std::string text;
};

Out cmd_eppf(const Config& cfg) {
  const auto model = make_model(cfg);
  if (!cfg.shape.empty()) {
    const auto c = parse_shape(cfg.shape);
    const double p = eppf(model, c);
    if (cfg.format == "csv") return {0, "shape,p\n" + csv_quote(join(c.parts())) + "," + num(p) + "\n"};
    json j{{"model", model.to_json()}, {"shape", c.parts()}, {"p", p}};
    return {0, j.dump() + "\n"};
  }
  if (cfg.n < 1) throw UsageError("eppf needs --shape or --n");
  const auto table = eppf_table(model, cfg.n);
  if (cfg.format == "csv") {
    std::string s = "shape,count,p\n";
    for (const auto& e : table["entries"])
      s += csv_quote(join(e["shape"].get<std::vector<int>>())) + "," +
           e["count"].get<std::string>() + "," + e["p"].dump() + "\n";
    return {0, s};
  }
  return {0, table.dump() + "\n"};
}

Out cmd_predict(const Config& cfg) {
  const auto model = make_model(cfg);
  const auto c = cfg.shape.empty() ? Composition::none() : parse_shape(cfg.shape);
  const auto rule = prediction_rule(model, c);
  const std::vector<double> join_p(rule.begin(), rule.end() - 1);
  if (cfg.format == "csv") {
    std::string s = "block,p\n";
    for (std::size_t j = 0; j < join_p.size(); ++j) s += std::to_string(j + 1) + "," + num(join_p[j]) + "\n";
    return {0, s + "new," + num(rule.back()) + "\n"};
  }
  json j{{"model", model.to_json()}, {"shape", c.parts()}, {"join", join_p}, {"new", rule.back()}};
  return {0, j.dump() + "\n"};
}

Out cmd_kn(const Config& cfg) {
  if (cfg.n < 1) throw UsageError("kn needs --n >= 1");
  if (cfg.unconditional) {
    if (cfg.lambda) throw UsageError("--unconditional and --lambda are exclusive");
    const auto law = kn_distribution_unconditional(cfg.n);
    std::vector<std::string> exact;
    for (const auto& v : law) exact.push_back(v.str());
    const auto approx = to_doubles(law);
    if (cfg.format == "csv") {
      std::string s = "k,p,p_exact\n";
      for (int k = 1; k <= cfg.n; ++k)
        s += std::to_string(k) + "," + num(approx[k - 1]) + "," + exact[k - 1] + "\n";
      return {0, s};
    }
    json j{{"n", cfg.n}, {"unconditional", true}, {"p", approx}, {"p_exact", exact}};
    return {0, j.dump() + "\n"};
  }
  const double lambda = cfg.lambda.value_or(1.0);
  const auto law = kn_distribution_brownian(cfg.n, lambda);
  if (cfg.format == "csv") {
    std::string s = "k,p\n";
    for (int k = 1; k <= cfg.n; ++k) s += std::to_string(k) + "," + num(law[k - 1]) + "\n";
    return {0, s};
  }
  json j{{"n", cfg.n}, {"lambda", lambda}, {"p", law}};
  return {0, j.dump() + "\n"};
}

Out cmd_moments(const Config& cfg) {
  const auto model = make_model(cfg);
  json j{{"model", model.to_json()}};
  if (cfg.q) {
    // Structural moment mu(q) where a direct route exists.
    double v;
    if (auto* s = model.get<StableConditioned>()) {
      v = specfun::structural_moment(s->alpha, *cfg.q, s->t);
    } else if (auto* b = model.get<BrownianConditioned>()) {
      v = specfun::structural_moment_hermite(*cfg.q, b->lambda);
    } else {
      throw UsageError("--q needs --model stable or brownian");
    }
    j["q"] = *cfg.q;
    j["mu"] = v;
  }
  if (cfg.m > 0 || cfg.k > 0) {
    if (cfg.m < 1 || cfg.k < 1) throw UsageError("power sums need --m >= 1 and --k >= 1");
    j["m"] = cfg.m;
    j["k"] = cfg.k;
    j["power_sum_moment"] = power_sum_moment(model, cfg.m, cfg.k);
  }
  if (j.size() == 1) throw UsageError("moments needs --q or --m/--k");
  if (cfg.format == "csv") {
    std::string s = "quantity,value\n";
    if (j.contains("mu")) s += "mu," + j["mu"].dump() + "\n";
    if (j.contains("power_sum_moment")) s += "power_sum_moment," + j["power_sum_moment"].dump() + "\n";
    return {0, s};
  }
  return {0, j.dump() + "\n"};
}

Out cmd_sample(const Config& cfg) {
  if (cfg.format != "json") throw UsageError("sample writes JSON lines only");
  if (cfg.count < 1) throw UsageError("--count must be positive");
  if (cfg.gem + cfg.kn_chain + cfg.residual > 1)
    throw UsageError("--gem, --kn-chain and --residual are exclusive");
  const RandomSource root(cfg.seed);
  std::string s;
  auto emit = [&](const json& header, auto&& draw) {
    s += header.dump() + "\n";
    for (int i = 0; i < cfg.count; ++i) {
      RandomSource r = root.split(static_cast<std::uint64_t>(i));
      s += draw(r).dump() + "\n";
    }
  };
  if (cfg.gem) {
    const double a = need(cfg.alpha, "alpha"), th = need(cfg.theta, "theta");
    if (cfg.k < 1) throw UsageError("--gem needs --k >= 1");
    emit({{"sampler", "gem"}, {"alpha", a}, {"theta", th}, {"k", cfg.k}, {"seed", cfg.seed}},
         [&](RandomSource& r) { return to_json(sample_gem(a, th, cfg.k, r)); });
  } else if (cfg.residual) {
    const double l = need(cfg.lambda, "lambda");
    if (cfg.k < 1) throw UsageError("--residual needs --k >= 1");
    emit({{"sampler", "residual"}, {"lambda", l}, {"k", cfg.k}, {"seed", cfg.seed}},
         [&](RandomSource& r) { return to_json(sample_residual_construction(l, cfg.k, r)); });
  } else if (cfg.kn_chain) {
    const double l = need(cfg.lambda, "lambda");
    if (cfg.n < 1) throw UsageError("--kn-chain needs --n >= 1");
    const specfun::HermiteLadder ladder(l, std::max(2 * cfg.n, 2));
    emit({{"sampler", "kn_chain"}, {"lambda", l}, {"n", cfg.n}, {"seed", cfg.seed}},
         [&](RandomSource& r) { return json(sample_kn_chain(ladder, cfg.n, r)); });
  } else {
    const auto model = make_model(cfg);
    if (cfg.n < 1) throw UsageError("sample needs --n >= 1");
    emit({{"sampler", "crp"}, {"model", model.to_json()}, {"n", cfg.n}, {"seed", cfg.seed}},
         [&](RandomSource& r) { return to_json(sample_crp(model, cfg.n, r)); });
  }
  return {0, s};
}

Out cmd_verify(const Config& cfg) {
  verify::SuiteOptions o;
  o.seed = cfg.seed;
  if (cfg.tier != "fast" && cfg.tier != "full") throw UsageError("--tier must be fast or full");
  o.tier = cfg.tier == "full" ? verify::Tier::full : verify::Tier::fast;
  const auto families = verify::check_families();
  for (const auto& name : cfg.only)
    if (std::find(families.begin(), families.end(), name) == families.end())
      throw UsageError("unknown check '" + name + "'");
  o.only = cfg.only;
  const auto reports = verify::run_all(o);
  std::string s;
  if (cfg.format == "csv") {
    s = verify::csv_header() + "\n";
    for (const auto& r : reports) s += verify::to_csv_row(r) + "\n";
  } else {
    s = verify::to_json(reports).dump(2) + "\n";
  }
  return {verify::exit_code(reports), s};
}

// Whole output lands at once: temporary file in the target directory, then rename.
void write_atomically(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson-Kingman partition calculus"};
  app.require_subcommand(1);
  Config cfg;

  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "pd | ewens | brownian | stable | gg")
        ->check(CLI::IsMember({"pd", "ewens", "brownian", "stable", "gg"}));
    sub->add_option("--alpha", cfg.alpha, "discount / stable index");
    sub->add_option("--theta", cfg.theta, "concentration");
    sub->add_option("--lambda", cfg.lambda, "local time (brownian model)");
    sub->add_option("--t", cfg.t, "conditioned total (stable model)");
    sub->add_option("--b", cfg.b, "exponential tilt (gg model)");
    sub->add_option("--c", cfg.c, "Levy scale (gg model)");
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output", cfg.output, "write here instead of stdout");
  };

  auto* e = app.add_subcommand("eppf", "EPPF of one shape or the table for all shapes of n");
  model_flags(e);
  e->add_option("--shape", cfg.shape, "block sizes, e.g. 2,1");
  e->add_option("--n", cfg.n, "table for all shapes of n");
  common(e);

  auto* p = app.add_subcommand("predict", "prediction rule after a given composition");
  model_flags(p);
  p->add_option("--shape", cfg.shape, "current block sizes (empty: first element)");
  common(p);

  auto* kn = app.add_subcommand("kn", "law of the number of blocks K_n (brownian model)");
  kn->add_option("--n", cfg.n)->required();
  kn->add_option("--lambda", cfg.lambda, "local time (default 1)");
  kn->add_flag("--unconditional", cfg.unconditional, "exact law without conditioning");
  common(kn);

  auto* mo = app.add_subcommand("moments", "power-sum and structural moments");
  model_flags(mo);
  mo->add_option("--m", cfg.m, "power m in S_m = sum P_i^m");
  mo->add_option("--k", cfg.k, "moment order of S_m");
  mo->add_option("--q", cfg.q, "structural moment order");
  common(mo);

  auto* sa = app.add_subcommand("sample", "draw partitions, frequencies or K_n paths");
  model_flags(sa);
  sa->add_option("--n", cfg.n, "partition size / chain length");
  sa->add_option("--count", cfg.count, "number of draws");
  sa->add_option("--k", cfg.k, "number of frequencies (--gem, --residual)");
  sa->add_option("--seed", cfg.seed);
  sa->add_flag("--gem", cfg.gem, "stick-breaking frequencies");
  sa->add_flag("--kn-chain", cfg.kn_chain, "block-count chain of the brownian model");
  sa->add_flag("--residual", cfg.residual, "residual construction at --lambda");
  common(sa);

  auto* ve = app.add_subcommand("verify", "run the identity and Monte Carlo suite");
  ve->add_option("--tier", cfg.tier, "fast | full");
  ve->add_option("--seed", cfg.seed);
  ve->add_option("--only", cfg.only, "check families to run")->delimiter(',');
  common(ve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kUsage;
  }

  Out out;
  try {
    if (*e) out = cmd_eppf(cfg);
    else if (*p) out = cmd_predict(cfg);
    else if (*kn) out = cmd_kn(cfg);
    else if (*mo) out = cmd_moments(cfg);
    else if (*sa) out = cmd_sample(cfg);
    else out = cmd_verify(cfg);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const DomainError& err) {
    std::cerr << "invalid parameters: " << err.what() << "\n";
    return kUsage;
  } catch (const BoundsError& err) {
    std::cerr << "out of range: " << err.what() << "\n";
    return kUsage;
  } catch (const ConfigurationError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kUsage;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }

  try {
    if (cfg.output.empty()) {
      std::cout << out.text;
      std::cout.flush();
    } else {
      write_atomically(cfg.output, out.text);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return out.code;
}
