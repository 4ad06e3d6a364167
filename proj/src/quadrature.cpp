#include "pkpart/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pkpart::quad::detail {

namespace {

Rule build_rule() {
  using boost::math::quadrature::gauss;
  using boost::math::quadrature::gauss_kronrod;
  const auto& kx = gauss_kronrod<double, 21>::abscissa();
  const auto& kw = gauss_kronrod<double, 21>::weights();
  const auto& gx = gauss<double, 10>::abscissa();
  const auto& gw = gauss<double, 10>::weights();
  Rule r{};
  for (int j = 0; j < 11; ++j) {
    r.x[j] = kx[j];
    r.wk[j] = kw[j];
    r.wg[j] = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (std::abs(gx[i] - kx[j]) < 1e-14) r.wg[j] = gw[i];
  }
  return r;
}

}  // namespace

const Rule& gk21() {
  static const Rule rule = build_rule();
  return rule;
}

void fail(const char* what, double a, double b, const Result& r) {
  std::ostringstream os;
  os << what << ": no convergence on [" << a << ", " << b << "], estimate "
     << r.value << " +/- " << r.error;
  throw NumericalError(os.str());
}

}  // namespace pkpart::quad::detail
