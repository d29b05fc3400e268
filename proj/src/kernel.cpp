#include "kinetic/kernel.hpp"

#include <cmath>
#include <string>

#include "kinetic/errors.hpp"
#include "kinetic/quad.hpp"

namespace kinetic {

CollisionKernel::CollisionKernel(double s, double representative_constant)
    : s_(s)
    , constant_(representative_constant)
{
  if (!(s > 0.0 && s <= 2.0)) {
    throw DomainError("CollisionKernel: s must lie in (0, 2], got " + std::to_string(s));
  }
  if (!(representative_constant > 0.0)) {
    throw DomainError("CollisionKernel: representative constant must be positive");
  }
}

double CollisionKernel::beta(double theta) const
{
  if (!(theta > 0.0 && theta <= theta_max())) {
    throw DomainError("beta: theta must lie in (0, pi/4], got " + std::to_string(theta));
  }
  const double sn = std::sin(theta);
  const double p = log_exponent();
  return p == 0.0 ? constant_ / sn : constant_ * std::pow(-std::log(sn), p) / sn;
}

double CollisionKernel::moment(int k, int l, MomentRoute route, double tol) const
{
  if (k <= 0) {
    throw DivergentMoment("moment: k = " + std::to_string(k) + " diverges at theta = 0");
  }
  if (l < 0) {
    throw DomainError("moment: l must be nonnegative");
  }

  quad::QuadOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = tol;
  opt.singular_at_a = true;
  const double p = log_exponent();

  if (route == MomentRoute::theta) {
    const auto integrand = [this, k, l](double theta) {
      const double sn = std::sin(theta);
      const double cs = std::cos(theta);
      return beta(theta) * std::pow(sn, 2 * k) * std::pow(cs, 2 * l);
    };
    return quad::integrate(integrand, 0.0, theta_max(), opt).value;
  }

  const auto integrand = [p, k, l](double x) {
    const double logs = p == 0.0 ? 1.0 : std::pow(-std::log(x), p);
    return logs * std::pow(x, k - 1) * std::pow(1.0 - x, l - 0.5);
  };
  return constant_ * std::pow(2.0, -2.0 / s_) * quad::integrate(integrand, 0.0, 0.5, opt).value;
}

}  // namespace kinetic
