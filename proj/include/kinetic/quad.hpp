#pragma once

#include <cstddef>
#include <functional>

namespace kinetic::quad {

struct QuadResult
{
  double value = 0.0;
  double error_estimate = 0.0;  ///< absolute
  std::size_t evaluations = 0;
};

struct QuadOptions
{
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Map an integrable endpoint singularity at `a` to a semi-infinite range
  /// through u = -log(x - a) before subdividing.
  bool singular_at_a = false;
  std::size_t max_evaluations = 1'000'000;
};

using Integrand = std::function<double(double)>;

/**
 * Globally adaptive 10/21-point Gauss–Kronrod quadrature on [a, b].
 *
 * Refines the interval with the largest error estimate until
 * error <= max(abs_tol, rel_tol * |value|).
 *
 * Throws InvalidDomain if a >= b and NonConvergence if the budget is spent
 * (or the integrand returns a non-finite value) before the target is met.
 */
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& options);

/// Same as above with abs_tol = rel_tol = tol.
QuadResult integrate(const Integrand& f, double a, double b, double tol = 1e-10,
                     bool singular_at_a = false);

}  // namespace kinetic::quad
