#pragma once

// Orthogonal polynomials and the eigenfunctions of the harmonic oscillator
// H = -Δ + |v|²/4 used as the spectral basis.

#include <cmath>
#include <numbers>
#include <string>

#include "kinetic/errors.hpp"

namespace kinetic::specfun {

/// Generalized Laguerre polynomial L_n^{(alpha)}(x), three-term recurrence.
template <typename Scalar>
Scalar laguerre(int n, Scalar alpha, Scalar x)
{
  if (n < 0) {
    throw DomainError("laguerre: negative degree");
  }
  Scalar prev = Scalar(1);
  if (n == 0) {
    return prev;
  }
  Scalar curr = Scalar(1) + alpha - x;
  for (int k = 1; k < n; ++k) {
    const Scalar next = ((Scalar(2 * k + 1) + alpha - x) * curr - (Scalar(k) + alpha) * prev) / Scalar(k + 1);
    prev = curr;
    curr = next;
  }
  return curr;
}

/// Legendre polynomial P_l(x) on [-1, 1], Bonnet recurrence.
template <typename Scalar>
Scalar legendre(int l, Scalar x)
{
  using std::abs;
  if (l < 0) {
    throw DomainError("legendre: negative degree");
  }
  if (abs(x) > Scalar(1)) {
    throw DomainError("legendre: |x| > 1");
  }
  Scalar prev = Scalar(1);
  if (l == 0) {
    return prev;
  }
  Scalar curr = x;
  for (int k = 1; k < l; ++k) {
    const Scalar next = (Scalar(2 * k + 1) * x * curr - Scalar(k) * prev) / Scalar(k + 1);
    prev = curr;
    curr = next;
  }
  return curr;
}

/**
 * P_l(1 - d) - 1 for d >= 0 without the cancellation of the direct form.
 *
 * With e_l = P_l - 1 the Bonnet recurrence becomes
 * (l+1) e_{l+1} = (2l+1) x e_l - l e_{l-1} - (2l+1) d.
 */
template <typename Scalar>
Scalar legendre_minus_one(int l, Scalar d)
{
  if (l < 0) {
    throw DomainError("legendre_minus_one: negative degree");
  }
  if (l == 0) {
    return Scalar(0);
  }
  const Scalar x = Scalar(1) - d;
  Scalar prev = Scalar(0);
  Scalar curr = -d;
  for (int k = 1; k < l; ++k) {
    const Scalar next = (Scalar(2 * k + 1) * (x * curr - d) - Scalar(k) * prev) / Scalar(k + 1);
    prev = curr;
    curr = next;
  }
  return curr;
}

/**
 * L²(ℝ)-normalized Hermite function with Gaussian e^{-x²/4}:
 * H_n = (2π)^{-1/4} (n!)^{-1/2} (x/2 - d/dx)^n e^{-x²/4}.
 *
 * Uses x H_n = sqrt(n+1) H_{n+1} + sqrt(n) H_{n-1}.
 */
template <typename Scalar>
Scalar hermite_fn(int n, Scalar x)
{
  using std::exp;
  using std::pow;
  using std::sqrt;
  if (n < 0) {
    throw DomainError("hermite_fn: negative index");
  }
  Scalar prev = Scalar(0);
  Scalar curr = pow(Scalar(2) * std::numbers::pi_v<Scalar>, Scalar(-0.25)) * exp(-x * x / Scalar(4));
  for (int k = 0; k < n; ++k) {
    const Scalar next = (x * curr - sqrt(Scalar(k)) * prev) / sqrt(Scalar(k + 1));
    prev = curr;
    curr = next;
  }
  return curr;
}

/// log of the normalization (n! / (√2 Γ(n + 3/2)))^{1/2} (4π)^{-1/2}.
template <typename Scalar>
Scalar radial_log_normalization(int n)
{
  using std::lgamma;
  using std::log;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return Scalar(0.5) * (lgamma(Scalar(n + 1)) - Scalar(0.5) * log(Scalar(2)) - lgamma(Scalar(n) + Scalar(1.5))) -
         Scalar(0.5) * log(Scalar(4) * pi);
}

/// Radial eigenfunction φ_{n,0,0} at |v| = r.
template <typename Scalar>
Scalar radial_eigenfunction(int n, Scalar r)
{
  using std::exp;
  if (n < 0) {
    throw DomainError("radial_eigenfunction: negative index");
  }
  if (r < Scalar(0)) {
    throw DomainError("radial_eigenfunction: negative radius");
  }
  const Scalar x = r * r / Scalar(2);
  return exp(radial_log_normalization<Scalar>(n) - r * r / Scalar(4)) * laguerre(n, Scalar(0.5), x);
}

/// Eigenvalue of H on φ_{n,0,0}.
constexpr double oscillator_eigenvalue(int n) { return 2.0 * n + 1.5; }

}  // namespace kinetic::specfun
