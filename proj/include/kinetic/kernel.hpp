#pragma once

#include <numbers>

namespace kinetic {

enum class MomentRoute
{
  theta,        ///< integrate in θ over (0, π/4]
  substituted,  ///< integrate in x = sin²θ over (0, 1/2]
};

/**
 * Debye–Yukawa angular kernel β(θ) = 2π b(cos θ) sin θ.
 *
 * Only the singular behaviour of b is physical, so a single representative is
 * fixed: β(θ) = C (sin θ)^{-1} (log(1/sin θ))^{2/s - 1} on (0, π/4], C = 1.
 */
class CollisionKernel
{
 public:
  explicit CollisionKernel(double s, double representative_constant = 1.0);

  double s() const { return s_; }
  double theta_max() const { return std::numbers::pi / 4; }
  double representative_constant() const { return constant_; }

  /// Exponent 2/s - 1 of the logarithmic factor.
  double log_exponent() const { return 2.0 / s_ - 1.0; }

  /// Throws DomainError unless 0 < θ <= π/4.
  double beta(double theta) const;

  /**
   * ∫₀^{π/4} β(θ) sin^{2k}θ cos^{2l}θ dθ, k >= 1.
   *
   * The substituted route evaluates
   * C 2^{-2/s} ∫₀^{1/2} (log 1/x)^{2/s-1} x^{k-1} (1-x)^{l-1/2} dx.
   * Throws DivergentMoment for k = 0.
   */
  double moment(int k, int l, MomentRoute route = MomentRoute::theta, double tol = 1e-12) const;

 private:
  double s_;
  double constant_;
};

}  // namespace kinetic
