#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "kinetic/galerkin.hpp"
#include "kinetic/spectrum.hpp"

namespace kinetic {

/// w_n = (2n + 5/2)^{tau/2}: the Q^tau norm.
struct Shubin
{
  double tau = 0.0;
};

/// w_n = exp(c t (log(2n + 5/2))^{2/s}).
struct LogExp
{
  double c = 0.0;
  double t = 0.0;
  double s = 1.0;
};

/// w_n = exp(λ_n t / 2) λ_n^{lpower}, the weight of e^{tL/2} L^{lpower}.
struct Semigroup
{
  double t = 0.0;
  double lpower = 0.0;
};

using WeightSpec = std::variant<Shubin, LogExp, Semigroup>;

/// log w_n; -inf where the weight vanishes.
double log_weight(const SpectralTable& table, const WeightSpec& w, int n);
double weight(const SpectralTable& table, const WeightSpec& w, int n);

/// (Σ_n w_n² g_n²)^{1/2}, evaluated in log space; throws Overflow if unrepresentable.
double weighted_norm(const SpectralTable& table, const ModeVector& g, const WeightSpec& w);

struct CertificationReport
{
  std::string check;
  bool pass = true;
  double worst_t = 0.0;
  /// smallest relative margin (bound - value) / bound over the grid
  double worst_margin = 0.0;
  std::optional<double> first_violation_t;
  std::string detail;
  std::map<std::string, double> fitted_constants;

  nlohmann::json to_json() const;
};

/// Throws CertificationFailure describing the first violation.
void require_pass(const CertificationReport& report);

/// Trapezoidal ∫₀^{t_i} Σ_n λ_n g_n(τ)² dτ at every grid time.
std::vector<double> dissipation_integrals(const SpectralTable& table, const Trajectory& trajectory);

/// Σ g_n(t)² + ½ ∫₀^t Σ λ_n g_n² ≤ ‖g0‖² (1 + slack) at every grid time.
CertificationReport certify_energy_inequality(const SpectralTable& table, const Trajectory& trajectory,
                                              double g0_norm, double slack = 1e-6);

/// D(t) = e^{λ₂ t/2} Σ_n e^{λ_n t} g_n(t)² nonincreasing up to relative slack.
CertificationReport certify_monotone_decay(const SpectralTable& table, const Trajectory& trajectory,
                                           double slack = 1e-9);

/// ½ min_{2<=n<=N} λ_n / (log(2n+5/2))^{2/s}: the largest c0 with 2 c0 (log)^{2/s} <= λ_n on the table.
double fit_c0(const SpectralTable& table);

/// c_s = ((2-s)/4) (s / (4 c0))^{s/(2-s)}, obtained from the Young bound with τ = c0 t.
double cs_from_c0(double c0, double s);

struct RateOptions
{
  double c0_hat = 0.0;
  /// defaults to cs_from_c0(c0_hat, s)
  std::optional<double> cs_hat;
  int k_max = 8;
  /// relative rounding allowance on every bound
  double slack = 1e-12;
};

/**
 * (a) ‖e^{c0 t (log(H+1))^{2/s}} g(t)‖ ≤ e^{-λ₂ t/4} ‖g0‖,
 * (b) ‖g(t)‖_{Q^{2 c0 t}} under the same bound,
 * (c) for s < 2 and k = 1..k_max, t > 0:
 *     ‖g(t)‖_{Q^k} ≤ e^{-λ₂ t/4} e^{c_s (1/t)^{s/(2-s)} k^{2/(2-s)}} ‖g0‖.
 */
CertificationReport certify_rates(const SpectralTable& table, const Trajectory& trajectory, double g0_norm,
                                  const RateOptions& options);

struct YoungCheck
{
  double h = 0.0;
  double bound = 0.0;
  double log_h = 0.0;
  double log_bound = 0.0;

  /// h >= bound, compared in log space with a few ulps of allowance
  bool holds() const;
};

/// h_{τ,k}(x) = e^{2τ (log x)^{2/s}} / x^k against e^{-((2-s)/2)(s/(4τ))^{s/(2-s)} k^{2/(2-s)}}.
YoungCheck young_bound_check(double x, double tau, double k, double s);

/**
 * Largest observed |(Γ(f,g),h)| / (‖f‖ ‖W g‖ ‖W h‖), W_n = (log(2n+5/2))^{1/s},
 * over random f, g, h supported on modes 2..N.
 */
double trilinear_constant_probe(const SpectralTable& table, int sample_count, std::uint64_t seed = 1);

/// young_bound_check over random x ∈ [1, 1e6] (log-uniform), τ ∈ [0.01, 5], k ∈ [1, 20], s ∈ [0.05, 1.95].
CertificationReport certify_young(int sample_count, std::uint64_t seed = 1);

}  // namespace kinetic
